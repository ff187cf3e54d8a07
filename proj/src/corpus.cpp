#include "ragent/corpus.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace ragent {

std::string Document::joined_text() const {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i > 0) out += '\n';
        out += lines[i];
    }
    return out;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::string normalized;
    normalized.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n') continue;
        normalized += text[i];
    }
    // A single trailing newline is a line terminator, not an empty line.
    if (!normalized.empty() && normalized.back() == '\n') normalized.pop_back();
    if (normalized.empty()) return {};

    std::vector<std::string> lines;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = normalized.find('\n', start);
        if (pos == std::string::npos) {
            lines.push_back(normalized.substr(start));
            break;
        }
        lines.push_back(normalized.substr(start, pos - start));
        start = pos + 1;
    }
    return lines;
}

std::string extract_title(const std::vector<std::string>& lines, const std::string& fallback) {
    for (const auto& line : lines) {
        std::size_t begin = 0;
        while (begin < line.size() && (line[begin] == '#' || line[begin] == ' ' || line[begin] == '\t'))
            ++begin;
        std::size_t end = line.size();
        while (end > begin && (line[end - 1] == ' ' || line[end - 1] == '\t')) --end;
        if (end > begin) {
            std::string title = line.substr(begin, end - begin);
            if (title.size() > 120) title.resize(120);
            return title;
        }
    }
    return fallback;
}

namespace {

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string extension_of(const fs::path& p) {
    std::string ext = p.extension().string();
    if (!ext.empty() && ext.front() == '.') ext.erase(0, 1);
    return lowercase(ext);
}

bool looks_binary(const std::string& content) {
    return content.find('\0') != std::string::npos;
}

} // namespace

CorpusManifest::CorpusManifest(std::vector<Document> documents, std::vector<std::string> warnings)
    : documents_(std::move(documents)), warnings_(std::move(warnings)) {}

CorpusManifest CorpusManifest::ingest_directory(const fs::path& root,
                                                const std::set<std::string>& extensions,
                                                const TokenCounter& counter) {
    if (!fs::exists(root) || !fs::is_directory(root))
        throw IngestError("corpus directory not found: " + root.string());
    if (extensions.empty())
        throw IngestError("no extensions given");

    std::vector<fs::path> candidates;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        if (extensions.count(extension_of(entry.path())) == 0) continue;
        candidates.push_back(entry.path());
    }
    std::vector<std::pair<std::string, fs::path>> ordered;
    ordered.reserve(candidates.size());
    for (const auto& p : candidates)
        ordered.emplace_back(fs::relative(p, root).generic_string(), p);
    std::sort(ordered.begin(), ordered.end());

    std::vector<Document> docs;
    std::vector<std::string> warnings;
    for (const auto& [rel, path] : ordered) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            warnings.push_back("unreadable file skipped: " + rel);
            continue;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string content = buf.str();
        if (looks_binary(content)) {
            warnings.push_back("binary file skipped: " + rel);
            continue;
        }

        Document doc;
        doc.doc_id = rel;
        doc.filename = path.filename().string();
        doc.file_type = extension_of(path);
        doc.lines = split_lines(content);
        doc.total_lines = doc.lines.size();
        doc.title = extract_title(doc.lines, doc.filename);
        doc.token_count = counter(doc.joined_text());
        docs.push_back(std::move(doc));
    }

    if (docs.empty())
        throw IngestError("no documents found under " + root.string());
    return CorpusManifest(std::move(docs), std::move(warnings));
}

const Document* CorpusManifest::find(const std::string& doc_id) const {
    for (const auto& d : documents_)
        if (d.doc_id == doc_id) return &d;
    return nullptr;
}

const Document& CorpusManifest::get(const std::string& doc_id) const {
    const Document* d = find(doc_id);
    if (!d) throw std::out_of_range("unknown doc_id: " + doc_id);
    return *d;
}

CorpusStats CorpusManifest::stats() const {
    CorpusStats s;
    s.doc_count = documents_.size();
    for (const auto& d : documents_) s.total_tokens += d.token_count;
    s.avg_doc_tokens =
        s.doc_count ? static_cast<double>(s.total_tokens) / static_cast<double>(s.doc_count) : 0.0;
    return s;
}

nlohmann::json CorpusManifest::to_json() const {
    nlohmann::json docs = nlohmann::json::array();
    for (const auto& d : documents_) {
        docs.push_back({{"doc_id", d.doc_id},
                        {"title", d.title},
                        {"filename", d.filename},
                        {"file_type", d.file_type},
                        {"total_lines", d.total_lines},
                        {"token_count", d.token_count}});
    }
    CorpusStats s = stats();
    return {{"documents", docs},
            {"corpus_stats",
             {{"doc_count", s.doc_count},
              {"total_tokens", s.total_tokens},
              {"avg_doc_tokens", s.avg_doc_tokens}}}};
}

} // namespace ragent
