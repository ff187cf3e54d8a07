#pragma once

#include <cstddef>
#include <functional>
#include <string_view>

namespace ragent {

// Heuristic token estimate: ceil(chars / 4). Every budget in the harness is
// an order-of-magnitude limit, so a fast model-agnostic counter is enough.
inline std::size_t count_tokens(std::string_view text) {
    return (text.size() + 3) / 4;
}

// Anything that accepts a TokenCounter defaults to the heuristic above but
// can be handed a real tokenizer.
using TokenCounter = std::function<std::size_t(std::string_view)>;

inline TokenCounter default_token_counter() {
    return [](std::string_view text) { return count_tokens(text); };
}

} // namespace ragent
