#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "dupviper/corpus.hpp"

namespace dupviper {

inline constexpr std::size_t kDefaultMinTokens = 5;

/**
 * All occurrences of one maximal repeated token sequence. Members are
 * token-aligned and ordered by position; overlapping occurrences are kept
 * as distinct members.
 */
struct ExactCloneGroup {
    std::vector<TextFragment> members;
    std::vector<std::size_t> token_starts;  // index of each member's first token
    std::size_t token_length = 0;

    std::size_t cardinality() const noexcept { return members.size(); }
};

using Rgb = std::array<double, 3>;

struct HeatMap {
    const Document* doc = nullptr;
    std::size_t min_tokens = kDefaultMinTokens;
    std::vector<std::size_t> temperatures;  // one per token
    std::size_t t_max = 0;
    std::vector<Rgb> colors;                // one per token
};

// Suffix array of an integer sequence (prefix doubling with radix passes).
std::vector<std::size_t> suffix_array(const std::vector<std::size_t>& seq);

// lcp[i] = longest common prefix of suffixes sa[i-1] and sa[i]; lcp[0] = 0 (Kasai et al.).
std::vector<std::size_t> lcp_array(const std::vector<std::size_t>& seq, const std::vector<std::size_t>& sa);

struct TokenRepeat {
    std::vector<std::size_t> starts;  // ascending
    std::size_t length = 0;
};

// Maximal repeats of an integer sequence with length >= min_length, one entry per repeat
// listing every occurrence. Ordered by (first start, length).
std::vector<TokenRepeat> maximal_repeats(const std::vector<std::size_t>& seq, std::size_t min_length);

// Distinct token strings mapped to dense integers in order of first appearance.
std::vector<std::size_t> token_ids(const Document& doc);

std::vector<ExactCloneGroup> find_exact_groups(const Document& doc, std::size_t min_tokens = kDefaultMinTokens);

std::size_t token_temperature(const Token& token, const std::vector<ExactCloneGroup>& groups);

// (h / t_max) * red + (1 - h / t_max) * white; white when t_max == 0.
Rgb heat_color(std::size_t h, std::size_t t_max);

HeatMap build_heatmap(const Document& doc, std::size_t min_tokens = kDefaultMinTokens);

// {"doc", "min_tokens", "t_max", "tokens": [{"b", "e", "text", "h", "color": [r, g, b]}]}
nlohmann::json heatmap_to_json(const HeatMap& heat);

// Standalone page, one background-colored span per token.
std::string heatmap_to_html(const HeatMap& heat);

}  // namespace dupviper
