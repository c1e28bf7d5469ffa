#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dupviper/corpus.hpp"

namespace dupviper {

/**
 * Ordered, pairwise non-overlapping fragments sharing an archetype: an ordered
 * list of strings occurring, in order, in every member and covering at least
 * a fraction k of each member.
 */
struct NearDuplicateGroup {
    std::vector<TextFragment> members;
    double k = 1.0;
    std::optional<std::vector<std::u32string>> archetype;
    std::string label;
};

// lcs(p, g) >= k * max(|p|, |g|). Throws ParameterError for k outside (1/sqrt(3), 1].
bool is_near_duplicate(std::u32string_view p, std::u32string_view g, double k);

enum class Verification { full, pairwise };

std::string to_string(Verification v);

struct GroupValidation {
    bool ok = false;
    Verification verification = Verification::full;
    std::optional<std::size_t> failing_member;
    std::string reason;
    std::optional<std::size_t> coverage;  // archetype length that was checked, when known
};

// Multi-way LCS is attempted only below this many DP cells; larger groups are verified pairwise.
inline constexpr std::size_t kMultiLcsCellBudget = 200'000'000;

// Longest common subsequence of up to four strings; nullopt when the DP exceeds cell_budget.
std::optional<std::size_t> multi_lcs_length(const std::vector<std::u32string_view>& strings,
                                            std::size_t cell_budget = kMultiLcsCellBudget);

GroupValidation validate_group(const NearDuplicateGroup& group);

// (|p| / 2) * (3k - 1/k)
double o_min(std::size_t p_len, double k);

struct CompletenessReport {
    double o_min = 0;
    std::vector<std::size_t> best_overlap;  // per group member
    std::vector<bool> satisfied;
    std::size_t violations = 0;

    bool ok() const noexcept { return violations == 0; }
};

CompletenessReport check_completeness(const std::vector<TextFragment>& group, const std::vector<TextFragment>& results,
                                      std::size_t p_len, double k);
CompletenessReport check_completeness(const NearDuplicateGroup& group, const std::vector<TextFragment>& results,
                                      std::size_t p_len);

enum class FillerAlphabet { latin, cyrillic, mixed };

// Random word-like filler text; deterministic for a seed.
std::u32string filler_text(std::size_t length, FillerAlphabet alphabet, std::uint64_t seed);

// One variant of the pattern with the given number of single-symbol insertions and deletions,
// split so that the variant stays within similarity k. Throws GenerationError when impossible.
std::u32string plant_variant(std::u32string_view pattern, double k, std::size_t edits, std::uint64_t seed,
                             FillerAlphabet alphabet = FillerAlphabet::latin);

struct PlantOptions {
    std::size_t edits = 0;       // insertions + deletions applied to every variant
    bool vary_edits = false;     // when set, each variant draws its edit count from [0, edits]
    std::size_t gap = 0;         // filler between plants, raised to at least ceil(|p| / k)
    std::size_t lead = 0;        // filler before the first plant
    std::size_t trail = 0;       // filler after the last plant
    FillerAlphabet alphabet = FillerAlphabet::latin;
    std::string doc_id = "planted";
};

struct PlantedFixture {
    DocumentPtr doc;
    NearDuplicateGroup group;
};

/**
 * Builds a filler document with m variants of the pattern, each within
 * similarity k of it (checked with lcs_length after construction). Throws
 * GenerationError when the edit budget cannot stay within k.
 */
PlantedFixture plant_group(const PlantOptions& options, std::u32string_view pattern, double k, std::size_t m,
                           std::uint64_t seed);

// Largest per-variant edit count plant_group accepts: floor(|p| (1 - k) / k).
std::size_t max_plant_edits(std::size_t p_len, double k);

// {"label", "k", "members": [fragment], "archetype": [string] | null, "verification": "full" | "pairwise-verified"}
nlohmann::json group_to_json(const NearDuplicateGroup& group, Verification verification);

}  // namespace dupviper
