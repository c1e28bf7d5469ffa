#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <stop_token>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dupviper/corpus.hpp"
#include "dupviper/distance.hpp"

namespace dupviper {

// Per-optimization switches, all on by default.
struct Optimizations {
    bool skip_scan = true;     // 1: Boyer-Moore-like window skipping in the scan
    bool skip_shrink = true;   // 2: the same skipping inside the shrink
    bool cluster = true;       // 3: one representative per overlap cluster
    bool extend_words = true;  // 4: widen survivors to whole tokens
    bool reuse = true;         // 5: share prefix-LCS rows between candidates, shrink in parallel

    static Optimizations none() { return {false, false, false, false, false}; }
    friend bool operator==(const Optimizations&, const Optimizations&) = default;
};

struct Pattern {
    std::u32string text;
    std::optional<TextFragment> source;  // set when the pattern was cut out of the searched document

    static Pattern from_fragment(const TextFragment& g) { return Pattern{g.str(), g}; }
    static Pattern from_text(std::u32string text) { return Pattern{std::move(text), std::nullopt}; }
};

struct SearchParams {
    double k = 0.8;
    Pattern pattern;
    Optimizations optimizations;
    bool strict_threshold = false;
    bool exclude_self = false;
    std::size_t workers = 0;  // 0: hardware concurrency
    std::stop_token stop;
    std::optional<std::chrono::steady_clock::time_point> deadline;
    DistanceCache* cache = nullptr;  // optional, for final element distances
};

// Throws ParameterError unless 1/sqrt(3) < k <= 1.
void validate_k(double k);

// ceil(|p| / k)
std::size_t window_length(std::size_t pattern_length, double k);

// Shrink lengths [floor(k * |p|), ceil(|p| / k)].
std::pair<std::size_t, std::size_t> shrink_lengths(std::size_t pattern_length, double k);

// |p| * (1/k + 1) * (1 - k^2); with strict set, 2 * |p| * (1 - k^2) / k.
double scan_threshold(std::size_t pattern_length, double k, bool strict = false);

// Largest integer distance accepted by the scan.
std::size_t scan_threshold_floor(std::size_t pattern_length, double k, bool strict = false);

// Window advance after observing distance current_d: floor((d - k_di) / 2) when d > k_di + 1, else 1.
std::size_t phase1_skip(std::size_t current_d, std::size_t k_di);

struct ScoredFragment {
    TextFragment fragment;
    std::size_t distance = 0;
};

// Compare(w1, w2, p): closer to the pattern wins, then the longer one.
bool compare(const ScoredFragment& w1, const ScoredFragment& w2) noexcept;
bool compare(const TextFragment& w1, const TextFragment& w2, std::u32string_view pattern);

struct PhaseTimings {
    double phase1_ms = 0;
    double phase2_ms = 0;
    double phase3_ms = 0;
};

struct ResultSet {
    const Document* doc = nullptr;
    Pattern pattern;
    double k = 0;
    double k_di = 0;
    bool strict_threshold = false;
    Optimizations optimizations;
    std::vector<ScoredFragment> w1;
    std::vector<ScoredFragment> w2;
    std::vector<ScoredFragment> w3;
    PhaseTimings timings;
    bool pattern_too_long = false;
    std::size_t windows_scanned = 0;
};

/**
 * Pattern based near-duplicate search over one document.
 *
 * Phase 1 slides a window of ceil(|p|/k) symbols and keeps windows within the
 * scan threshold of the pattern. Phase 2 replaces every kept window by its
 * closest sub-fragment of admissible length. Phase 3 drops duplicates and
 * nested fragments, then applies the clustering and word extension options.
 */
class Searcher {
public:
    Searcher(const Document& doc, SearchParams params);

    const SearchParams& params() const noexcept { return params_; }
    std::size_t window_len() const noexcept { return window_len_; }
    std::size_t threshold() const noexcept { return threshold_; }

    std::vector<ScoredFragment> phase1_scan();
    std::vector<ScoredFragment> phase2_shrink(const std::vector<ScoredFragment>& w1);
    std::vector<ScoredFragment> phase3_filter(const std::vector<ScoredFragment>& w2);

    ResultSet run();

    std::size_t windows_scanned() const noexcept { return windows_scanned_; }

private:
    struct ProfileTable;

    ScoredFragment shrink_one(const ScoredFragment& w, const ProfileTable& table) const;
    void check_cancel(std::size_t step) const;

    const Document& doc_;
    SearchParams params_;
    PatternLcs matcher_;
    std::size_t window_len_ = 0;
    std::size_t threshold_ = 0;
    std::size_t min_len_ = 0;
    std::size_t max_len_ = 0;
    std::size_t windows_scanned_ = 0;
};

// Validates k and the pattern, then runs all three phases.
ResultSet search(const Document& doc, SearchParams params);

// {"pattern", "k", "k_di", "strict_threshold", "optimizations", "warning",
//  "elements": [{"b", "e", "text", "distance"}], "timings_ms": {"phase1", "phase2", "phase3"}}
nlohmann::json result_set_to_json(const ResultSet& result);

// Same document without "timings_ms"; identical for identical inputs.
nlohmann::json result_set_canonical_json(const ResultSet& result);

nlohmann::json optimizations_to_json(const Optimizations& opts);
Optimizations optimizations_from_json(const nlohmann::json& j, Optimizations base = {});

}  // namespace dupviper
