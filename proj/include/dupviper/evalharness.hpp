#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dupviper/clonemap.hpp"
#include "dupviper/corpus.hpp"
#include "dupviper/groups.hpp"
#include "dupviper/search.hpp"

namespace dupviper {

/**
 * The window of the given length with the largest sum of temperatures over
 * the tokens it touches. A token cut by the window border counts in full.
 * Ties go to the leftmost window.
 */
TextFragment auto_select_pattern(const Document& doc, const HeatMap& heat, std::size_t length);

struct SweepConfig {
    std::vector<std::size_t> pattern_lengths = default_pattern_lengths();
    std::vector<double> k_values{0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<std::string> corpus;
    std::optional<std::chrono::milliseconds> time_budget;  // per search
    std::size_t min_tokens = kDefaultMinTokens;
    Optimizations optimizations;
    bool strict_threshold = false;
    std::size_t workers = 1;  // concurrent runs; 1 keeps timings isolated

    static std::vector<std::size_t> default_pattern_lengths();

    // Throws ParameterError on empty or zero lengths and on k outside (1/sqrt(3), 1].
    void validate() const;
};

// Reads {"pattern_lengths", "k_values", "corpus", "time_budget_ms", "min_tokens",
// "optimizations", "strict_threshold", "workers"}; absent keys keep their defaults.
SweepConfig sweep_config_from_json(const nlohmann::json& j);

struct SweepRecord {
    std::string doc;
    std::size_t doc_length = 0;
    std::size_t pattern_length = 0;
    double k = 0;
    std::size_t pattern_b = 0;
    std::size_t pattern_e = 0;
    double elapsed_ms = 0;
    std::size_t result_count = 0;
    PhaseTimings timings;
    bool timed_out = false;
};

inline constexpr std::array<const char*, 4> kRuntimeBuckets{"<5s", "<30s", "<2min", ">=2min"};
inline constexpr std::array<const char*, 5> kOutputBuckets{"<100", "100-200", "200-600", "600-1000", ">=1000"};

std::size_t runtime_bucket(double elapsed_ms);
std::size_t output_bucket(std::size_t result_count);

struct SweepReport {
    std::vector<SweepRecord> records;
    std::size_t skipped = 0;  // pattern longer than the document
    std::array<std::size_t, kRuntimeBuckets.size()> runtime_histogram{};
    std::array<std::size_t, kOutputBuckets.size()> output_histogram{};  // completed runs only

    std::size_t timeouts() const;
};

// Loads config.corpus from disk and sweeps it.
SweepReport run_sweep(const SweepConfig& config);

// Sweeps already loaded documents; config.corpus is ignored.
SweepReport run_sweep(const std::vector<DocumentPtr>& docs, const SweepConfig& config);

std::string sweep_report_csv(const SweepReport& report);
nlohmann::json sweep_report_summary(const SweepReport& report);
std::string sweep_report_table(const SweepReport& report);

struct SynthSpec {
    std::size_t documents = 3;
    std::size_t min_size = 40'000;     // symbols; the filler is ASCII-heavy, so roughly bytes
    std::size_t max_size = 2'500'000;
    std::vector<std::size_t> sizes;    // explicit sizes override the random draw
    double groups_per_100k = 2.0;      // planted-group density
    std::size_t min_members = 2;
    std::size_t max_members = 6;
    std::size_t min_pattern = 100;
    std::size_t max_pattern = 400;
    double k = 0.8;
    FillerAlphabet alphabet = FillerAlphabet::latin;
    std::uint64_t seed = 1;
};

struct PlantedGroup {
    std::u32string pattern;
    NearDuplicateGroup group;
};

struct SynthDocument {
    DocumentPtr doc;
    std::vector<PlantedGroup> groups;
};

// Filler documents with planted near-duplicate groups; deterministic for a spec.
std::vector<SynthDocument> synth_corpus(const SynthSpec& spec);

// {"doc", "length", "groups": [{"pattern", "label", "k", "members", "archetype", "verification"}]}
nlohmann::json ground_truth_to_json(const SynthDocument& doc);

// Writes <id> (the text, ids end in .txt) and <stem>.truth.json per document into dir;
// returns the text file paths.
std::vector<std::string> write_synth_corpus(const std::vector<SynthDocument>& corpus, const std::string& dir);

}  // namespace dupviper
