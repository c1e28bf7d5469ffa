#include "dupviper/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "dupviper/error.hpp"
#include "parallel.hpp"

namespace dupviper {

TextFragment auto_select_pattern(const Document& doc, const HeatMap& heat, std::size_t length) {
    if (length == 0) {
        throw ParameterError("pattern length must be positive");
    }
    if (length > doc.length()) {
        throw ParameterError("pattern length " + std::to_string(length) + " exceeds document length " +
                             std::to_string(doc.length()));
    }
    const auto& tokens = doc.tokens();
    if (heat.temperatures.size() != tokens.size()) {
        throw ContractViolation("heat map does not belong to document '" + doc.id() + "'");
    }
    // The touched tokens only change when a window border crosses a token border, so a
    // two-pointer sweep over window starts keeps [first, last) current in amortized O(1).
    std::size_t first = 0, last = 0;
    std::uint64_t sum = 0, best_sum = 0;
    std::size_t best_start = 0;
    for (std::size_t s = 0; s + length <= doc.length(); ++s) {
        const std::size_t end = s + length - 1;
        while (last < tokens.size() && tokens[last].fragment.b <= end) {
            sum += heat.temperatures[last++];
        }
        while (first < last && tokens[first].fragment.e < s) {
            sum -= heat.temperatures[first++];
        }
        if (sum > best_sum) {
            best_sum = sum;
            best_start = s;
        }
    }
    return doc.fragment(best_start, best_start + length - 1);
}

std::vector<std::size_t> SweepConfig::default_pattern_lengths() {
    std::vector<std::size_t> out;
    for (std::size_t l = 50; l <= 1000; l += 50) {
        out.push_back(l);
    }
    return out;
}

void SweepConfig::validate() const {
    if (pattern_lengths.empty() || k_values.empty()) {
        throw ParameterError("sweep needs at least one pattern length and one k");
    }
    for (std::size_t l : pattern_lengths) {
        if (l == 0) {
            throw ParameterError("pattern lengths must be positive");
        }
    }
    for (double k : k_values) {
        validate_k(k);
    }
    if (min_tokens == 0) {
        throw ParameterError("min_tokens must be positive");
    }
}

SweepConfig sweep_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ParameterError("sweep config must be a JSON object");
    }
    SweepConfig c;
    try {
        if (j.contains("pattern_lengths")) {
            c.pattern_lengths = j.at("pattern_lengths").get<std::vector<std::size_t>>();
        }
        if (j.contains("k_values")) {
            c.k_values = j.at("k_values").get<std::vector<double>>();
        }
        if (j.contains("corpus")) {
            c.corpus = j.at("corpus").get<std::vector<std::string>>();
        }
        if (j.contains("time_budget_ms") && !j.at("time_budget_ms").is_null()) {
            c.time_budget = std::chrono::milliseconds(j.at("time_budget_ms").get<std::int64_t>());
        }
        if (j.contains("min_tokens")) {
            c.min_tokens = j.at("min_tokens").get<std::size_t>();
        }
        if (j.contains("strict_threshold")) {
            c.strict_threshold = j.at("strict_threshold").get<bool>();
        }
        if (j.contains("workers")) {
            c.workers = j.at("workers").get<std::size_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("bad sweep config: ") + e.what());
    }
    if (j.contains("optimizations")) {
        c.optimizations = optimizations_from_json(j.at("optimizations"));
    }
    c.validate();
    return c;
}

std::size_t runtime_bucket(double elapsed_ms) {
    if (elapsed_ms < 5'000) {
        return 0;
    }
    if (elapsed_ms < 30'000) {
        return 1;
    }
    return elapsed_ms < 120'000 ? 2 : 3;
}

std::size_t output_bucket(std::size_t n) {
    if (n < 100) {
        return 0;
    }
    if (n < 200) {
        return 1;
    }
    if (n < 600) {
        return 2;
    }
    return n < 1000 ? 3 : 4;
}

std::size_t SweepReport::timeouts() const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const SweepRecord& r) { return r.timed_out; }));
}

SweepReport run_sweep(const SweepConfig& config) {
    config.validate();
    std::vector<DocumentPtr> docs;
    for (const auto& path : config.corpus) {
        docs.push_back(load_document_file(path));
    }
    return run_sweep(docs, config);
}

SweepReport run_sweep(const std::vector<DocumentPtr>& docs, const SweepConfig& config) {
    config.validate();
    SweepReport report;

    struct Job {
        const Document* doc;
        TextFragment pattern;
        double k;
    };
    std::vector<Job> jobs;
    for (const auto& doc : docs) {
        const HeatMap heat = build_heatmap(*doc, config.min_tokens);
        for (std::size_t length : config.pattern_lengths) {
            if (length > doc->length()) {
                report.skipped += config.k_values.size();
                continue;
            }
            const TextFragment pattern = auto_select_pattern(*doc, heat, length);
            for (double k : config.k_values) {
                jobs.push_back({doc.get(), pattern, k});
            }
        }
    }

    report.records.resize(jobs.size());
    const std::size_t workers = detail::resolve_workers(config.workers);
    detail::parallel_for(jobs.size(), workers, [&](std::size_t i) {
        const Job& job = jobs[i];
        SweepRecord& rec = report.records[i];
        rec.doc = job.doc->id();
        rec.doc_length = job.doc->length();
        rec.pattern_length = job.pattern.length();
        rec.k = job.k;
        rec.pattern_b = job.pattern.b;
        rec.pattern_e = job.pattern.e;

        SearchParams params;
        params.k = job.k;
        params.pattern = Pattern::from_fragment(job.pattern);
        params.optimizations = config.optimizations;
        params.strict_threshold = config.strict_threshold;
        params.workers = workers > 1 ? 1 : 0;
        const auto start = std::chrono::steady_clock::now();
        if (config.time_budget) {
            params.deadline = start + *config.time_budget;
        }
        try {
            const ResultSet r = search(*job.doc, params);
            rec.result_count = r.w3.size();
            rec.timings = r.timings;
        } catch (const SearchCancelled&) {
            rec.timed_out = true;
        }
        rec.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    });

    for (const auto& rec : report.records) {
        ++report.runtime_histogram[runtime_bucket(rec.elapsed_ms)];
        if (!rec.timed_out) {
            ++report.output_histogram[output_bucket(rec.result_count)];
        }
    }
    return report;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

double percent(std::size_t part, std::size_t whole) {
    return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

std::string sweep_report_csv(const SweepReport& report) {
    std::ostringstream out;
    out << "doc,doc_length,pattern_length,k,pattern_b,pattern_e,elapsed_ms,results,phase1_ms,phase2_ms,phase3_ms,status\n";
    out << std::fixed;
    for (const auto& r : report.records) {
        out << csv_field(r.doc) << ',' << r.doc_length << ',' << r.pattern_length << ',' << std::setprecision(2) << r.k
            << ',' << r.pattern_b << ',' << r.pattern_e << ',' << std::setprecision(3) << r.elapsed_ms << ','
            << r.result_count << ',' << r.timings.phase1_ms << ',' << r.timings.phase2_ms << ',' << r.timings.phase3_ms
            << ',' << (r.timed_out ? "timeout" : "ok") << '\n';
    }
    return out.str();
}

nlohmann::json sweep_report_summary(const SweepReport& report) {
    nlohmann::json runtime = nlohmann::json::object(), output = nlohmann::json::object();
    const std::size_t completed = report.records.size() - report.timeouts();
    for (std::size_t i = 0; i < kRuntimeBuckets.size(); ++i) {
        runtime[kRuntimeBuckets[i]] = {{"count", report.runtime_histogram[i]},
                                       {"percent", percent(report.runtime_histogram[i], report.records.size())}};
    }
    for (std::size_t i = 0; i < kOutputBuckets.size(); ++i) {
        output[kOutputBuckets[i]] = {{"count", report.output_histogram[i]},
                                     {"percent", percent(report.output_histogram[i], completed)}};
    }
    return {{"runs", report.records.size()},
            {"skipped", report.skipped},
            {"timeouts", report.timeouts()},
            {"runtime_buckets", std::move(runtime)},
            {"output_buckets", std::move(output)}};
}

std::string sweep_report_table(const SweepReport& report) {
    std::ostringstream out;
    out << "runs: " << report.records.size() << "  skipped: " << report.skipped << "  timeouts: " << report.timeouts()
        << "\n\n";
    out << std::fixed << std::setprecision(1);
    const std::size_t completed = report.records.size() - report.timeouts();
    out << "run time      runs      %\n";
    for (std::size_t i = 0; i < kRuntimeBuckets.size(); ++i) {
        out << std::left << std::setw(10) << kRuntimeBuckets[i] << std::right << std::setw(8)
            << report.runtime_histogram[i] << std::setw(7) << percent(report.runtime_histogram[i], report.records.size())
            << '\n';
    }
    out << "\n|R|           runs      %\n";
    for (std::size_t i = 0; i < kOutputBuckets.size(); ++i) {
        out << std::left << std::setw(10) << kOutputBuckets[i] << std::right << std::setw(8)
            << report.output_histogram[i] << std::setw(7) << percent(report.output_histogram[i], completed) << '\n';
    }
    return out.str();
}

std::vector<SynthDocument> synth_corpus(const SynthSpec& spec) {
    validate_k(spec.k);
    if (spec.min_pattern == 0 || spec.min_pattern > spec.max_pattern || spec.min_members == 0 ||
        spec.min_members > spec.max_members || spec.min_size > spec.max_size || spec.groups_per_100k < 0) {
        throw ParameterError("inconsistent synthetic corpus spec");
    }
    std::mt19937_64 rng(spec.seed);
    const std::size_t count = spec.sizes.empty() ? spec.documents : spec.sizes.size();
    // Plants stay further apart than any scan window so that their results never merge.
    const std::size_t min_gap = window_length(spec.max_pattern, spec.k) + 1;

    std::vector<SynthDocument> corpus;
    for (std::size_t d = 0; d < count; ++d) {
        std::size_t size;
        if (!spec.sizes.empty()) {
            size = spec.sizes[d];
        } else {
            std::uniform_real_distribution<double> log_size(std::log(static_cast<double>(std::max<std::size_t>(spec.min_size, 1))),
                                                            std::log(static_cast<double>(std::max<std::size_t>(spec.max_size, 1))));
            size = static_cast<std::size_t>(std::exp(log_size(rng)));
        }

        std::size_t n_groups =
            static_cast<std::size_t>(std::llround(spec.groups_per_100k * static_cast<double>(size) / 100'000.0));
        std::vector<PlantedGroup> groups;
        // (group, variant text) in document order after shuffling.
        std::vector<std::pair<std::size_t, std::u32string>> plants;
        std::size_t planted_len = 0;
        for (std::size_t g = 0; g < n_groups; ++g) {
            const std::size_t len = std::uniform_int_distribution<std::size_t>(spec.min_pattern, spec.max_pattern)(rng);
            const std::size_t members = std::uniform_int_distribution<std::size_t>(spec.min_members, spec.max_members)(rng);
            std::u32string pattern = filler_text(len + 1, spec.alphabet, rng());
            pattern.pop_back();
            const std::size_t budget = max_plant_edits(pattern.size(), spec.k);
            std::vector<std::pair<std::size_t, std::u32string>> variants;
            std::size_t need = 0;
            for (std::size_t m = 0; m < members; ++m) {
                const std::size_t edits = std::uniform_int_distribution<std::size_t>(0, budget)(rng);
                variants.emplace_back(groups.size(), plant_variant(pattern, spec.k, edits, rng(), spec.alphabet));
                need += variants.back().second.size() + min_gap;
            }
            if (planted_len + need + (plants.size() + variants.size() + 1) * min_gap > size) {
                break;  // the document is too small for further groups
            }
            planted_len += need - members * min_gap;
            PlantedGroup pg;
            pg.pattern = std::move(pattern);
            pg.group.k = spec.k;
            pg.group.label = "g" + std::to_string(groups.size());
            groups.push_back(std::move(pg));
            for (auto& v : variants) {
                plants.push_back(std::move(v));
            }
        }
        std::shuffle(plants.begin(), plants.end(), rng);

        // Filler gaps: min_gap each plus a random share of the remaining space.
        const std::size_t slots = plants.size() + 1;
        const std::size_t fixed = plants.empty() ? 0 : (slots)*min_gap;
        const std::size_t spare = size > planted_len + fixed ? size - planted_len - fixed : 0;
        std::vector<std::size_t> cuts{0, spare};
        for (std::size_t i = 0; i + 1 < slots; ++i) {
            cuts.push_back(std::uniform_int_distribution<std::size_t>(0, spare)(rng));
        }
        std::sort(cuts.begin(), cuts.end());

        std::u32string text;
        text.reserve(size + 16);
        std::vector<std::vector<std::pair<std::size_t, std::size_t>>> spans(groups.size());
        for (std::size_t i = 0; i < slots; ++i) {
            const std::size_t gap = cuts[i + 1] - cuts[i] + (plants.empty() ? 0 : min_gap);
            text += filler_text(gap, spec.alphabet, rng());
            if (i < plants.size()) {
                spans[plants[i].first].emplace_back(text.size(), text.size() + plants[i].second.size() - 1);
                text += plants[i].second;
            }
        }

        SynthDocument sd;
        sd.doc = std::make_shared<const Document>("synth" + std::to_string(d) + ".txt", std::move(text));
        for (std::size_t g = 0; g < groups.size(); ++g) {
            for (const auto& [b, e] : spans[g]) {
                groups[g].group.members.push_back(sd.doc->fragment(b, e));
            }
        }
        sd.groups = std::move(groups);
        corpus.push_back(std::move(sd));
    }
    return corpus;
}

nlohmann::json ground_truth_to_json(const SynthDocument& sd) {
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& pg : sd.groups) {
        auto j = group_to_json(pg.group, Verification::full);
        j.erase("verification");
        j["pattern"] = encode_utf8(pg.pattern);
        groups.push_back(std::move(j));
    }
    return {{"doc", sd.doc->id()}, {"length", sd.doc->length()}, {"groups", std::move(groups)}};
}

std::vector<std::string> write_synth_corpus(const std::vector<SynthDocument>& corpus, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> paths;
    for (const auto& sd : corpus) {
        const fs::path text_path = fs::path(dir) / sd.doc->id();
        const fs::path truth_path = fs::path(dir) / (text_path.stem().string() + ".truth.json");
        std::ofstream(text_path, std::ios::binary) << encode_utf8(sd.doc->text());
        std::ofstream(truth_path, std::ios::binary) << ground_truth_to_json(sd).dump(2) << '\n';
        if (!fs::exists(text_path) || !fs::exists(truth_path)) {
            throw Error("cannot write synthetic corpus to " + dir);
        }
        paths.push_back(text_path.string());
    }
    return paths;
}

}  // namespace dupviper
