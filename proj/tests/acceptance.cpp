// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dupviper/clonemap.hpp"
#include "dupviper/corpus.hpp"
#include "dupviper/distance.hpp"
#include "dupviper/evalharness.hpp"
#include "dupviper/groups.hpp"
#include "dupviper/schema.hpp"
#include "dupviper/search.hpp"
#include "oracles.hpp"

using namespace dupviper;
using nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x, int digits = 2) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(digits);
    out << x;
    return out.str();
}

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<TextFragment> fragments(const std::vector<ScoredFragment>& w) {
    std::vector<TextFragment> out;
    for (const auto& s : w) {
        out.push_back(s.fragment);
    }
    return out;
}

FillerAlphabet alphabet_for(std::size_t i) {
    constexpr FillerAlphabet all[] = {FillerAlphabet::latin, FillerAlphabet::cyrillic, FillerAlphabet::mixed};
    return all[i % 3];
}

// ---- planted-group fixtures shared by the completeness criteria ----------

struct Fixture {
    PlantedFixture planted;
    std::u32string pattern;
    double k = 0;
    Optimizations optimizations;  // the 1/2/4/5 combination this fixture exercises; cluster off
};

constexpr std::size_t kFixtures = 240;

std::vector<Fixture> make_fixtures() {
    const double ks[] = {0.7, 0.8, 0.9, 1.0};
    std::mt19937_64 rng(20240611);
    std::vector<Fixture> out;
    for (std::size_t i = 0; i < kFixtures; ++i) {
        Fixture f;
        f.k = ks[i % 4];
        const std::size_t p = std::uniform_int_distribution<std::size_t>(50, 400)(rng);
        const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
        f.pattern = filler_text(p, alphabet_for(i / 4), rng());
        PlantOptions options;
        options.edits = max_plant_edits(p, f.k);
        options.vary_edits = true;
        options.gap = std::uniform_int_distribution<std::size_t>(0, 3 * p)(rng);
        options.lead = std::uniform_int_distribution<std::size_t>(0, 2000)(rng);
        options.trail = std::uniform_int_distribution<std::size_t>(0, 2000)(rng);
        options.alphabet = f.pattern.size() % 2 ? alphabet_for(i / 4) : FillerAlphabet::latin;
        options.doc_id = "fixture" + std::to_string(i);
        f.planted = plant_group(options, f.pattern, f.k, m, rng());
        const unsigned bits = static_cast<unsigned>(i % 16);
        f.optimizations.skip_scan = bits & 1u;
        f.optimizations.skip_shrink = bits & 2u;
        f.optimizations.extend_words = bits & 4u;
        f.optimizations.reuse = bits & 8u;
        f.optimizations.cluster = false;
        out.push_back(std::move(f));
    }
    return out;
}

struct Tally {
    std::size_t members = 0;
    std::size_t satisfied = 0;
    double rate() const { return members ? static_cast<double>(satisfied) / static_cast<double>(members) : 1.0; }
    void add(const CompletenessReport& r) {
        members += r.satisfied.size();
        satisfied += r.satisfied.size() - r.violations;
    }
};

struct FixtureRun {
    Tally clustered;    // Optimization 3 on
    Tally unclustered;  // Optimization 3 off
    double seconds = 0;
};

// Phases 1 and 2 do not depend on clustering, so both phase-3 variants share them.
FixtureRun run_fixtures(const std::vector<Fixture>& fixtures, bool strict) {
    const auto t0 = Clock::now();
    FixtureRun out;
    for (const auto& f : fixtures) {
        SearchParams params;
        params.k = f.k;
        params.pattern = Pattern::from_text(f.pattern);
        params.optimizations = f.optimizations;
        params.strict_threshold = strict;
        params.workers = 1;
        Searcher unclustered(*f.planted.doc, params);
        const auto w2 = unclustered.phase2_shrink(unclustered.phase1_scan());
        out.unclustered.add(check_completeness(f.planted.group, fragments(unclustered.phase3_filter(w2)), f.pattern.size()));
        params.optimizations.cluster = true;
        Searcher clustered(*f.planted.doc, params);
        out.clustered.add(check_completeness(f.planted.group, fragments(clustered.phase3_filter(w2)), f.pattern.size()));
    }
    out.seconds = ms_since(t0) / 1000;
    return out;
}

// ---- criteria -------------------------------------------------------------

Outcome criterion1(const std::vector<Fixture>& fixtures, const FixtureRun& strict, const FixtureRun& loose) {
    std::size_t largest = 0;
    for (const auto& f : fixtures) {
        largest = std::max(largest, f.planted.doc->length());
    }
    const Tally& s = strict.unclustered;
    const Tally& d = loose.unclustered;
    const bool pass = s.satisfied == s.members && fixtures.size() >= 200 && largest <= 500'000;
    return {pass, std::to_string(fixtures.size()) + " fixtures, " + std::to_string(s.members) +
                      " members; strict threshold " + std::to_string(s.satisfied) + "/" + std::to_string(s.members) +
                      " (" + fmt(100 * s.rate()) + "%); default threshold " + std::to_string(d.satisfied) + "/" +
                      std::to_string(d.members) + " (" + fmt(100 * d.rate()) + "%, reported only); largest doc " +
                      std::to_string(largest) + " symbols; " + fmt(strict.seconds + loose.seconds, 1) + " s"};
}

Outcome criterion2(const FixtureRun& strict, const FixtureRun& loose) {
    const Tally& s = strict.clustered;
    const double violations = 1.0 - s.rate();
    return {violations < 0.05, "clustering on, strict threshold: " + std::to_string(s.members - s.satisfied) +
                                   " violations of " + std::to_string(s.members) + " members (" + fmt(100 * violations) +
                                   "%, bound 5%); default threshold: " + fmt(100 * (1.0 - loose.clustered.rate())) + "%"};
}

Outcome criterion3() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(3);
    const std::vector<std::u32string> alphabets{U"ab", U"abcdefgh ", U"абвгдежз ", U"aбcдeфg h,.", U"xyzабв"};
    std::size_t symmetric = 0, identity = 0, triangle = 0, oracle_mismatch = 0;
    constexpr std::size_t kTriples = 10'000;
    for (std::size_t i = 0; i < kTriples; ++i) {
        const auto& alphabet = alphabets[i % alphabets.size()];
        auto x = oracle::random_string(rng, 300, alphabet);
        std::u32string y, z;
        if (i % 2) {
            // Related strings make the triangle inequality tight more often.
            y = x;
            z = x;
            for (int e = 0; e < 20 && !y.empty(); ++e) {
                y.erase(rng() % y.size(), 1);
                y.insert(y.begin() + static_cast<std::ptrdiff_t>(rng() % (y.size() + 1)), alphabet[rng() % alphabet.size()]);
            }
            for (int e = 0; e < 20 && !z.empty(); ++e) {
                z[rng() % z.size()] = alphabet[rng() % alphabet.size()];
            }
            if (y.size() > 300) {
                y.resize(300);
            }
        } else {
            y = oracle::random_string(rng, 300, alphabet);
            z = oracle::random_string(rng, 300, alphabet);
        }
        const auto xy = lcs_distance(x, y), yx = lcs_distance(y, x);
        const auto yz = lcs_distance(y, z), xz = lcs_distance(x, z);
        symmetric += xy == yx && yz == lcs_distance(z, y) && xz == lcs_distance(z, x);
        identity += lcs_distance(x, x) == 0 && (xy == 0) == (x == y) && (xz == 0) == (x == z);
        triangle += xz <= xy + yz && xy <= xz + yz && yz <= xy + xz;
        if (i % 50 == 0) {
            oracle_mismatch += xy != oracle::indel_distance(x, y);
        }
    }
    const double seconds = ms_since(t0) / 1000;
    const bool pass = symmetric == kTriples && identity == kTriples && triangle == kTriples && oracle_mismatch == 0 &&
                      seconds < 120;
    return {pass, std::to_string(kTriples) + " triples: symmetry " + std::to_string(symmetric) + ", identity " +
                      std::to_string(identity) + ", triangle " + std::to_string(triangle) + ", oracle mismatches " +
                      std::to_string(oracle_mismatch) + "; " + fmt(seconds, 1) + " s"};
}

Outcome criterion4() {
    std::mt19937_64 rng(4);
    std::size_t shift_ok = 0;
    constexpr std::size_t kShiftCases = 1000;
    for (std::size_t i = 0; i < kShiftCases; ++i) {
        const std::u32string alphabet = i % 3 ? U"abcd " : U"абвгдеёжз ";
        const auto p = oracle::random_string(rng, 120, alphabet, 5);
        const std::size_t len = std::uniform_int_distribution<std::size_t>(1, 150)(rng);
        const std::size_t delta = std::uniform_int_distribution<std::size_t>(0, 20)(rng);
        const auto text = oracle::random_string(rng, len + delta, alphabet, len + delta);
        // w = ab, w' = bc with |a| = |c| = delta
        const std::u32string_view v(text);
        const auto w = v.substr(0, len), w2 = v.substr(delta, len);
        const auto d1 = static_cast<long long>(lcs_distance(w, p)), d2 = static_cast<long long>(lcs_distance(w2, p));
        const auto o1 = static_cast<long long>(oracle::indel_distance(w, p));
        shift_ok += std::llabs(d1 - d2) <= 2 * static_cast<long long>(delta) && d1 == o1;
    }

    std::size_t scans = 0, equal = 0, nonempty = 0;
    for (std::size_t i = 0; i < 40; ++i) {
        const std::u32string alphabet = i % 2 ? U"abcdef " : U"abcdefghijklmnop ";
        const auto p = oracle::random_string(rng, 60, alphabet, 15);
        auto text = oracle::random_string(rng, 4800, alphabet, 1000);
        for (int copies = 0; copies < 3; ++copies) {
            auto copy = p;
            copy.erase(rng() % copy.size(), 1);
            text.insert(rng() % text.size(), copy);
        }
        text.resize(std::min<std::size_t>(text.size(), 5000));
        const auto doc = load_document(encode_utf8(text), "scan");
        const double k = std::vector<double>{0.7, 0.8, 0.9, 1.0}[i % 4];
        for (bool strict : {false, true}) {
            SearchParams params;
            params.k = k;
            params.pattern = Pattern::from_text(p);
            params.strict_threshold = strict;
            params.workers = 1;
            const auto w1 = Searcher(*doc, params).phase1_scan();
            const auto expected = oracle::exhaustive_scan(text, p, window_length(p.size(), k),
                                                          scan_threshold_floor(p.size(), k, strict));
            std::vector<oracle::Window> got;
            for (const auto& s : w1) {
                got.push_back({s.fragment.b, s.fragment.e, s.distance});
            }
            ++scans;
            equal += got == expected;
            nonempty += !expected.empty();
        }
    }
    return {shift_ok == kShiftCases && equal == scans,
            "shift bound held in " + std::to_string(shift_ok) + "/" + std::to_string(kShiftCases) +
                " cases; skipping scan equals exhaustive scan in " + std::to_string(equal) + "/" + std::to_string(scans) +
                " documents of at most 5000 symbols (" + std::to_string(nonempty) + " with qualifying windows)"};
}

Outcome criterion5() {
    std::mt19937_64 rng(5);
    std::size_t fixtures = 0, identical = 0, elements = 0;
    for (std::size_t i = 0; i < 100; ++i) {
        const double k = std::vector<double>{0.7, 0.8, 0.9, 1.0}[i % 4];
        const std::size_t p = std::uniform_int_distribution<std::size_t>(20, 150)(rng);
        const auto pattern = filler_text(p, alphabet_for(i), rng());
        PlantOptions options;
        options.edits = max_plant_edits(p, k);
        options.vary_edits = true;
        options.lead = std::uniform_int_distribution<std::size_t>(0, 300)(rng);
        options.trail = 100;
        options.alphabet = alphabet_for(i);
        const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
        auto fixture = plant_group(options, pattern, k, m, rng());
        if (fixture.doc->length() > 2000) {
            // Keep the document within the bound by dropping the tail.
            fixture.doc = load_document(encode_utf8(fixture.doc->text().substr(0, 2000)), "shrink");
        }
        SearchParams params;
        params.k = k;
        params.pattern = Pattern::from_text(pattern);
        params.workers = 1;
        params.strict_threshold = i % 2;
        params.optimizations.reuse = i % 3 != 0;
        Searcher with_skip(*fixture.doc, params);
        const auto w1 = with_skip.phase1_scan();
        params.optimizations.skip_shrink = false;
        Searcher without_skip(*fixture.doc, params);
        const auto a = with_skip.phase2_shrink(w1);
        const auto b = without_skip.phase2_shrink(w1);
        bool same = a.size() == b.size() && a.size() == w1.size();
        for (std::size_t j = 0; same && j < a.size(); ++j) {
            same = a[j].distance == b[j].distance && a[j].fragment.length() == b[j].fragment.length();
        }
        ++fixtures;
        identical += same;
        elements += w1.size();
    }
    return {identical == fixtures, std::to_string(identical) + "/" + std::to_string(fixtures) +
                                       " fixtures identical in (distance, length) over " + std::to_string(elements) +
                                       " W1 elements"};
}

Outcome criterion6() {
    std::mt19937_64 rng(6);
    std::size_t cases = 0, agree = 0, filtered = 0;
    for (std::size_t i = 0; i < 500; ++i) {
        const std::size_t sigma = std::uniform_int_distribution<std::size_t>(2, 20)(rng);
        std::vector<std::size_t> seq(std::uniform_int_distribution<std::size_t>(0, 200)(rng));
        std::string text;
        for (auto& x : seq) {
            x = std::uniform_int_distribution<std::size_t>(0, sigma - 1)(rng);
            text += "w" + std::to_string(x) + (rng() % 4 ? " " : ", ");
        }
        const auto doc = load_document(text, "tokens");
        std::set<std::pair<std::vector<std::size_t>, std::size_t>> got;
        bool short_group = false;
        for (const auto& g : find_exact_groups(*doc, 5)) {
            got.emplace(g.token_starts, g.token_length);
            short_group |= g.token_length < 5;
        }
        std::set<std::pair<std::vector<std::size_t>, std::size_t>> expected;
        for (const auto& r : oracle::maximal_repeats(seq, 5)) {
            expected.emplace(r.starts, r.content.size());
        }
        // Repeats of at most four tokens exist but must not surface.
        for (const auto& r : oracle::maximal_repeats(seq, 1)) {
            filtered += r.content.size() < 5;
        }
        ++cases;
        agree += got == expected && !short_group;
    }
    return {agree == cases, std::to_string(agree) + "/" + std::to_string(cases) +
                                " sequences match brute-force maximal repeats at min_tokens = 5 (" +
                                std::to_string(filtered) + " repeats of four tokens or fewer filtered)"};
}

Outcome criterion7() {
    std::vector<std::string> failures;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) {
            failures.push_back(what);
        }
    };
    expect(std::abs(scan_threshold(100, 0.8) - 81.0) < 1e-9, "k_di(100, 0.8) = " + fmt(scan_threshold(100, 0.8), 6));
    expect(std::abs(o_min(100, 1.0 / std::sqrt(3.0))) < 1e-9, "O_min at 1/sqrt(3)");
    for (double k : {0.77, 0.8, 0.9, 1.0}) {
        expect(o_min(100, k) > 50.0, "O_min(" + fmt(k) + ") = " + fmt(o_min(100, k)));
    }
    expect(heat_color(0, 8) == Rgb{1, 1, 1}, "color at 0");
    expect(heat_color(4, 8) == Rgb{1, 0.5, 0.5}, "color at T_m/2");
    expect(heat_color(8, 8) == Rgb{1, 0, 0}, "color at T_m");
    std::string detail = "k_di(100, 0.8) = " + fmt(scan_threshold(100, 0.8), 6) + ", O_min(1/sqrt(3)) = " +
                         fmt(o_min(100, 1.0 / std::sqrt(3.0)), 6) + ", O_min(0.77)/|p| = " + fmt(o_min(100, 0.77) / 100, 4) +
                         ", colors white/pink/red";
    for (const auto& f : failures) {
        detail += "; wrong: " + f;
    }
    return {failures.empty(), detail};
}

double timed_search(const Document& doc, const std::u32string& pattern, double k) {
    SearchParams params;
    params.k = k;
    params.pattern = Pattern::from_text(pattern);
    params.workers = 1;
    double best = 1e300;
    for (int run = 0; run < 3; ++run) {
        const auto t0 = Clock::now();
        search(doc, params);
        best = std::min(best, ms_since(t0));
    }
    return best;
}

Outcome criterion8() {
    SynthSpec spec;
    spec.sizes = {750'000, 750'000};
    spec.seed = 8;
    const auto corpus = synth_corpus(spec);
    const auto& small = corpus[0].doc;
    const auto doubled = load_document(encode_utf8(small->text() + corpus[1].doc->text()), "doubled");
    const auto pattern = auto_select_pattern(*small, build_heatmap(*small), 500).str();

    const double t_small = timed_search(*small, pattern, 0.8);
    const double t_double = timed_search(*doubled, pattern, 0.8);
    const double t_exact = timed_search(*small, pattern, 1.0);
    const double t_loose = timed_search(*small, pattern, 0.7);
    const double ratio = t_double / t_small;
    const bool pass = t_small < 120'000 && ratio <= 2.5 && t_exact <= t_loose;
    return {pass, "0.75 MB, |p| = 500, k = 0.8: " + fmt(t_small, 0) + " ms; 1.5 MB: " + fmt(t_double, 0) +
                      " ms (ratio " + fmt(ratio) + ", bound 2.5); k = 1.0: " + fmt(t_exact, 0) + " ms vs k = 0.7: " +
                      fmt(t_loose, 0) + " ms (best of 3, one worker)"};
}

int run_cli(const std::string& args, const std::string& stdout_path = "/dev/null") {
    const std::string cmd = std::string("\"") + DUPVIPER_CLI_PATH + "\" " + args + " > \"" + stdout_path + "\" 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    return json::parse(in);
}

Outcome criterion9() {
    const auto dir = fs::temp_directory_path() / ("dupviper_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    const double k = 0.9;
    const std::size_t p_len = 300;
    const auto pattern = filler_text(p_len, FillerAlphabet::mixed, 91);
    PlantOptions options;
    options.edits = 4;
    options.vary_edits = true;
    options.gap = 3000;
    options.lead = 5000;
    options.trail = 5000;
    options.alphabet = FillerAlphabet::mixed;
    options.doc_id = "fixture.txt";
    const auto fixture = plant_group(options, pattern, 0.95, 5, 92);
    const auto doc_path = dir / "fixture.txt";
    std::ofstream(doc_path, std::ios::binary) << encode_utf8(fixture.doc->text());

    std::vector<std::string> problems;
    auto note = [&](const std::string& what, const std::vector<std::string>& errors) {
        for (const auto& e : errors) {
            problems.push_back(what + " " + e);
        }
    };
    if (run_cli("heatmap \"" + doc_path.string() + "\" --out \"" + (dir / "heat.json").string() + "\"") != 0) {
        return {false, "heatmap command failed"};
    }
    note("heatmap", schema::check_heatmap(read_json(dir / "heat.json")));

    if (run_cli("select-pattern \"" + doc_path.string() + "\" --length " + std::to_string(p_len) + " --format json",
                (dir / "pattern.json").string()) != 0) {
        return {false, "select-pattern command failed"};
    }
    const auto selected = read_json(dir / "pattern.json");
    note("select-pattern", schema::check_fragment(selected));
    const std::size_t b = selected["b"], e = selected["e"];
    const auto chosen = fixture.doc->fragment(b, e);

    // The planted group must be a group of the chosen pattern for completeness to apply.
    std::size_t related = 0;
    for (const auto& m : fixture.group.members) {
        related += is_near_duplicate(chosen.view(), m.view(), k);
    }

    if (run_cli("search \"" + doc_path.string() + "\" --k 0.9 --strict-threshold --no-opt3 --pattern-interval " +
                std::to_string(b) + ":" + std::to_string(e) + " --out \"" + (dir / "result.json").string() + "\"") != 0) {
        return {false, "search command failed"};
    }
    const auto result = read_json(dir / "result.json");
    note("search", schema::check_result_set(result));
    std::vector<TextFragment> found;
    for (const auto& el : result["elements"]) {
        found.push_back(fixture.doc->fragment(el["b"].get<std::size_t>(), el["e"].get<std::size_t>()));
    }
    const auto report = check_completeness(fixture.group.members, found, p_len, k);
    fs::remove_all(dir);

    const bool pass = problems.empty() && related == fixture.group.members.size() && report.ok();
    std::string detail = "selected " + std::to_string(b) + ":" + std::to_string(e) + ", " + std::to_string(related) + "/" +
                         std::to_string(fixture.group.members.size()) + " planted members within k of it, " +
                         std::to_string(found.size()) + " results, completeness " +
                         std::to_string(report.satisfied.size() - report.violations) + "/" +
                         std::to_string(report.satisfied.size()) + ", schema problems " + std::to_string(problems.size());
    for (const auto& p : problems) {
        detail += "; " + p;
    }
    return {pass, detail};
}

}  // namespace

// Runs every criterion, or only those given as arguments.
int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        only.insert(std::atoi(argv[i]));
    }
    auto wanted = [&](int n) { return only.empty() || only.count(n) > 0; };
    bool all = true;
    auto report = [&](int n, const std::string& name, const std::function<Outcome()>& run) {
        if (!wanted(n)) {
            return;
        }
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all &= o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << n << " (" << name << "): " << o.detail << std::endl;
    };

    std::vector<Fixture> fixtures;
    FixtureRun strict, loose;
    if (wanted(1) || wanted(2)) {
        fixtures = make_fixtures();
        strict = run_fixtures(fixtures, true);
        loose = run_fixtures(fixtures, false);
    }
    report(1, "completeness", [&] { return criterion1(fixtures, strict, loose); });
    report(2, "clustering violations", [&] { return criterion2(strict, loose); });
    report(3, "metric laws", criterion3);
    report(4, "skip safety", criterion4);
    report(5, "shrink equivalence", criterion5);
    report(6, "exact-clone oracle", criterion6);
    report(7, "formula spot values", criterion7);
    report(8, "performance envelope", criterion8);
    report(9, "end-to-end CLI", criterion9);
    return all ? 0 : 1;
}
