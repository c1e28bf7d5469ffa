#include "dupviper/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dupviper/error.hpp"
#include "parallel.hpp"

namespace dupviper {

namespace {

// Slack for comparing products of k against integers; k comes from decimal input.
constexpr double kEps = 1e-9;

// Upper bound on one shared prefix-LCS table (entries of 4 bytes).
constexpr std::size_t kMaxTableCells = std::size_t{1} << 24;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

bool interval_less(const ScoredFragment& x, const ScoredFragment& y) {
    return x.fragment.b != y.fragment.b ? x.fragment.b < y.fragment.b : x.fragment.e < y.fragment.e;
}

bool same_interval(const ScoredFragment& x, const ScoredFragment& y) {
    return x.fragment.b == y.fragment.b && x.fragment.e == y.fragment.e;
}

// Unique, then drop every element nested in another. Input order is irrelevant.
std::vector<ScoredFragment> unique_outermost(std::vector<ScoredFragment> items) {
    std::sort(items.begin(), items.end(), interval_less);
    items.erase(std::unique(items.begin(), items.end(), same_interval), items.end());
    std::sort(items.begin(), items.end(), [](const ScoredFragment& x, const ScoredFragment& y) {
        return x.fragment.b != y.fragment.b ? x.fragment.b < y.fragment.b : x.fragment.e > y.fragment.e;
    });
    std::vector<ScoredFragment> kept;
    kept.reserve(items.size());
    std::size_t max_e = 0;
    bool any = false;
    for (const auto& item : items) {
        if (any && item.fragment.e <= max_e) {
            continue;
        }
        kept.push_back(item);
        max_e = any ? std::max(max_e, item.fragment.e) : item.fragment.e;
        any = true;
    }
    return kept;
}

}  // namespace

void validate_k(double k) {
    const double lower = 1.0 / std::sqrt(3.0);
    if (!(k > lower && k <= 1.0)) {
        throw ParameterError("similarity k = " + std::to_string(k) + " is outside (1/sqrt(3), 1] = (" +
                             std::to_string(lower) + ", 1]");
    }
}

std::size_t window_length(std::size_t pattern_length, double k) {
    return static_cast<std::size_t>(std::ceil(static_cast<double>(pattern_length) / k - kEps));
}

std::pair<std::size_t, std::size_t> shrink_lengths(std::size_t pattern_length, double k) {
    const auto lo = static_cast<std::size_t>(std::floor(k * static_cast<double>(pattern_length) + kEps));
    return {std::max<std::size_t>(lo, 1), window_length(pattern_length, k)};
}

double scan_threshold(std::size_t pattern_length, double k, bool strict) {
    const double p = static_cast<double>(pattern_length);
    if (strict) {
        return 2.0 * p * (1.0 - k * k) / k;
    }
    return p * (1.0 / k + 1.0) * (1.0 - k * k);
}

std::size_t scan_threshold_floor(std::size_t pattern_length, double k, bool strict) {
    return static_cast<std::size_t>(std::floor(scan_threshold(pattern_length, k, strict) + kEps));
}

std::size_t phase1_skip(std::size_t current_d, std::size_t k_di) {
    if (current_d > k_di + 1) {
        return std::max<std::size_t>(1, (current_d - k_di) / 2);
    }
    return 1;
}

bool compare(const ScoredFragment& w1, const ScoredFragment& w2) noexcept {
    if (w1.distance != w2.distance) {
        return w1.distance < w2.distance;
    }
    return w1.fragment.length() > w2.fragment.length();
}

bool compare(const TextFragment& w1, const TextFragment& w2, std::u32string_view pattern) {
    return compare(ScoredFragment{w1, lcs_distance(w1.view(), pattern)},
                   ScoredFragment{w2, lcs_distance(w2.view(), pattern)});
}

// LCS of the pattern against doc[s, s + l) for a block of consecutive starts and all shrink lengths.
struct Searcher::ProfileTable {
    std::size_t first_start = 0;
    std::size_t starts = 0;
    std::size_t min_len = 0;
    std::size_t row_len = 0;
    std::vector<std::uint32_t> cells;

    std::uint32_t lcs(std::size_t s, std::size_t l) const { return cells[(s - first_start) * row_len + (l - min_len)]; }
};

Searcher::Searcher(const Document& doc, SearchParams params)
    : doc_(doc), params_(std::move(params)), matcher_(params_.pattern.text) {
    validate_k(params_.k);
    const std::size_t p = params_.pattern.text.size();
    if (p == 0) {
        throw ParameterError("pattern is empty");
    }
    if (params_.pattern.source && params_.pattern.source->doc != &doc_) {
        throw ContractViolation("pattern fragment belongs to a different document");
    }
    window_len_ = window_length(p, params_.k);
    threshold_ = scan_threshold_floor(p, params_.k, params_.strict_threshold);
    std::tie(min_len_, max_len_) = shrink_lengths(p, params_.k);
}

void Searcher::check_cancel(std::size_t step) const {
    if (params_.stop.stop_requested()) {
        throw SearchCancelled(step);
    }
    if (params_.deadline && (step & 63) == 0 && Clock::now() >= *params_.deadline) {
        throw SearchCancelled(step);
    }
}

std::vector<ScoredFragment> Searcher::phase1_scan() {
    std::vector<ScoredFragment> w1;
    const std::size_t n = doc_.length();
    const std::size_t p = params_.pattern.text.size();
    windows_scanned_ = 0;
    if (n == 0 || p > n) {
        return w1;
    }
    const std::u32string_view text(doc_.text());
    const std::size_t len = std::min(window_len_, n);
    const std::size_t last = n - len;
    std::size_t s = 0;
    for (;;) {
        check_cancel(windows_scanned_);
        ++windows_scanned_;
        const std::size_t d = matcher_.distance(text.substr(s, len));
        if (d <= threshold_) {
            w1.push_back({TextFragment{&doc_, s, s + len - 1}, d});
        }
        if (s == last) {
            break;
        }
        const std::size_t step = params_.optimizations.skip_scan ? phase1_skip(d, threshold_) : 1;
        s = std::min(s + step, last);
    }
    return w1;
}

ScoredFragment Searcher::shrink_one(const ScoredFragment& w, const ProfileTable& table) const {
    const std::size_t p = params_.pattern.text.size();
    ScoredFragment best = w;
    const std::size_t m = w.fragment.length();
    const std::size_t upper = std::min(max_len_, m);
    for (std::size_t l = min_len_; l <= upper; ++l) {
        std::size_t d_min = std::numeric_limits<std::size_t>::max();
        const std::size_t last = w.fragment.e + 1 - l;
        for (std::size_t s = w.fragment.b; s <= last;) {
            const std::size_t d = p + l - 2 * static_cast<std::size_t>(table.lcs(s, l));
            d_min = std::min(d_min, d);
            const ScoredFragment cand{TextFragment{&doc_, s, s + l - 1}, d};
            if (compare(cand, best)) {
                best = cand;
            }
            std::size_t step = 1;
            if (params_.optimizations.skip_shrink && d > d_min + 1) {
                step = std::max<std::size_t>(1, (d - d_min) / 2);
            }
            s += step;
        }
    }
    return best;
}

std::vector<ScoredFragment> Searcher::phase2_shrink(const std::vector<ScoredFragment>& w1) {
    std::vector<ScoredFragment> sorted = w1;
    std::sort(sorted.begin(), sorted.end(), interval_less);
    std::vector<ScoredFragment> w2(sorted.size());
    if (sorted.empty()) {
        return w2;
    }
    const std::u32string_view text(doc_.text());
    const std::size_t row_len = max_len_ - min_len_ + 1;
    ProfileTable table;
    // One prefix-LCS pass per candidate start yields the LCS for every shrink length from it.
    auto fill = [&](std::size_t first_start, std::size_t reach, std::size_t workers) {
        table.first_start = first_start;
        table.starts = reach + 2 - min_len_ - first_start;
        table.min_len = min_len_;
        table.row_len = row_len;
        table.cells.assign(table.starts * row_len, 0);
        detail::parallel_for(table.starts, workers, [&](std::size_t r) {
            const std::size_t s = first_start + r;
            const std::size_t avail = std::min(max_len_, reach + 1 - s);
            thread_local std::vector<std::uint32_t> buf;
            buf.resize(avail);
            matcher_.prefix_lcs(text.substr(s, avail), buf);
            std::uint32_t* row = table.cells.data() + r * row_len;
            for (std::size_t l = min_len_; l <= avail; ++l) {
                row[l - min_len_] = buf[l - 1];
            }
        });
    };

    if (!params_.optimizations.reuse) {
        // Without reuse every element is shrunk on its own, sequentially, sharing nothing with its neighbors.
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            check_cancel(i);
            if (sorted[i].fragment.length() >= min_len_) {
                fill(sorted[i].fragment.b, sorted[i].fragment.e, 1);
                w2[i] = shrink_one(sorted[i], table);
            } else {
                w2[i] = sorted[i];
            }
        }
        return w2;
    }

    const std::size_t max_starts = std::max(window_len_, kMaxTableCells / row_len);
    std::size_t i = 0;
    while (i < sorted.size()) {
        check_cancel(i);
        // Chunk of overlapping elements whose candidate starts fit in one table.
        const std::size_t first_start = sorted[i].fragment.b;
        std::size_t j = i;
        std::size_t reach = sorted[i].fragment.e;
        while (j + 1 < sorted.size() && sorted[j + 1].fragment.b <= reach &&
               sorted[j + 1].fragment.e + 1 - first_start <= max_starts) {
            ++j;
            reach = std::max(reach, sorted[j].fragment.e);
        }
        if (reach + 1 - first_start >= min_len_) {
            fill(first_start, reach, params_.workers);
            detail::parallel_for(j - i + 1, params_.workers,
                                 [&](std::size_t x) { w2[i + x] = shrink_one(sorted[i + x], table); });
        } else {
            for (std::size_t x = i; x <= j; ++x) {
                w2[x] = sorted[x];
            }
        }
        i = j + 1;
    }
    return w2;
}

std::vector<ScoredFragment> Searcher::phase3_filter(const std::vector<ScoredFragment>& w2) {
    std::vector<ScoredFragment> w3 = unique_outermost(w2);

    if (params_.optimizations.cluster && !w3.empty()) {
        // Connected components of the overlap graph: sorted by b, a component ends where the next b passes its reach.
        std::vector<ScoredFragment> reps;
        std::size_t start = 0;
        while (start < w3.size()) {
            std::size_t end = start;
            std::size_t reach = w3[start].fragment.e;
            while (end + 1 < w3.size() && w3[end + 1].fragment.b <= reach) {
                ++end;
                reach = std::max(reach, w3[end].fragment.e);
            }
            std::size_t best = start;
            for (std::size_t x = start + 1; x <= end; ++x) {
                if (compare(w3[x], w3[best])) {
                    best = x;
                }
            }
            reps.push_back(w3[best]);
            start = end + 1;
        }
        w3 = std::move(reps);
    }

    if (params_.exclude_self && params_.pattern.source) {
        const auto& src = *params_.pattern.source;
        std::erase_if(w3, [&](const ScoredFragment& x) { return x.fragment.b == src.b && x.fragment.e == src.e; });
    }

    if (params_.optimizations.extend_words) {
        const auto& tokens = doc_.tokens();
        for (auto& x : w3) {
            if (auto t = doc_.token_at(x.fragment.b)) {
                x.fragment.b = tokens[*t].fragment.b;
            }
            if (auto t = doc_.token_at(x.fragment.e)) {
                x.fragment.e = tokens[*t].fragment.e;
            }
        }
        w3 = unique_outermost(std::move(w3));
    }

    for (auto& x : w3) {
        x.distance = params_.cache ? params_.cache->get_or_compute(x.fragment.view(), params_.pattern.text)
                                   : matcher_.distance(x.fragment.view());
    }
    return w3;
}

ResultSet Searcher::run() {
    ResultSet r;
    r.doc = &doc_;
    r.pattern = params_.pattern;
    r.k = params_.k;
    r.k_di = scan_threshold(params_.pattern.text.size(), params_.k, params_.strict_threshold);
    r.strict_threshold = params_.strict_threshold;
    r.optimizations = params_.optimizations;
    r.pattern_too_long = params_.pattern.text.size() > doc_.length();

    auto t0 = Clock::now();
    r.w1 = phase1_scan();
    r.windows_scanned = windows_scanned_;
    r.timings.phase1_ms = elapsed_ms(t0);

    t0 = Clock::now();
    r.w2 = phase2_shrink(r.w1);
    r.timings.phase2_ms = elapsed_ms(t0);

    t0 = Clock::now();
    r.w3 = phase3_filter(r.w2);
    r.timings.phase3_ms = elapsed_ms(t0);
    return r;
}

ResultSet search(const Document& doc, SearchParams params) { return Searcher(doc, std::move(params)).run(); }

nlohmann::json optimizations_to_json(const Optimizations& o) {
    return {{"opt1", o.skip_scan}, {"opt2", o.skip_shrink}, {"opt3", o.cluster}, {"opt4", o.extend_words}, {"opt5", o.reuse}};
}

Optimizations optimizations_from_json(const nlohmann::json& j, Optimizations base) {
    if (j.is_null()) {
        return base;
    }
    if (!j.is_object()) {
        throw ParameterError("optimizations must be an object of booleans opt1..opt5");
    }
    auto read = [&](const char* key, bool& field) {
        if (j.contains(key)) {
            if (!j[key].is_boolean()) {
                throw ParameterError(std::string("optimization flag '") + key + "' must be boolean");
            }
            field = j[key].get<bool>();
        }
    };
    read("opt1", base.skip_scan);
    read("opt2", base.skip_shrink);
    read("opt3", base.cluster);
    read("opt4", base.extend_words);
    read("opt5", base.reuse);
    return base;
}

nlohmann::json result_set_canonical_json(const ResultSet& r) {
    nlohmann::json pattern{{"text", encode_utf8(r.pattern.text)}, {"length", r.pattern.text.size()}};
    if (r.pattern.source) {
        pattern["doc"] = r.doc->id();
        pattern["b"] = r.pattern.source->b;
        pattern["e"] = r.pattern.source->e;
    } else {
        pattern["doc"] = nullptr;
        pattern["b"] = nullptr;
        pattern["e"] = nullptr;
    }
    nlohmann::json elements = nlohmann::json::array();
    for (const auto& x : r.w3) {
        elements.push_back({{"b", x.fragment.b}, {"e", x.fragment.e}, {"text", x.fragment.utf8()}, {"distance", x.distance}});
    }
    nlohmann::json out{{"doc", r.doc->id()},
                       {"pattern", std::move(pattern)},
                       {"k", r.k},
                       {"k_di", r.k_di},
                       {"strict_threshold", r.strict_threshold},
                       {"optimizations", optimizations_to_json(r.optimizations)},
                       {"elements", std::move(elements)}};
    out["warning"] = r.pattern_too_long ? nlohmann::json("pattern longer than document") : nlohmann::json(nullptr);
    return out;
}

nlohmann::json result_set_to_json(const ResultSet& r) {
    auto out = result_set_canonical_json(r);
    out["timings_ms"] = {{"phase1", r.timings.phase1_ms}, {"phase2", r.timings.phase2_ms}, {"phase3", r.timings.phase3_ms}};
    return out;
}

}  // namespace dupviper
