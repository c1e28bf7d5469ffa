#include "dupviper/groups.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dupviper/distance.hpp"
#include "dupviper/error.hpp"
#include "dupviper/search.hpp"

namespace dupviper {

namespace {

constexpr double kEps = 1e-9;

bool covers(std::size_t coverage, std::size_t member_length, double k) {
    return static_cast<double>(coverage) + kEps >= k * static_cast<double>(member_length);
}

// Greedy in-order matching of the archetype blocks inside one member; earliest ends are optimal.
bool archetype_occurs(const std::vector<std::u32string>& blocks, std::u32string_view text) {
    std::size_t pos = 0;
    for (const auto& block : blocks) {
        const auto at = text.find(block, pos);
        if (at == std::u32string_view::npos) {
            return false;
        }
        pos = at + block.size();
    }
    return true;
}

}  // namespace

bool is_near_duplicate(std::u32string_view p, std::u32string_view g, double k) {
    validate_k(k);
    return covers(lcs_length(p, g), std::max(p.size(), g.size()), k);
}

std::string to_string(Verification v) { return v == Verification::full ? "full" : "pairwise-verified"; }

std::optional<std::size_t> multi_lcs_length(const std::vector<std::u32string_view>& strings, std::size_t cell_budget) {
    const std::size_t m = strings.size();
    if (m == 0 || m > 4) {
        return std::nullopt;
    }
    if (m == 1) {
        return strings[0].size();
    }
    std::size_t cells = 1;
    for (const auto& s : strings) {
        if (s.empty()) {
            return 0;
        }
        if (cells > cell_budget / (s.size() + 1)) {
            return std::nullopt;
        }
        cells *= s.size() + 1;
    }
    // Rolling over the first string; a slice spans the remaining dimensions.
    std::vector<std::size_t> dims(m - 1), strides(m - 1);
    std::size_t slice = 1;
    for (std::size_t d = m - 1; d-- > 0;) {
        dims[d] = strings[d + 1].size() + 1;
        strides[d] = slice;
        slice *= dims[d];
    }
    std::vector<std::uint32_t> prev(slice, 0), cur(slice, 0);
    std::vector<std::size_t> idx(m - 1);
    for (char32_t a : strings[0]) {
        std::fill(idx.begin(), idx.end(), 0);
        for (std::size_t flat = 0; flat < slice; ++flat) {
            if (flat != 0) {
                for (std::size_t d = m - 1; d-- > 0;) {
                    if (++idx[d] < dims[d]) {
                        break;
                    }
                    idx[d] = 0;
                }
            }
            bool boundary = false;
            bool all_equal = true;
            for (std::size_t d = 0; d + 1 < m; ++d) {
                if (idx[d] == 0) {
                    boundary = true;
                    break;
                }
                all_equal = all_equal && strings[d + 1][idx[d] - 1] == a;
            }
            if (boundary) {
                cur[flat] = 0;
                continue;
            }
            if (all_equal) {
                std::size_t diag = flat;
                for (std::size_t d = 0; d + 1 < m; ++d) {
                    diag -= strides[d];
                }
                cur[flat] = prev[diag] + 1;
                continue;
            }
            std::uint32_t best = prev[flat];
            for (std::size_t d = 0; d + 1 < m; ++d) {
                best = std::max(best, cur[flat - strides[d]]);
            }
            cur[flat] = best;
        }
        std::swap(prev, cur);
    }
    return prev.back();
}

GroupValidation validate_group(const NearDuplicateGroup& group) {
    validate_k(group.k);
    GroupValidation v;
    const auto& members = group.members;
    if (members.size() < 2) {
        v.reason = "a group needs at least two members";
        return v;
    }
    for (std::size_t i = 0; i + 1 < members.size(); ++i) {
        if (members[i].doc != members[i + 1].doc) {
            v.failing_member = i + 1;
            v.reason = "members belong to different documents";
            return v;
        }
        if (!before(members[i], members[i + 1])) {
            v.failing_member = i + 1;
            v.reason = "member " + std::to_string(i + 1) + " does not start after member " + std::to_string(i) + " ends";
            return v;
        }
    }
    // Any valid archetype bounds every length ratio by k and 1/k.
    for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = 0; j < members.size(); ++j) {
            if (!covers(members[i].length(), members[j].length(), group.k)) {
                v.failing_member = j;
                v.reason = "length ratio of members " + std::to_string(i) + " and " + std::to_string(j) +
                           " is outside [k, 1/k]";
                return v;
            }
        }
    }

    if (group.archetype) {
        std::size_t total = 0;
        for (const auto& block : *group.archetype) {
            total += block.size();
        }
        v.coverage = total;
        for (std::size_t j = 0; j < members.size(); ++j) {
            if (!archetype_occurs(*group.archetype, members[j].view())) {
                v.failing_member = j;
                v.reason = "archetype does not occur in order in member " + std::to_string(j);
                return v;
            }
            if (!covers(total, members[j].length(), group.k)) {
                v.failing_member = j;
                v.reason = "archetype covers less than k of member " + std::to_string(j);
                return v;
            }
        }
        v.ok = true;
        return v;
    }

    if (members.size() <= 4) {
        std::vector<std::u32string_view> views;
        for (const auto& m : members) {
            views.push_back(m.view());
        }
        if (auto coverage = multi_lcs_length(views)) {
            v.coverage = *coverage;
            for (std::size_t j = 0; j < members.size(); ++j) {
                if (!covers(*coverage, members[j].length(), group.k)) {
                    v.failing_member = j;
                    v.reason = "longest common archetype (" + std::to_string(*coverage) +
                               " symbols) covers less than k of member " + std::to_string(j);
                    return v;
                }
            }
            v.ok = true;
            return v;
        }
    }

    v.verification = Verification::pairwise;
    for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
            if (!is_near_duplicate(members[i].view(), members[j].view(), group.k)) {
                v.failing_member = j;
                v.reason = "members " + std::to_string(i) + " and " + std::to_string(j) + " are not within similarity k";
                return v;
            }
        }
    }
    v.ok = true;
    return v;
}

double o_min(std::size_t p_len, double k) {
    return static_cast<double>(p_len) / 2.0 * (3.0 * k - 1.0 / k);
}

CompletenessReport check_completeness(const std::vector<TextFragment>& group, const std::vector<TextFragment>& results,
                                      std::size_t p_len, double k) {
    CompletenessReport report;
    report.o_min = o_min(p_len, k);
    for (const auto& g : group) {
        std::size_t best = 0;
        for (const auto& w : results) {
            best = std::max(best, intersection_length(g, w));
        }
        const bool ok = report.o_min <= 0 || static_cast<double>(best) + kEps >= report.o_min;
        report.best_overlap.push_back(best);
        report.satisfied.push_back(ok);
        if (!ok) {
            ++report.violations;
        }
    }
    return report;
}

CompletenessReport check_completeness(const NearDuplicateGroup& group, const std::vector<TextFragment>& results,
                                      std::size_t p_len) {
    return check_completeness(group.members, results, p_len, group.k);
}

std::u32string filler_text(std::size_t length, FillerAlphabet alphabet, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<char32_t> letters;
    if (alphabet != FillerAlphabet::cyrillic) {
        for (char32_t c = U'a'; c <= U'z'; ++c) {
            letters.push_back(c);
        }
    }
    if (alphabet != FillerAlphabet::latin) {
        for (char32_t c = 0x0430; c <= 0x044F; ++c) {
            letters.push_back(c);
        }
    }
    // A few thousand distinct words keep chance repeats of five-word runs negligible.
    std::uniform_int_distribution<std::size_t> letter(0, letters.size() - 1);
    std::uniform_int_distribution<std::size_t> word_len(2, 9);
    std::vector<std::u32string> vocabulary(4096);
    for (auto& w : vocabulary) {
        const std::size_t len = word_len(rng);
        for (std::size_t i = 0; i < len; ++i) {
            w.push_back(letters[letter(rng)]);
        }
    }
    std::uniform_int_distribution<std::size_t> pick(0, vocabulary.size() - 1);
    std::uniform_int_distribution<int> sep(0, 99);
    std::u32string out;
    out.reserve(length + 16);
    while (out.size() < length) {
        out += vocabulary[pick(rng)];
        const int s = sep(rng);
        out += s < 80 ? U" " : s < 90 ? U", " : s < 97 ? U". " : U".\n";
    }
    out.resize(length);
    if (!out.empty()) {
        out.back() = U' ';
    }
    return out;
}

std::size_t max_plant_edits(std::size_t p_len, double k) {
    validate_k(k);
    return static_cast<std::size_t>(std::floor(static_cast<double>(p_len) * (1.0 - k) / k + kEps));
}

std::u32string plant_variant(std::u32string_view pattern, double k, std::size_t edits, std::uint64_t seed,
                             FillerAlphabet alphabet) {
    validate_k(k);
    const std::size_t p = pattern.size();
    if (p == 0) {
        throw GenerationError("pattern is empty");
    }
    if (edits > max_plant_edits(p, k)) {
        throw GenerationError("edit budget " + std::to_string(edits) + " exceeds " +
                              std::to_string(max_plant_edits(p, k)) + " allowed for |p| = " + std::to_string(p) +
                              ", k = " + std::to_string(k));
    }
    std::mt19937_64 rng(seed);
    // Split the edits into a deletions and edits - a insertions, keeping lcs >= |p| - a >= k * max(|p|, |variant|).
    std::vector<std::size_t> splits(edits + 1);
    std::iota(splits.begin(), splits.end(), 0);
    std::shuffle(splits.begin(), splits.end(), rng);
    std::optional<std::size_t> deletions;
    for (std::size_t a : splits) {
        const double kept = static_cast<double>(p - std::min(a, p));
        const double len = static_cast<double>(p - std::min(a, p) + (edits - a));
        if (a < p && kept + kEps >= k * std::max(static_cast<double>(p), len)) {
            deletions = a;
            break;
        }
    }
    if (!deletions) {
        throw GenerationError("no split of " + std::to_string(edits) + " edits stays within similarity k");
    }
    std::vector<bool> keep(p, true);
    std::vector<std::size_t> positions(p);
    std::iota(positions.begin(), positions.end(), 0);
    std::shuffle(positions.begin(), positions.end(), rng);
    for (std::size_t i = 0; i < *deletions; ++i) {
        keep[positions[i]] = false;
    }
    std::u32string variant;
    for (std::size_t i = 0; i < p; ++i) {
        if (keep[i]) {
            variant.push_back(pattern[i]);
        }
    }
    if (*deletions < edits) {
        const std::u32string pool = filler_text(256, alphabet, rng());
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        for (std::size_t i = *deletions; i < edits; ++i) {
            const std::size_t at = std::uniform_int_distribution<std::size_t>(0, variant.size())(rng);
            variant.insert(variant.begin() + static_cast<std::ptrdiff_t>(at), pool[pick(rng)]);
        }
    }
    if (!is_near_duplicate(pattern, variant, k)) {
        throw GenerationError("generated variant failed the similarity check");
    }
    return variant;
}

PlantedFixture plant_group(const PlantOptions& options, std::u32string_view pattern, double k, std::size_t m,
                           std::uint64_t seed) {
    validate_k(k);
    if (m == 0) {
        throw GenerationError("at least one planted member is required");
    }
    if (pattern.empty()) {
        throw GenerationError("pattern is empty");
    }
    const std::size_t p = pattern.size();
    if (options.edits > max_plant_edits(p, k)) {
        throw GenerationError("edit budget " + std::to_string(options.edits) + " exceeds " +
                              std::to_string(max_plant_edits(p, k)) + " allowed for |p| = " + std::to_string(p) +
                              ", k = " + std::to_string(k));
    }
    std::mt19937_64 rng(seed);
    const std::size_t gap = std::max(options.gap, window_length(p, k));
    std::u32string text = filler_text(options.lead, options.alphabet, rng());
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t i = 0; i < m; ++i) {
        if (i > 0) {
            text += filler_text(gap, options.alphabet, rng());
        }
        std::size_t e = options.edits;
        if (options.vary_edits && e > 0) {
            e = std::uniform_int_distribution<std::size_t>(0, e)(rng);
        }
        const std::u32string variant = plant_variant(pattern, k, e, rng(), options.alphabet);
        spans.emplace_back(text.size(), text.size() + variant.size() - 1);
        text += variant;
    }
    text += filler_text(options.trail, options.alphabet, rng());

    PlantedFixture fixture;
    fixture.doc = std::make_shared<const Document>(options.doc_id, std::move(text));
    fixture.group.k = k;
    fixture.group.label = "planted";
    for (const auto& [b, e] : spans) {
        fixture.group.members.push_back(fixture.doc->fragment(b, e));
    }
    return fixture;
}

nlohmann::json group_to_json(const NearDuplicateGroup& group, Verification verification) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : group.members) {
        members.push_back(fragment_to_json(m));
    }
    nlohmann::json archetype = nullptr;
    if (group.archetype) {
        archetype = nlohmann::json::array();
        for (const auto& block : *group.archetype) {
            archetype.push_back(encode_utf8(block));
        }
    }
    return {{"label", group.label},
            {"k", group.k},
            {"members", std::move(members)},
            {"archetype", std::move(archetype)},
            {"verification", to_string(verification)}};
}

}  // namespace dupviper
