#include "dupviper/clonemap.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include "dupviper/error.hpp"

namespace dupviper {

std::vector<std::size_t> suffix_array(const std::vector<std::size_t>& seq) {
    const std::size_t n = seq.size();
    std::vector<std::size_t> sa(n);
    if (n == 0) {
        return sa;
    }
    std::vector<std::size_t> rank(n), tmp(n), cnt;
    // Initial ranks: compress symbols to 1..sigma so that 0 can stand for "past the end".
    {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return seq[a] < seq[b]; });
        std::size_t r = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == 0 || seq[order[i]] != seq[order[i - 1]]) {
                ++r;
            }
            rank[order[i]] = r;
        }
        sa = std::move(order);
    }
    std::vector<std::size_t> second(n);
    for (std::size_t len = 1;; len <<= 1) {
        const std::size_t max_rank = *std::max_element(rank.begin(), rank.end());
        if (max_rank == n) {
            break;
        }
        auto key2 = [&](std::size_t i) { return i + len < n ? rank[i + len] : 0; };
        // Radix sort by (rank[i], rank[i + len]): stable counting sort on the second key, then the first.
        cnt.assign(max_rank + 1, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++cnt[key2(i)];
        }
        for (std::size_t r = 1; r <= max_rank; ++r) {
            cnt[r] += cnt[r - 1];
        }
        for (std::size_t i = n; i-- > 0;) {
            second[--cnt[key2(i)]] = i;
        }
        cnt.assign(max_rank + 1, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++cnt[rank[i]];
        }
        for (std::size_t r = 1; r <= max_rank; ++r) {
            cnt[r] += cnt[r - 1];
        }
        for (std::size_t i = n; i-- > 0;) {
            const std::size_t s = second[i];
            sa[--cnt[rank[s]]] = s;
        }
        tmp[sa[0]] = 1;
        for (std::size_t i = 1; i < n; ++i) {
            const std::size_t a = sa[i - 1];
            const std::size_t b = sa[i];
            tmp[b] = tmp[a] + ((rank[a] != rank[b] || key2(a) != key2(b)) ? 1 : 0);
        }
        std::swap(rank, tmp);
    }
    for (std::size_t i = 0; i < n; ++i) {
        sa[rank[i] - 1] = i;
    }
    return sa;
}

std::vector<std::size_t> lcp_array(const std::vector<std::size_t>& seq, const std::vector<std::size_t>& sa) {
    const std::size_t n = seq.size();
    std::vector<std::size_t> lcp(n, 0), rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        rank[sa[i]] = i;
    }
    std::size_t h = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (rank[i] == 0) {
            h = 0;
            continue;
        }
        const std::size_t j = sa[rank[i] - 1];
        while (i + h < n && j + h < n && seq[i + h] == seq[j + h]) {
            ++h;
        }
        lcp[rank[i]] = h;
        if (h > 0) {
            --h;
        }
    }
    return lcp;
}

std::vector<TokenRepeat> maximal_repeats(const std::vector<std::size_t>& seq, std::size_t min_length) {
    std::vector<TokenRepeat> out;
    const std::size_t n = seq.size();
    if (n < 2) {
        return out;
    }
    min_length = std::max<std::size_t>(min_length, 1);
    const auto sa = suffix_array(seq);
    const auto lcp = lcp_array(seq, sa);

    auto report = [&](std::size_t length, std::size_t lb, std::size_t rb) {
        if (length < min_length) {
            return;
        }
        // Left-maximal unless every occurrence has the same predecessor token.
        bool left_maximal = false;
        const std::size_t first = sa[lb];
        for (std::size_t r = lb; r <= rb && !left_maximal; ++r) {
            const std::size_t s = sa[r];
            left_maximal = s == 0 || first == 0 || seq[s - 1] != seq[first - 1];
        }
        if (!left_maximal) {
            return;
        }
        TokenRepeat rep;
        rep.length = length;
        rep.starts.assign(sa.begin() + static_cast<std::ptrdiff_t>(lb), sa.begin() + static_cast<std::ptrdiff_t>(rb) + 1);
        std::sort(rep.starts.begin(), rep.starts.end());
        out.push_back(std::move(rep));
    };

    // Bottom-up traversal of the lcp-interval tree.
    struct Open {
        std::size_t lcp;
        std::size_t lb;
    };
    std::vector<Open> stack{{0, 0}};
    for (std::size_t i = 1; i <= n; ++i) {
        const std::size_t cur = i < n ? lcp[i] : 0;
        std::size_t lb = i - 1;
        while (cur < stack.back().lcp) {
            const Open top = stack.back();
            stack.pop_back();
            report(top.lcp, top.lb, i - 1);
            lb = top.lb;
        }
        if (cur > stack.back().lcp) {
            stack.push_back({cur, lb});
        }
    }
    std::sort(out.begin(), out.end(), [](const TokenRepeat& a, const TokenRepeat& b) {
        return a.starts.front() != b.starts.front() ? a.starts.front() < b.starts.front() : a.length < b.length;
    });
    return out;
}

std::vector<std::size_t> token_ids(const Document& doc) {
    std::unordered_map<std::u32string_view, std::size_t> ids;
    std::vector<std::size_t> seq;
    seq.reserve(doc.tokens().size());
    for (const auto& t : doc.tokens()) {
        auto [it, inserted] = ids.try_emplace(t.fragment.view(), ids.size());
        seq.push_back(it->second);
    }
    return seq;
}

std::vector<ExactCloneGroup> find_exact_groups(const Document& doc, std::size_t min_tokens) {
    if (min_tokens == 0) {
        throw ParameterError("min_tokens must be at least 1");
    }
    const auto& tokens = doc.tokens();
    std::vector<ExactCloneGroup> groups;
    for (auto& rep : maximal_repeats(token_ids(doc), min_tokens)) {
        ExactCloneGroup g;
        g.token_length = rep.length;
        g.members.reserve(rep.starts.size());
        for (std::size_t s : rep.starts) {
            g.members.push_back(TextFragment{&doc, tokens[s].fragment.b, tokens[s + rep.length - 1].fragment.e});
        }
        g.token_starts = std::move(rep.starts);
        groups.push_back(std::move(g));
    }
    return groups;
}

std::size_t token_temperature(const Token& token, const std::vector<ExactCloneGroup>& groups) {
    std::size_t h = 0;
    for (const auto& g : groups) {
        if (g.cardinality() <= h) {
            continue;
        }
        for (const auto& m : g.members) {
            if (m.doc == token.fragment.doc && m.contains(token.fragment)) {
                h = g.cardinality();
                break;
            }
        }
    }
    return h;
}

Rgb heat_color(std::size_t h, std::size_t t_max) {
    if (t_max == 0) {
        return {1.0, 1.0, 1.0};
    }
    if (h > t_max) {
        throw ParameterError("token temperature exceeds the maximum temperature");
    }
    const double ratio = static_cast<double>(h) / static_cast<double>(t_max);
    return {1.0, 1.0 - ratio, 1.0 - ratio};
}

HeatMap build_heatmap(const Document& doc, std::size_t min_tokens) {
    HeatMap heat;
    heat.doc = &doc;
    heat.min_tokens = min_tokens;
    const std::size_t n = doc.tokens().size();
    heat.temperatures.assign(n, 0);

    auto groups = find_exact_groups(doc, min_tokens);
    std::stable_sort(groups.begin(), groups.end(),
                     [](const ExactCloneGroup& a, const ExactCloneGroup& b) { return a.cardinality() > b.cardinality(); });
    // Hottest groups first; each token is assigned once, skipping already-assigned runs.
    std::vector<std::size_t> next_free(n + 1);
    std::iota(next_free.begin(), next_free.end(), 0);
    auto find = [&](std::size_t x) {
        while (next_free[x] != x) {
            next_free[x] = next_free[next_free[x]];
            x = next_free[x];
        }
        return x;
    };
    for (const auto& g : groups) {
        for (std::size_t s : g.token_starts) {
            const std::size_t end = s + g.token_length;
            for (std::size_t t = find(s); t < end; t = find(t)) {
                heat.temperatures[t] = g.cardinality();
                next_free[t] = t + 1;
            }
        }
    }
    heat.t_max = n == 0 ? 0 : *std::max_element(heat.temperatures.begin(), heat.temperatures.end());
    heat.colors.reserve(n);
    for (std::size_t h : heat.temperatures) {
        heat.colors.push_back(heat_color(h, heat.t_max));
    }
    return heat;
}

nlohmann::json heatmap_to_json(const HeatMap& heat) {
    nlohmann::json tokens = nlohmann::json::array();
    const auto& toks = heat.doc->tokens();
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& c = heat.colors[i];
        tokens.push_back({{"b", toks[i].fragment.b},
                          {"e", toks[i].fragment.e},
                          {"text", toks[i].fragment.utf8()},
                          {"h", heat.temperatures[i]},
                          {"color", {c[0], c[1], c[2]}}});
    }
    return {{"doc", heat.doc->id()}, {"min_tokens", heat.min_tokens}, {"t_max", heat.t_max}, {"tokens", std::move(tokens)}};
}

namespace {

void append_escaped(std::string& out, std::u32string_view text) {
    for (char32_t c : text) {
        switch (c) {
            case U'&': out += "&amp;"; break;
            case U'<': out += "&lt;"; break;
            case U'>': out += "&gt;"; break;
            case U'"': out += "&quot;"; break;
            default: out += encode_utf8(std::u32string_view(&c, 1));
        }
    }
}

}  // namespace

std::string heatmap_to_html(const HeatMap& heat) {
    const auto& text = heat.doc->text();
    std::string out =
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Heat map: ";
    append_escaped(out, std::u32string(heat.doc->id().begin(), heat.doc->id().end()));
    out += "</title>\n<style>body{font-family:monospace;white-space:pre-wrap;}</style>\n</head>\n<body>\n";
    std::size_t pos = 0;
    const auto& toks = heat.doc->tokens();
    char style[96];
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& f = toks[i].fragment;
        append_escaped(out, std::u32string_view(text).substr(pos, f.b - pos));
        const auto& c = heat.colors[i];
        std::snprintf(style, sizeof style, "<span data-h=\"%zu\" style=\"background-color:rgb(%d,%d,%d)\">",
                      heat.temperatures[i], static_cast<int>(c[0] * 255 + 0.5), static_cast<int>(c[1] * 255 + 0.5),
                      static_cast<int>(c[2] * 255 + 0.5));
        out += style;
        append_escaped(out, f.view());
        out += "</span>";
        pos = f.e + 1;
    }
    append_escaped(out, std::u32string_view(text).substr(pos));
    out += "\n</body>\n</html>\n";
    return out;
}

}  // namespace dupviper
