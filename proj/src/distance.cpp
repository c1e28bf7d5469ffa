#include "dupviper/distance.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <functional>
#include <string>

namespace dupviper {

std::size_t lcs_length(std::u32string_view s1, std::u32string_view s2) {
    if (s1.size() < s2.size()) {
        std::swap(s1, s2);
    }
    if (s2.empty()) {
        return 0;
    }
    std::vector<std::size_t> prev(s2.size() + 1, 0);
    std::vector<std::size_t> cur(s2.size() + 1, 0);
    for (char32_t a : s1) {
        for (std::size_t j = 0; j < s2.size(); ++j) {
            cur[j + 1] = (a == s2[j]) ? prev[j] + 1 : std::max(prev[j + 1], cur[j]);
        }
        std::swap(prev, cur);
    }
    return prev.back();
}

std::size_t lcs_distance(std::u32string_view s1, std::u32string_view s2) {
    return s1.size() + s2.size() - 2 * lcs_length(s1, s2);
}

DistanceCache::DistanceCache(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

std::size_t DistanceCache::capacity_from_env() {
    if (const char* raw = std::getenv("DUPVIPER_CACHE_SIZE")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(raw, &end, 10);
        if (end != raw && *end == '\0' && v > 0) {
            return static_cast<std::size_t>(v);
        }
    }
    return kDefaultCapacity;
}

std::size_t DistanceCache::KeyHash::operator()(const Key& k) const noexcept {
    const std::size_t h1 = std::hash<std::u32string_view>{}(k.shorter);
    const std::size_t h2 = std::hash<std::u32string_view>{}(k.longer);
    return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
}

std::size_t DistanceCache::size() const {
    std::lock_guard lock(mutex_);
    return index_.size();
}

std::size_t DistanceCache::get_or_compute(std::u32string_view s1, std::u32string_view s2) {
    if (s1.size() > s2.size() || (s1.size() == s2.size() && s2 < s1)) {
        std::swap(s1, s2);
    }
    Key key{std::u32string(s1), std::u32string(s2)};
    {
        std::lock_guard lock(mutex_);
        if (auto it = index_.find(key); it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            ++hits_;
            return it->second->second;
        }
    }
    ++misses_;
    const std::size_t value = lcs_distance(s1, s2);
    std::lock_guard lock(mutex_);
    if (index_.find(key) == index_.end()) {
        lru_.emplace_front(std::move(key), value);
        index_.emplace(lru_.front().first, lru_.begin());
        while (index_.size() > capacity_) {
            index_.erase(lru_.back().first);
            lru_.pop_back();
        }
    }
    return value;
}

std::size_t cached_distance(std::u32string_view s1, std::u32string_view s2, DistanceCache& cache) {
    return cache.get_or_compute(s1, s2);
}

PatternLcs::PatternLcs(std::u32string_view pattern)
    : length_(pattern.size()), words_((pattern.size() + 63) / 64), bmp_slot_(0x10000, -1) {
    high_mask_ = (length_ % 64 == 0) ? ~std::uint64_t{0} : ((std::uint64_t{1} << (length_ % 64)) - 1);
    masks_.assign(words_, 0);  // slot 0: symbols absent from the pattern
    std::int32_t next_slot = 1;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        const char32_t c = pattern[i];
        std::int32_t slot;
        if (c < 0x10000) {
            if (bmp_slot_[c] < 0) {
                bmp_slot_[c] = next_slot++;
                masks_.resize(masks_.size() + words_, 0);
            }
            slot = bmp_slot_[c];
        } else {
            auto [it, inserted] = astral_slot_.try_emplace(c, next_slot);
            if (inserted) {
                ++next_slot;
                masks_.resize(masks_.size() + words_, 0);
            }
            slot = it->second;
        }
        masks_[static_cast<std::size_t>(slot) * words_ + i / 64] |= std::uint64_t{1} << (i % 64);
    }
}

const std::uint64_t* PatternLcs::mask_for(char32_t c) const noexcept {
    std::int32_t slot = 0;
    if (c < 0x10000) {
        slot = std::max(bmp_slot_[c], 0);
    } else if (auto it = astral_slot_.find(c); it != astral_slot_.end()) {
        slot = it->second;
    }
    return masks_.data() + static_cast<std::size_t>(slot) * words_;
}

namespace {

// One column of the recurrence V' = (V + (V & M)) | (V & ~M) with carry across words.
inline void advance(std::uint64_t* v, const std::uint64_t* m, std::size_t words) noexcept {
    std::uint64_t carry = 0;
    for (std::size_t w = 0; w < words; ++w) {
        const std::uint64_t x = v[w];
        const std::uint64_t u = x & m[w];
        const std::uint64_t s1 = x + u;
        const std::uint64_t c1 = s1 < x;
        const std::uint64_t s2 = s1 + carry;
        const std::uint64_t c2 = s2 < s1;
        v[w] = s2 | (x & ~m[w]);
        carry = c1 | c2;
    }
}

inline std::size_t ones(const std::uint64_t* v, std::size_t words, std::uint64_t high_mask) noexcept {
    std::size_t count = 0;
    for (std::size_t w = 0; w + 1 < words; ++w) {
        count += static_cast<std::size_t>(std::popcount(v[w]));
    }
    return count + static_cast<std::size_t>(std::popcount(v[words - 1] & high_mask));
}

}  // namespace

std::size_t PatternLcs::lcs(std::u32string_view text) const {
    if (length_ == 0 || text.empty()) {
        return 0;
    }
    std::vector<std::uint64_t> v(words_, ~std::uint64_t{0});
    for (char32_t c : text) {
        advance(v.data(), mask_for(c), words_);
    }
    return length_ - ones(v.data(), words_, high_mask_);
}

void PatternLcs::prefix_lcs(std::u32string_view text, std::span<std::uint32_t> out) const {
    if (length_ == 0) {
        std::fill(out.begin(), out.end(), 0u);
        return;
    }
    std::vector<std::uint64_t> v(words_, ~std::uint64_t{0});
    for (std::size_t j = 0; j < text.size(); ++j) {
        advance(v.data(), mask_for(text[j]), words_);
        out[j] = static_cast<std::uint32_t>(length_ - ones(v.data(), words_, high_mask_));
    }
}

}  // namespace dupviper
