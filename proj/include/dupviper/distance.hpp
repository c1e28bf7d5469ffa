#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <list>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dupviper {

// Length of a longest common subsequence (two-row dynamic program).
std::size_t lcs_length(std::u32string_view s1, std::u32string_view s2);

// Insertion/deletion edit distance: |s1| + |s2| - 2 * LCS(s1, s2).
std::size_t lcs_distance(std::u32string_view s1, std::u32string_view s2);

/**
 * Bounded, thread-safe memo of lcs_distance keyed by string content.
 * The key is the unordered pair, so (a, b) and (b, a) share an entry.
 * Least recently used entries are evicted once capacity is reached.
 */
class DistanceCache {
public:
    static constexpr std::size_t kDefaultCapacity = 1'000'000;

    explicit DistanceCache(std::size_t capacity = kDefaultCapacity);

    // Capacity from DUPVIPER_CACHE_SIZE when set to a positive integer, else the default.
    static std::size_t capacity_from_env();

    std::size_t get_or_compute(std::u32string_view s1, std::u32string_view s2);

    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t size() const;
    std::size_t hits() const noexcept { return hits_.load(); }
    std::size_t misses() const noexcept { return misses_.load(); }

private:
    struct Key {
        std::u32string shorter;
        std::u32string longer;
        friend bool operator==(const Key&, const Key&) = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept;
    };
    using Lru = std::list<std::pair<Key, std::size_t>>;

    std::size_t capacity_;
    mutable std::mutex mutex_;
    Lru lru_;
    std::unordered_map<Key, Lru::iterator, KeyHash> index_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

std::size_t cached_distance(std::u32string_view s1, std::u32string_view s2, DistanceCache& cache);

/**
 * Bit-parallel LCS against a fixed pattern (Hyyro's row recurrence, 64 pattern
 * symbols per machine word). Produces the same values as lcs_length; used by
 * the search where one pattern is compared against many windows.
 */
class PatternLcs {
public:
    explicit PatternLcs(std::u32string_view pattern);

    std::size_t pattern_length() const noexcept { return length_; }

    std::size_t lcs(std::u32string_view text) const;
    std::size_t distance(std::u32string_view text) const { return length_ + text.size() - 2 * lcs(text); }

    // out[j] = LCS(pattern, text[0..j]) for j < text.size(); out.size() must equal text.size().
    void prefix_lcs(std::u32string_view text, std::span<std::uint32_t> out) const;

private:
    const std::uint64_t* mask_for(char32_t c) const noexcept;

    std::size_t length_;
    std::size_t words_;
    std::uint64_t high_mask_;
    std::vector<std::uint64_t> masks_;  // words_ per distinct pattern symbol, plus one all-zero slot
    std::vector<std::int32_t> bmp_slot_;
    std::unordered_map<char32_t, std::int32_t> astral_slot_;
};

}  // namespace dupviper
