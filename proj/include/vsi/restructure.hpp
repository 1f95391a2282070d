#ifndef VSI_RESTRUCTURE_HPP
#define VSI_RESTRUCTURE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "vsi/varray.hpp"

namespace vsi {

// Size bound of level l: 2^(l+1).
[[nodiscard]] constexpr std::uint64_t level_capacity(int level) {
  return std::uint64_t{2} << level;
}

// live(A, w) >= 2^l / 3, in integers.
[[nodiscard]] constexpr bool meets_level_live_bound(std::uint64_t live,
                                                    int level) {
  return 3 * live >= (std::uint64_t{1} << level);
}

// density >= 1/6, in integers.
[[nodiscard]] constexpr bool meets_density_bound(std::uint64_t min_live,
                                                 std::uint64_t size) {
  return 6 * min_live >= size;
}

struct Extraction {
  std::vector<Element> elems;  // S(A, v)
  Interval interval;           // [v, A.hi]
};

// The promotable subarray of an array at `level`: v is the smallest version
// in W with live(A, v) > 2^(l+1)/3 and |S(A, v)| > 2^(l+1).
//
// With `at_capacity`, |S(A, v)| == 2^(l+1) also qualifies. Subdivision needs
// that: a suffix of exactly 2^(l+1) live elements can be neither cut nor
// promoted under the strict test.
[[nodiscard]] std::optional<Extraction> extract_promotable(
    const VersionedArray &a, int level, bool at_capacity = false);

// What stays behind after S(A, v) leaves: every element live somewhere in
// [A.lo, v - 1]. Elements live on both sides stay in both arrays.
// nullopt when v == A.lo, i.e. the whole array was promoted.
[[nodiscard]] std::optional<VersionedArray> remainder(const VersionedArray &a,
                                                      Version v);

struct SubdividePiece {
  std::vector<Element> elems;
  Interval interval;
};

struct SubdivideResult {
  std::vector<SubdividePiece> pieces;  // newest interval first
  // The walk ran into a leaf after descending, which the subdivision proof
  // rules out; the remaining chunk was emitted whole.
  bool leaf_reached = false;
};

// Greedy bottom-up chopping. Repeatedly cut off [w, hi] for the smallest
// w in (lo, hi] with |S(A, w)| < 2^(l+1), restricted to what is left of W.
// After the first cut, a remainder with fewer than 2^(l+1) elements live in
// it, or a single-version remainder, is emitted as is.
[[nodiscard]] SubdivideResult subdivide(const VersionedArray &a, int level);

}  // namespace vsi

#endif  // VSI_RESTRUCTURE_HPP
