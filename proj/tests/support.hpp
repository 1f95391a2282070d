#ifndef VSI_TESTS_SUPPORT_HPP
#define VSI_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "vsi/engine.hpp"
#include "vsi/oracle.hpp"
#include "vsi/restructure.hpp"
#include "vsi/types.hpp"
#include "vsi/varray.hpp"

namespace vsi::testing {

inline constexpr Key kA = 'a';
inline constexpr Key kB = 'b';
inline constexpr Key kC = 'c';
inline constexpr Key kD = 'd';
inline constexpr Key kZ = 'z';

inline Element el(Key k, std::uint64_t v) {
  return Element::put(k, Version{v}, payload_from_u64(k, v));
}

inline Interval iv(std::uint64_t lo, std::uint64_t hi) {
  return {Version{lo}, Version{hi}};
}

// E1 = [(a,3),(a,1),(b,2)] over [1,3], from v1:a, v2:b, v3:a.
inline VersionedArray e1() {
  return VersionedArray::build({el(kA, 3), el(kA, 1), el(kB, 2)}, iv(1, 3), 0);
}

inline OracleLog random_log(std::uint64_t n, std::uint64_t keys,
                            double tombstones, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Key> key(0, keys - 1);
  std::bernoulli_distribution del(tombstones);
  OracleLog log;
  for (std::uint64_t i = 0; i < n; ++i) {
    const Key k = key(rng);
    if (del(rng)) log.erase(k);
    else log.put(k, payload_from_u64(i + 1, rng()));
  }
  return log;
}

// Live interval of every element, straight from the definition: e is live
// from max(e.version, lo) until the next version of its key in the array.
inline std::vector<Interval> naive_live(const std::vector<Element> &a,
                                        Interval w) {
  std::vector<Interval> out;
  for (const auto &e : a) {
    std::uint64_t end = w.hi.id;
    for (const auto &f : a)
      if (f.key == e.key && f.version > e.version)
        end = std::min(end, f.version.id - 1);
    out.push_back({Version{std::max(e.version.id, w.lo.id)}, Version{end}});
  }
  return out;
}

// A random valid array: a short update history over [1, hi], the part of it
// visible in [lo, hi], with some elements knocked out so that the array
// looks like one that has been through merges.
inline VersionedArray random_array(std::mt19937_64 &rng, std::size_t max_size,
                                   int level) {
  std::uniform_int_distribution<std::uint64_t> len(1, 300);
  const std::uint64_t hi = len(rng);
  const std::uint64_t lo =
      std::uniform_int_distribution<std::uint64_t>(1, hi)(rng);
  const std::uint64_t keys =
      std::uniform_int_distribution<std::uint64_t>(1, 2 * max_size)(rng);
  const double drop = std::uniform_real_distribution<double>(0, 0.5)(rng);
  std::uniform_int_distribution<Key> key(0, keys - 1);
  std::bernoulli_distribution knock(drop);

  std::vector<Element> hist;
  for (std::uint64_t v = 1; v <= hi; ++v) hist.push_back(el(key(rng), v));
  std::vector<Element> kept;
  for (const auto &e : hist)
    if (!knock(rng)) kept.push_back(e);
  std::sort(kept.begin(), kept.end(), ElementOrder{});

  Interval w = iv(lo, hi);
  if (kept.size() > max_size) {
    // Raise lo until at most max_size versions are left in play.
    std::vector<std::uint64_t> vs;
    for (const auto &e : kept) vs.push_back(e.version.id);
    std::sort(vs.begin(), vs.end(), std::greater<>{});
    w.lo = Version{std::max(lo, vs[max_size - 1])};
  }
  std::vector<Element> elems;
  for (const auto &e : kept)
    if (e.version >= w.lo) elems.push_back(e);
  // Plus the newest older copy of each key, trimmed to fit.
  std::vector<Element> copies;
  for (const auto &e : kept)
    if (e.version < w.lo && (copies.empty() || copies.back().key != e.key))
      copies.push_back(e);
  for (const auto &c : copies) {
    if (elems.size() >= max_size) break;
    elems.push_back(c);
  }
  std::sort(elems.begin(), elems.end(), ElementOrder{});
  const auto live = naive_live(elems, w);
  std::vector<Element> valid;
  for (std::size_t i = 0; i < elems.size(); ++i)
    if (!live[i].empty()) valid.push_back(elems[i]);
  if (valid.empty()) valid.push_back(el(0, w.lo.id));
  // Arrays in the structure have something live at every version.
  Version first = valid.front().version;
  for (const auto &e : valid) first = std::min(first, e.version);
  w.lo = std::max(w.lo, first);
  return VersionedArray::build(valid, w, level);
}

// The subdivision walk done step by step, one child at a time, with the descent
// assignment read as v := w. A chunk of W that has shrunk below the level
// capacity after the first cut, or is down to one version, is emitted whole.
struct WalkResult {
  std::vector<std::pair<Interval, std::vector<Element>>> pieces;
  bool leaf_reached = false;
};

inline WalkResult alg4_walk(const VersionedArray &a, int level) {
  const std::uint64_t cap = level_capacity(level);
  const std::vector<Element> elems(a.elements().begin(), a.elements().end());
  const auto live = naive_live(elems, a.interval());
  auto s_of = [&](std::uint64_t w, std::uint64_t hi) {
    std::vector<Element> s;
    for (std::size_t i = 0; i < elems.size(); ++i)
      if (live[i].intersects(iv(w, hi))) s.push_back(elems[i]);
    return s;
  };

  WalkResult out;
  const std::uint64_t lo = a.lo().id;
  std::uint64_t hi = a.hi().id;
  std::uint64_t v = lo;
  bool first = true;
  while (true) {
    if (v == lo && (hi == lo || (!first && s_of(lo, hi).size() < cap))) {
      out.pieces.push_back({iv(lo, hi), s_of(lo, hi)});
      break;
    }
    if (v == hi) {  // a leaf: nothing left to descend into
      out.leaf_reached = true;
      out.pieces.push_back({iv(lo, hi), s_of(lo, hi)});
      break;
    }
    const std::uint64_t w = v + 1;
    auto s = s_of(w, hi);
    if (s.size() >= cap) {
      v = w;
    } else {
      out.pieces.push_back({iv(w, hi), std::move(s)});
      hi = w - 1;
      v = lo;
      first = false;
    }
  }
  return out;
}

}  // namespace vsi::testing

#endif  // VSI_TESTS_SUPPORT_HPP
