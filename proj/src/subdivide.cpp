#include <algorithm>
#include <sstream>

#include "vsi/restructure.hpp"

namespace vsi {

std::optional<Extraction> extract_promotable(const VersionedArray &a,
                                             int level, bool at_capacity) {
  if (a.empty()) return std::nullopt;
  const std::uint64_t cap = level_capacity(level);
  const LiveProfile p = live_profile(a);
  for (std::size_t s = 0; s < p.starts.size(); ++s) {
    const bool big = at_capacity ? p.suffix[s] >= cap : p.suffix[s] > cap;
    if (3 * p.live[s] > cap && big) {
      const Version v = p.starts[s];
      return Extraction{suffix_subarray(a, v), {v, a.hi()}};
    }
  }
  return std::nullopt;
}

std::optional<VersionedArray> remainder(const VersionedArray &a, Version v) {
  if (v <= a.lo()) return std::nullopt;
  const Interval kept{a.lo(), v.prev()};
  return VersionedArray::from_sorted(live_within(a, kept), kept, a.level());
}

SubdivideResult subdivide(const VersionedArray &a, int level) {
  const std::uint64_t cap = level_capacity(level);
  std::vector<Interval> live(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) live[i] = a.live_interval(i);

  SubdivideResult out;
  const Version lo = a.lo();
  Version hi = a.hi();
  std::vector<std::uint64_t> clipped;
  for (bool first = true;; first = false) {
    Version cut = lo;
    // After the first cut, a remaining chunk that already fits goes out
    // whole instead of being split into [lo+1, hi] and [lo, lo].
    const bool fits =
        !first && static_cast<std::uint64_t>(std::count_if(
                      live.begin(), live.end(), [&](const Interval &li) {
                        return li.intersects({lo, hi});
                      })) < cap;
    if (hi > lo && !fits) {
      clipped.clear();
      for (const auto &li : live)
        if (!li.empty() && li.lo <= hi) clipped.push_back(std::min(li.hi, hi).id);
      // |S(w)| = #{clipped >= w}; the smallest w with fewer than cap
      // entries sits just above the cap-th largest clipped end.
      std::uint64_t w = lo.id + 1;
      if (clipped.size() >= cap) {
        auto nth = clipped.begin() + static_cast<std::ptrdiff_t>(cap - 1);
        std::nth_element(clipped.begin(), nth, clipped.end(),
                         std::greater<>{});
        w = std::max(w, *nth + 1);
      }
      if (w > hi.id) {
        out.leaf_reached = true;
      } else {
        cut = Version{w};
      }
    }

    SubdividePiece piece{{}, {cut, hi}};
    for (std::size_t i = 0; i < a.size(); ++i)
      if (live[i].intersects(piece.interval)) piece.elems.push_back(a[i]);
    if (piece.elems.empty()) {
      std::ostringstream os;
      os << "subdivide: empty emission for " << piece.interval << " of array "
         << a.interval();
      throw InvariantViolation(os.str());
    }
    out.pieces.push_back(std::move(piece));
    if (cut == lo) break;
    hi = cut.prev();
  }
  return out;
}

}  // namespace vsi
