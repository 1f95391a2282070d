#ifndef VSI_VARRAY_HPP
#define VSI_VARRAY_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "vsi/types.hpp"

namespace vsi {

using Ratio = boost::rational<std::int64_t>;

// Versioned array (A, W): a sorted run of elements plus the contiguous
// version interval it answers for. Immutable once built.
//
// Liveness is array-local: element e is live at w when it is the
// largest-version entry <= w for its key among this array's elements and
// w lies in W.
class VersionedArray {
 public:
  VersionedArray() = default;

  // Sorts, drops duplicate (key, version) copies and sets the interval.
  // Throws std::invalid_argument for an empty interval, for elements newer
  // than w.hi, and for elements that are dead over all of w.
  [[nodiscard]] static VersionedArray build(std::vector<Element> elems,
                                            Interval w, int level);

  // Wraps elements that are already in array order. Nothing is checked;
  // validate() reports what is wrong.
  [[nodiscard]] static VersionedArray from_sorted(std::vector<Element> elems,
                                                  Interval w, int level);

  [[nodiscard]] std::span<const Element> elements() const { return elems_; }
  [[nodiscard]] const Element &operator[](std::size_t i) const {
    return elems_[i];
  }
  [[nodiscard]] std::size_t size() const { return elems_.size(); }
  [[nodiscard]] bool empty() const { return elems_.empty(); }
  [[nodiscard]] Interval interval() const { return w_; }
  [[nodiscard]] Version lo() const { return w_.lo; }
  [[nodiscard]] Version hi() const { return w_.hi; }
  [[nodiscard]] int level() const { return level_; }

  [[nodiscard]] VersionedArray at_level(int level) const &;
  [[nodiscard]] VersionedArray at_level(int level) &&;

  // Live interval of element i; empty (lo > hi) when it is live nowhere in W.
  [[nodiscard]] Interval live_interval(std::size_t i) const;

  // Every structural rule of the layout. Returns a diagnostic on failure.
  [[nodiscard]] std::optional<std::string> validate() const;

 private:
  VersionedArray(std::vector<Element> elems, Interval w, int level)
      : elems_(std::move(elems)), w_(w), level_(level) {}

  std::vector<Element> elems_;
  Interval w_{Version{1}, Version{0}};
  int level_ = 0;
};

struct LiveInterval {
  std::size_t index = 0;
  Interval live;
};

[[nodiscard]] std::vector<LiveInterval> live_intervals(const VersionedArray &a);

// Number of elements live at w. w must lie in W (std::out_of_range otherwise).
[[nodiscard]] std::uint64_t live_count(const VersionedArray &a, Version w);

// min over w in W of live(A, w) / |A|. Throws std::domain_error when empty.
[[nodiscard]] Ratio density(const VersionedArray &a);

// Elements written exactly at w, and elements written anywhere inside W
// (the rest are copies inherited from before W).
[[nodiscard]] std::uint64_t lead_count(const VersionedArray &a, Version w);
[[nodiscard]] std::uint64_t lead_total(const VersionedArray &a);

// S(A, v): elements live at some version in [v, w.hi], in array order.
[[nodiscard]] std::vector<Element> suffix_subarray(const VersionedArray &a,
                                                   Version v);

// Elements whose live interval meets `range`, in array order.
[[nodiscard]] std::vector<Element> live_within(const VersionedArray &a,
                                               Interval range);

// Step functions over W: live(A, w) and |S(A, w)|. Entry i holds from
// starts[i] up to starts[i + 1] - 1 (or w.hi for the last entry).
struct LiveProfile {
  std::vector<Version> starts;
  std::vector<std::uint64_t> live;
  std::vector<std::uint64_t> suffix;

  [[nodiscard]] std::size_t segment_of(Version w) const;
  [[nodiscard]] std::uint64_t min_live() const;
};

[[nodiscard]] LiveProfile live_profile(const VersionedArray &a);

struct MergeOptions {
  // Fault-injection hook: when false, duplicate (key, version) copies survive.
  bool dedup = true;
};

// Linear merge of two runs whose intervals touch or overlap. The result
// covers the union and keeps a's level. An element-free side is the
// identity. Throws std::invalid_argument when the union has a gap.
[[nodiscard]] VersionedArray merge(const VersionedArray &a,
                                   const VersionedArray &b,
                                   MergeOptions opts = {});

// Merges any number of runs into one array over `hull`, which must cover
// every input interval. Elements that end up shadowed over the whole hull
// are dropped.
[[nodiscard]] VersionedArray merge_into(
    std::span<const VersionedArray *const> parts, Interval hull, int level,
    MergeOptions opts = {});

// For every key in [k1, k2], the entry with the largest version <= v present
// in the array. Binary search to k1, then one left-to-right pass.
[[nodiscard]] std::vector<Element> scan_range(const VersionedArray &a,
                                              Version v, Key k1, Key k2);

// Index of the first element with key >= k.
[[nodiscard]] std::size_t lower_bound_key(std::span<const Element> elems,
                                          Key k);

}  // namespace vsi

#endif  // VSI_VARRAY_HPP
