#include "vsi/varray.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace vsi {

std::ostream &operator<<(std::ostream &os, const Element &e) {
  os << '(' << e.key << ',' << e.version.id;
  if (e.tombstone) os << ",del";
  return os << ')';
}

std::ostream &operator<<(std::ostream &os, const Entry &e) {
  return os << '(' << e.key << ',' << e.version.id << ','
            << payload_to_hex(e.payload) << ')';
}

Payload payload_from_u64(std::uint64_t a, std::uint64_t b) {
  Payload p{};
  for (int i = 0; i < 8; ++i) {
    p[i] = static_cast<std::uint8_t>(a >> (8 * i));
    p[8 + i] = static_cast<std::uint8_t>(b >> (8 * i));
  }
  return p;
}

std::string payload_to_hex(const Payload &p) {
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (auto b : p) os << std::setw(2) << static_cast<unsigned>(b);
  return os.str();
}

Payload payload_from_hex(const std::string &hex) {
  if (hex.size() > 2 * kPayloadBytes || hex.size() % 2 != 0)
    throw std::invalid_argument("payload hex must be an even number of at most " +
                                std::to_string(2 * kPayloadBytes) + " digits");
  Payload p{};
  for (std::size_t i = 0; i < hex.size() / 2; ++i) {
    unsigned v = 0;
    if (std::sscanf(hex.c_str() + 2 * i, "%2x", &v) != 1)
      throw std::invalid_argument("bad payload hex: " + hex);
    p[i] = static_cast<std::uint8_t>(v);
  }
  return p;
}

namespace {

// Drops duplicate slots and every element shadowed over all of `w`, keeping
// array order. Within a key group (versions descending) an element stays live
// somewhere in w only while the previous kept entry is newer than w.lo.
std::vector<Element> normalize_sorted(std::vector<Element> in, Interval w,
                                      bool dedup) {
  std::vector<Element> out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const Element &e = in[i];
    if (!out.empty() && out.back().key == e.key) {
      if (dedup && out.back().version == e.version) continue;
      if (out.back().version <= w.lo) continue;
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace

VersionedArray VersionedArray::build(std::vector<Element> elems, Interval w,
                                     int level) {
  if (w.empty())
    throw std::invalid_argument("versioned array needs a non-empty interval");
  for (const auto &e : elems) {
    if (e.version > w.hi) {
      std::ostringstream os;
      os << "element " << e << " is newer than interval " << w;
      throw std::invalid_argument(os.str());
    }
  }
  std::sort(elems.begin(), elems.end(), ElementOrder{});
  auto last = std::unique(elems.begin(), elems.end(),
                          [](const Element &a, const Element &b) {
                            return a.same_slot(b);
                          });
  elems.erase(last, elems.end());
  VersionedArray a(std::move(elems), w, level);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.live_interval(i).empty()) {
      std::ostringstream os;
      os << "element " << a[i] << " is not live anywhere in " << w;
      throw std::invalid_argument(os.str());
    }
  }
  return a;
}

VersionedArray VersionedArray::from_sorted(std::vector<Element> elems,
                                           Interval w, int level) {
  return VersionedArray(std::move(elems), w, level);
}

VersionedArray VersionedArray::at_level(int level) const & {
  VersionedArray copy = *this;
  copy.level_ = level;
  return copy;
}

VersionedArray VersionedArray::at_level(int level) && {
  level_ = level;
  return std::move(*this);
}

Interval VersionedArray::live_interval(std::size_t i) const {
  const Element &e = elems_[i];
  Version lo = std::max(e.version, w_.lo);
  Version hi = w_.hi;
  if (i > 0 && elems_[i - 1].key == e.key) {
    const Version newer = elems_[i - 1].version;
    if (newer.id == 0) return {Version{1}, Version{0}};
    hi = std::min(hi, newer.prev());
  }
  if (lo > hi) return {Version{1}, Version{0}};
  return {lo, hi};
}

std::optional<std::string> VersionedArray::validate() const {
  std::ostringstream os;
  if (w_.empty()) {
    os << "empty interval " << w_;
    return os.str();
  }
  for (std::size_t i = 0; i < elems_.size(); ++i) {
    const Element &e = elems_[i];
    if (e.version > w_.hi) {
      os << "element " << i << ' ' << e << " newer than " << w_;
      return os.str();
    }
    if (i > 0) {
      const Element &p = elems_[i - 1];
      const bool ordered =
          p.key < e.key || (p.key == e.key && p.version > e.version);
      if (!ordered) {
        os << "order broken at " << i << ": " << p << " then " << e;
        return os.str();
      }
    }
    if (live_interval(i).empty()) {
      os << "element " << i << ' ' << e << " dead over " << w_;
      return os.str();
    }
  }
  return std::nullopt;
}

std::vector<LiveInterval> live_intervals(const VersionedArray &a) {
  std::vector<LiveInterval> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out.push_back({i, a.live_interval(i)});
  return out;
}

std::uint64_t live_count(const VersionedArray &a, Version w) {
  if (!a.interval().contains(w))
    throw std::out_of_range("live_count: version outside array interval");
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.live_interval(i).contains(w)) ++n;
  return n;
}

std::size_t LiveProfile::segment_of(Version w) const {
  auto it = std::upper_bound(starts.begin(), starts.end(), w);
  return static_cast<std::size_t>(it - starts.begin()) - 1;
}

std::uint64_t LiveProfile::min_live() const {
  return live.empty() ? 0 : *std::min_element(live.begin(), live.end());
}

LiveProfile live_profile(const VersionedArray &a) {
  const Interval w = a.interval();
  // (version, delta live, delta suffix)
  struct Event {
    std::uint64_t at;
    std::int64_t dlive;
    std::int64_t dsuffix;
  };
  std::vector<Event> events;
  events.reserve(2 * a.size() + 1);
  std::uint64_t suffix0 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Interval li = a.live_interval(i);
    if (li.empty()) continue;
    ++suffix0;
    events.push_back({li.lo.id, +1, 0});
    if (li.hi < w.hi) events.push_back({li.hi.id + 1, -1, -1});
  }
  std::sort(events.begin(), events.end(),
            [](const Event &x, const Event &y) { return x.at < y.at; });

  LiveProfile p;
  std::int64_t live = 0;
  std::int64_t suffix = static_cast<std::int64_t>(suffix0);
  std::size_t i = 0;
  std::uint64_t at = w.lo.id;
  while (true) {
    while (i < events.size() && events[i].at <= at) {
      live += events[i].dlive;
      suffix += events[i].dsuffix;
      ++i;
    }
    p.starts.push_back(Version{at});
    p.live.push_back(static_cast<std::uint64_t>(live));
    p.suffix.push_back(static_cast<std::uint64_t>(suffix));
    if (i == events.size()) break;
    at = events[i].at;
  }
  return p;
}

Ratio density(const VersionedArray &a) {
  if (a.empty()) throw std::domain_error("density of an empty array");
  return Ratio(static_cast<std::int64_t>(live_profile(a).min_live()),
               static_cast<std::int64_t>(a.size()));
}

std::uint64_t lead_count(const VersionedArray &a, Version w) {
  std::uint64_t n = 0;
  for (const auto &e : a.elements())
    if (e.version == w) ++n;
  return n;
}

std::uint64_t lead_total(const VersionedArray &a) {
  std::uint64_t n = 0;
  for (const auto &e : a.elements())
    if (a.interval().contains(e.version)) ++n;
  return n;
}

std::vector<Element> live_within(const VersionedArray &a, Interval range) {
  std::vector<Element> out;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.live_interval(i).intersects(range)) out.push_back(a[i]);
  return out;
}

std::vector<Element> suffix_subarray(const VersionedArray &a, Version v) {
  return live_within(a, {v, a.hi()});
}

VersionedArray merge(const VersionedArray &a, const VersionedArray &b,
                     MergeOptions opts) {
  if (b.empty()) return a;
  if (a.empty()) return b.at_level(a.level());
  const Interval x = a.interval();
  const Interval y = b.interval();
  const bool touching = x.lo.id <= y.hi.id + 1 && y.lo.id <= x.hi.id + 1;
  if (!touching) {
    std::ostringstream os;
    os << "merge: intervals " << x << " and " << y << " leave a gap";
    throw std::invalid_argument(os.str());
  }
  const VersionedArray *parts[] = {&a, &b};
  return merge_into(parts, x.hull(y), a.level(), opts);
}

VersionedArray merge_into(std::span<const VersionedArray *const> parts,
                          Interval hull, int level, MergeOptions opts) {
  std::vector<Element> acc;
  std::vector<Element> tmp;
  for (const VersionedArray *p : parts) {
    if (p->lo() < hull.lo || p->hi() > hull.hi) {
      std::ostringstream os;
      os << "merge: part " << p->interval() << " outside hull " << hull;
      throw std::invalid_argument(os.str());
    }
    tmp.clear();
    tmp.reserve(acc.size() + p->size());
    std::merge(acc.begin(), acc.end(), p->elements().begin(),
               p->elements().end(), std::back_inserter(tmp), ElementOrder{});
    acc.swap(tmp);
  }
  return VersionedArray::from_sorted(normalize_sorted(std::move(acc), hull,
                                                      opts.dedup),
                                     hull, level);
}

std::size_t lower_bound_key(std::span<const Element> elems, Key k) {
  auto it = std::partition_point(elems.begin(), elems.end(),
                                 [k](const Element &e) { return e.key < k; });
  return static_cast<std::size_t>(it - elems.begin());
}

std::vector<Element> scan_range(const VersionedArray &a, Version v, Key k1,
                                Key k2) {
  std::vector<Element> out;
  auto elems = a.elements();
  std::size_t i = lower_bound_key(elems, k1);
  while (i < elems.size() && elems[i].key <= k2) {
    const Key k = elems[i].key;
    bool taken = false;
    for (; i < elems.size() && elems[i].key == k; ++i) {
      if (!taken && elems[i].version <= v) {
        out.push_back(elems[i]);
        taken = true;
      }
    }
  }
  return out;
}

}  // namespace vsi
