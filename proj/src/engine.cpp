#include "vsi/engine.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>

namespace vsi {

namespace {

// Extents for structures addressed by version or record id. The device
// stores no data, so the size only reserves an address range.
constexpr std::uint64_t kAddressSpace = std::uint64_t{1} << 40;

constexpr std::size_t kMaxSamples = 32;

std::string describe(const ArrayRecord &r) {
  std::ostringstream os;
  os << "array #" << r.id << " level " << r.level << ' ' << r.interval;
  if (r.array) os << " size " << r.array->size();
  return os.str();
}

}  // namespace

ArrayFacts facts_of(const VersionedArray &a) {
  ArrayFacts f;
  f.interval = a.interval();
  f.size = a.size();
  f.lead = lead_total(a);
  f.min_live = a.empty() ? 0 : live_profile(a).min_live();
  return f;
}

void ViolationLog::add(const std::string &kind, const std::string &detail) {
  ++counts_[kind];
  if (samples_.size() < kMaxSamples) samples_.push_back(kind + ": " + detail);
}

std::uint64_t ViolationLog::total() const {
  std::uint64_t n = 0;
  for (const auto &[k, c] : counts_) n += c;
  return n;
}

std::uint64_t ViolationLog::count(const std::string &kind) const {
  auto it = counts_.find(kind);
  return it == counts_.end() ? 0 : it->second;
}

Engine::Engine(BlockIo &io, EngineConfig cfg) : io_(io), cfg_(cfg) {
  records_.emplace_back();  // id 0 is never handed out
  level_bits_.push_back(0);
  record_table_ = io_.alloc_extent(kAddressSpace);
  level_map_ = io_.alloc_extent(kAddressSpace);
}

void Engine::ensure_level(int level) {
  while (levels_.size() <= static_cast<std::size_t>(level)) {
    Level l;
    l.live_extent = io_.alloc_extent(kAddressSpace);
    l.all_extent = io_.alloc_extent(kAddressSpace);
    levels_.push_back(std::move(l));
  }
}

const ArrayRecord &Engine::record(ArrayId id) const {
  if (id == 0 || id >= records_.size())
    throw std::out_of_range("unknown array id " + std::to_string(id));
  return records_[id];
}

std::vector<ArrayId> Engine::live_arrays(int level) const {
  std::vector<ArrayId> out;
  if (level < 0 || level >= level_count()) return out;
  for (const auto &e : level_at(level).live) out.push_back(e.id);
  return out;
}

std::vector<ArrayId> Engine::level_records(int level) const {
  std::vector<ArrayId> out;
  if (level < 0 || level >= level_count()) return out;
  for (const auto &e : level_at(level).all) out.push_back(e.id);
  return out;
}

// ---------------------------------------------------------------------------
// Interval indexes

std::size_t Engine::predecessor_pos(const std::vector<IndexEntry> &idx,
                                    std::uint64_t v) {
  auto it = std::upper_bound(
      idx.begin(), idx.end(), v,
      [](std::uint64_t x, const IndexEntry &e) { return x < e.lo; });
  return static_cast<std::size_t>(it - idx.begin());  // 0 means none
}

std::optional<std::size_t> Engine::charged_predecessor(
    const std::vector<IndexEntry> &idx, ExtentId extent,
    std::uint64_t v) const {
  std::size_t lo = 0;
  std::size_t hi = idx.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    io_.read_record(extent, mid);
    if (idx[mid].lo <= v) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo == 0) return std::nullopt;
  return lo - 1;
}

void Engine::index_insert(std::vector<IndexEntry> &idx, IndexEntry e,
                          BlockIo *io, ExtentId extent) {
  auto it = std::lower_bound(
      idx.begin(), idx.end(), e.lo,
      [](const IndexEntry &x, std::uint64_t lo) { return x.lo < lo; });
  const auto pos = static_cast<std::uint64_t>(it - idx.begin());
  idx.insert(it, e);
  if (io) io->write_record(extent, pos);
}

void Engine::index_erase(std::vector<IndexEntry> &idx, ArrayId id,
                         std::uint64_t lo, BlockIo *io, ExtentId extent) {
  auto it = std::lower_bound(
      idx.begin(), idx.end(), lo,
      [](const IndexEntry &x, std::uint64_t l) { return x.lo < l; });
  while (it != idx.end() && it->lo == lo && it->id != id) ++it;
  if (it == idx.end() || it->id != id)
    throw InvariantViolation("interval index lost array #" + std::to_string(id));
  const auto pos = static_cast<std::uint64_t>(it - idx.begin());
  idx.erase(it);
  if (io) io->write_record(extent, pos);
}

std::optional<ArrayId> Engine::find_array(int level, Version v) const {
  if (level < 0 || level >= level_count()) return std::nullopt;
  const auto &idx = level_at(level).live;
  const std::size_t p = predecessor_pos(idx, v.id);
  if (p == 0) return std::nullopt;
  const ArrayId id = idx[p - 1].id;
  if (!records_[id].interval.contains(v)) return std::nullopt;
  return id;
}

std::optional<ArrayId> Engine::find_covering(int level, Version v) const {
  if (level < 0 || level >= level_count()) return std::nullopt;
  const Level &l = level_at(level);
  PhaseScope scope(io_, Phase::aux);
  auto pos = charged_predecessor(l.live, l.live_extent, v.id);
  if (!pos) return std::nullopt;
  return l.live[*pos].id;
}

int Engine::query_top_level(Version v) const {
  for (int l = level_count() - 1; l >= 0; --l) {
    const auto &idx = level_at(l).live;
    if (!idx.empty() && idx.front().lo <= v.id) return l;
  }
  return -1;
}

int Engine::highest_level(Version v) const {
  if (v.id >= level_bits_.size()) return -1;
  const std::uint64_t bits = level_bits_[v.id];
  if (bits == 0) return -1;
  return 63 - std::countl_zero(bits);
}

std::optional<ArrayId> Engine::start_record(Version v) const {
  if (levels_.empty()) return std::nullopt;
  const Level &l = level_at(0);
  PhaseScope scope(io_, Phase::aux);
  auto pos = charged_predecessor(l.all, l.all_extent, v.id);
  if (!pos) return std::nullopt;
  return l.all[*pos].id;
}

std::optional<ArrayId> Engine::succ_of(ArrayId id) const {
  const ArrayRecord &r = record(id);
  PhaseScope scope(io_, Phase::aux);
  io_.read_record(record_table_, id);
  return r.succ;
}

std::optional<ArrayId> Engine::first_record(int level) const {
  if (level < 0 || level >= level_count()) return std::nullopt;
  const Level &l = level_at(level);
  if (l.all.empty()) return std::nullopt;
  PhaseScope scope(io_, Phase::aux);
  io_.read_record(l.all_extent, 0);
  return l.all.front().id;
}

std::pair<ArrayId, std::uint64_t> Engine::step_towards(ArrayId id,
                                                       Version v) const {
  const ArrayRecord &r = record(id);
  const Level &l = level_at(r.level);
  std::size_t pos = predecessor_pos(l.all, r.interval.lo.id) - 1;
  std::uint64_t hops = 0;
  PhaseScope scope(io_, Phase::aux);
  while (pos + 1 < l.all.size()) {
    io_.read_record(l.all_extent, pos + 1);
    if (l.all[pos + 1].lo > v.id) break;
    ++pos;
    ++hops;
  }
  return {l.all[pos].id, hops};
}

std::uint64_t Engine::stored_elements() const {
  std::uint64_t n = 0;
  for (const auto &lvl : levels_)
    for (const auto &e : lvl.live) n += records_[e.id].array->size();
  return n;
}

// ---------------------------------------------------------------------------
// Registration

void Engine::set_level_bits(Interval w, int level, bool on) {
  const std::uint64_t bit = std::uint64_t{1} << level;
  for (std::uint64_t u = w.lo.id; u <= w.hi.id; ++u) {
    std::uint64_t &bits = level_bits_[u];
    const std::uint64_t before = bits;
    bits = on ? (bits | bit) : (bits & ~bit);
    const bool top_changed =
        std::bit_width(before) != std::bit_width(bits);
    if (top_changed && !succ_mode()) io_.write_record(level_map_, u);
  }
}

void Engine::note_change(int level, std::uint64_t lo, ArrayId id, int delta) {
  auto key = std::make_tuple(level, lo, id);
  if ((index_changes_[key] += delta) == 0) index_changes_.erase(key);
}

ArrayId Engine::claim_id(int level, Version lo, bool &reused) {
  for (auto it = vacated_.begin(); it != vacated_.end(); ++it) {
    if (it->level == level && it->lo == lo.id) {
      const ArrayId id = it->id;
      vacated_.erase(it);
      reused = true;
      return id;
    }
  }
  reused = false;
  records_.emplace_back();
  return records_.size() - 1;
}

Engine::Staged Engine::stage(VersionedArray a, Phase phase) {
  PhaseScope scope(io_, phase);
  const ExtentId ext = io_.alloc_extent(a.size());
  io_.write_seq(ext, 0, a.size());
  return Staged{std::move(a), ext};
}

ArrayId Engine::register_live(int level, Staged s) {
  bool reused = false;
  const ArrayId id = claim_id(level, s.array.lo(), reused);
  ArrayRecord &r = records_[id];
  r.id = id;
  r.level = level;
  r.interval = s.array.interval();
  r.status = RecordStatus::live;
  r.array = std::make_shared<const VersionedArray>(std::move(s.array).at_level(level));
  r.extent = s.extent;

  Level &l = level_at(level);
  {
    PhaseScope scope(io_, Phase::aux);
    index_insert(l.live, {r.interval.lo.id, r.id}, &io_, l.live_extent);
    index_insert(l.all, {r.interval.lo.id, r.id}, succ_mode() ? &io_ : nullptr,
                 l.all_extent);
    set_level_bits(r.interval, level, true);
  }
  note_change(level, r.interval.lo.id, id, +1);
  if (!reused) fresh_records_.push_back(id);
  if (cfg_.invariant_checks) check_registered(r);
  return id;
}

ArrayId Engine::register_dummy(int level, Interval w) {
  bool reused = false;
  const ArrayId id = claim_id(level, w.lo, reused);
  ArrayRecord &r = records_[id];
  r.id = id;
  r.level = level;
  r.interval = w;
  r.status = RecordStatus::dummy;
  r.array.reset();
  r.extent = 0;
  {
    PhaseScope scope(io_, Phase::aux);
    Level &l = level_at(level);
    index_insert(l.all, {w.lo.id, id}, &io_, l.all_extent);
  }
  note_change(level, w.lo.id, id, +1);
  if (!reused) fresh_records_.push_back(id);
  ++stats_.dummies_created;
  return id;
}

void Engine::unregister(ArrayId id) {
  ArrayRecord &r = records_[id];
  Level &l = level_at(r.level);
  {
    PhaseScope scope(io_, Phase::aux);
    if (r.status == RecordStatus::live) {
      index_erase(l.live, id, r.interval.lo.id, &io_, l.live_extent);
      index_erase(l.all, id, r.interval.lo.id, succ_mode() ? &io_ : nullptr,
                  l.all_extent);
      set_level_bits(r.interval, r.level, false);
    } else if (r.status == RecordStatus::dummy) {
      index_erase(l.all, id, r.interval.lo.id, &io_, l.all_extent);
    }
  }
  if (r.status == RecordStatus::live) io_.free_extent(r.extent);
  note_change(r.level, r.interval.lo.id, id, -1);
  // A record registered later in this update at the same level and start
  // takes over the id, so pointers to it stay valid.
  vacated_.push_back({r.level, r.interval.lo.id, id});
  r.status = RecordStatus::retired;
  r.array.reset();
  r.extent = 0;
}

void Engine::clear_dummies(int level, Interval hull) {
  const auto &all = level_at(level).all;
  std::vector<ArrayId> hit;
  std::size_t p = predecessor_pos(all, hull.lo.id);
  for (std::size_t i = p == 0 ? 0 : p - 1;
       i < all.size() && all[i].lo <= hull.hi.id; ++i) {
    const ArrayRecord &r = records_[all[i].id];
    if (r.status == RecordStatus::dummy && r.interval.intersects(hull))
      hit.push_back(r.id);
  }
  for (ArrayId id : hit) {
    const Interval d = records_[id].interval;
    unregister(id);
    if (d.lo < hull.lo) register_dummy(level, {d.lo, hull.lo.prev()});
    if (d.hi > hull.hi) register_dummy(level, {hull.hi.next(), d.hi});
  }
}

// ---------------------------------------------------------------------------
// Updates

Version Engine::update(Key key, const Payload &payload) {
  return insert_element(Element::put(key, Version{}, payload));
}

Version Engine::erase(Key key) {
  return insert_element(Element::erase(key, Version{}));
}

Version Engine::apply(const Element &e) { return insert_element(e); }

Version Engine::insert_element(Element e) {
  std::unique_lock lock(mu_);
  const Version v = latest_.next();
  latest_ = v;
  level_bits_.push_back(0);
  e.version = v;
  ++stats_.updates;
  Staged s = stage(VersionedArray::build({e}, {v, v}, 0), Phase::update);
  promote(std::move(s), 0);
  if (succ_mode()) rewire_succ();
  index_changes_.clear();
  fresh_records_.clear();
  vacated_.clear();
  return v;
}

void Engine::promote(Staged in, int level) {
  ensure_level(level);
  const std::uint64_t cap = level_capacity(level);

  // Merge partner: the array holding the closest ancestor of min(W), plus
  // anything else at this level the merged interval would overlap.
  Interval hull = in.array.interval();
  std::vector<ArrayId> absorbed;
  {
    PhaseScope scope(io_, Phase::aux);
    const Level &l = level_at(level);
    auto pos = charged_predecessor(l.live, l.live_extent, hull.lo.id);
    std::size_t i = 0;
    if (pos) {
      const ArrayId target = l.live[*pos].id;
      absorbed.push_back(target);
      hull = hull.hull(records_[target].interval);
      i = *pos + 1;
    }
    for (; i < l.live.size(); ++i) {
      io_.read_record(l.live_extent, i);
      if (l.live[i].lo > hull.hi.id) break;
      const ArrayRecord &r = records_[l.live[i].id];
      if (!r.interval.intersects(hull)) continue;
      absorbed.push_back(r.id);
      hull = hull.hull(r.interval);
      ++stats_.absorbed;
    }
  }

  Staged cur;
  if (absorbed.empty()) {
    cur = std::move(in);
    cur.array = std::move(cur.array).at_level(level);
  } else {
    ++stats_.merges;
    std::vector<std::shared_ptr<const VersionedArray>> hold;
    std::vector<const VersionedArray *> parts;
    {
      PhaseScope scope(io_, Phase::merge);
      for (ArrayId id : absorbed) {
        const ArrayRecord &r = records_[id];
        io_.read_seq(r.extent, 0, r.array->size());
        hold.push_back(r.array);
        parts.push_back(r.array.get());
      }
      io_.read_seq(in.extent, 0, in.array.size());
      parts.push_back(&in.array);
    }
    VersionedArray merged = merge_into(parts, hull, level, cfg_.merge);
    for (ArrayId id : absorbed) unregister(id);
    io_.free_extent(in.extent);
    cur = stage(std::move(merged), Phase::merge);
  }
  if (succ_mode()) clear_dummies(level, cur.array.interval());

  // Extract while the array overflows. A sparse array additionally
  // gives up any suffix of exactly 2^(l+1) live elements before it is
  // subdivided, which the subdivision bounds rely on.
  while (true) {
    if (cur.array.empty()) {
      io_.free_extent(cur.extent);
      violation("empty_array",
                "level " + std::to_string(level) + " produced an empty array");
      return;
    }
    const bool oversized = cur.array.size() > cap;
    const bool sparse = !meets_density_bound(live_profile(cur.array).min_live(),
                                             cur.array.size());
    if (!oversized && !sparse) break;
    std::optional<Extraction> ext;
    {
      PhaseScope scope(io_, Phase::merge);
      io_.read_seq(cur.extent, 0, cur.array.size());
      if (oversized) ext = extract_promotable(cur.array, level);
      if (!ext && sparse) {
        ext = extract_promotable(cur.array, level, true);
        if (ext) ++stats_.capacity_extractions;
      }
    }
    if (!ext) {
      if (!sparse) {
        ++stats_.oversized_dense;
        break;
      }
      subdivide_and_register(std::move(cur), level);
      return;
    }
    ++stats_.promotions;
    VersionedArray up =
        VersionedArray::from_sorted(std::move(ext->elems), ext->interval, level + 1);
    if (cfg_.invariant_checks || sink_) check_promotion(up, level);

    const Interval before = cur.array.interval();
    const Version v = up.lo();
    std::optional<VersionedArray> rest = remainder(cur.array, v);
    Staged staged_up = stage(std::move(up), Phase::merge);
    io_.free_extent(cur.extent);
    if (succ_mode()) register_dummy(level, {v, before.hi});
    const bool whole = !rest;
    if (rest) cur = stage(std::move(*rest), Phase::merge);
    promote(std::move(staged_up), level + 1);
    if (whole) return;
  }
  register_live(level, std::move(cur));
}

void Engine::subdivide_and_register(Staged cur, int level) {
  ++stats_.subdivisions;
  SubdivideResult parts;
  {
    PhaseScope scope(io_, Phase::subdivide);
    io_.read_seq(cur.extent, 0, cur.array.size());
    parts = subdivide(cur.array, level);
  }
  SubdivisionEvent ev;
  const bool observe = cfg_.invariant_checks || static_cast<bool>(sink_);
  if (observe) {
    ev.level = level;
    ev.input = facts_of(cur.array);
    ev.leaf_reached = parts.leaf_reached;
  }
  io_.free_extent(cur.extent);
  stats_.subdivision_pieces += parts.pieces.size();
  for (auto &piece : parts.pieces) {
    VersionedArray a = VersionedArray::from_sorted(std::move(piece.elems),
                                                   piece.interval, level);
    if (observe) ev.pieces.push_back(facts_of(a));
    register_live(level, stage(std::move(a), Phase::subdivide));
  }
  if (observe) check_subdivision(ev, level);
}

// ---------------------------------------------------------------------------
// Successor pointers

std::optional<ArrayId> Engine::compute_succ(const ArrayRecord &r) const {
  if (r.level + 1 >= level_count()) return std::nullopt;
  const auto &all = level_at(r.level + 1).all;
  const std::size_t p = predecessor_pos(all, r.interval.lo.id);
  if (p == 0) return std::nullopt;
  return all[p - 1].id;
}

void Engine::rewire_succ() {
  std::set<ArrayId> todo(fresh_records_.begin(), fresh_records_.end());
  // An index change at level L at start `lo` can only move the successor of
  // level L-1 records starting in [lo, next start at L).
  std::set<std::pair<int, std::uint64_t>> starts;
  for (const auto &[key, delta] : index_changes_)
    if (std::get<0>(key) > 0) starts.emplace(std::get<0>(key), std::get<1>(key));
  for (const auto &[lvl, lo] : starts) {
    const auto &at = level_at(lvl).all;
    const std::size_t q = predecessor_pos(at, lo);
    const std::uint64_t next =
        q < at.size() ? at[q].lo : std::numeric_limits<std::uint64_t>::max();
    const auto &below = level_at(lvl - 1).all;
    auto it = std::lower_bound(
        below.begin(), below.end(), lo,
        [](const IndexEntry &x, std::uint64_t l) { return x.lo < l; });
    for (; it != below.end() && it->lo < next; ++it) todo.insert(it->id);
  }
  PhaseScope scope(io_, Phase::aux);
  for (ArrayId id : todo) {
    ArrayRecord &r = records_[id];
    if (r.status == RecordStatus::retired) continue;
    auto s = compute_succ(r);
    if (s != r.succ) {
      r.succ = s;
      io_.write_record(record_table_, id);
      ++stats_.succ_rewires;
    }
  }
}

// ---------------------------------------------------------------------------
// Checks

void Engine::violation(const std::string &kind, const std::string &detail) {
  violations_.add(kind, detail);
  if (cfg_.abort_on_violation) throw InvariantViolation(kind + ": " + detail);
}

void Engine::check_registered(const ArrayRecord &r) {
  const VersionedArray &a = *r.array;
  if (auto d = a.validate()) violation("array_layout", describe(r) + ": " + *d);
  if (a.empty()) {
    violation("empty_array", describe(r));
    return;
  }
  const auto &idx = level_at(r.level).live;
  const std::size_t p = predecessor_pos(idx, r.interval.lo.id);
  if (p >= 2) {
    const ArrayRecord &prev = records_[idx[p - 2].id];
    if (prev.interval.intersects(r.interval))
      violation("level_disjoint", describe(r) + " overlaps " + describe(prev));
  }
  if (p < idx.size()) {
    const ArrayRecord &next = records_[idx[p].id];
    if (next.interval.intersects(r.interval))
      violation("level_disjoint", describe(r) + " overlaps " + describe(next));
  }
  const std::uint64_t min_live = live_profile(a).min_live();
  if (!meets_density_bound(min_live, a.size()))
    violation("density", describe(r) + " min live " + std::to_string(min_live));
  if (!meets_level_live_bound(min_live, r.level))
    violation("level_live_bound",
              describe(r) + " min live " + std::to_string(min_live));
  if (a.size() > level_capacity(r.level) && extract_promotable(a, r.level))
    violation("level_size", describe(r) + " oversized yet promotable");
}

void Engine::check_promotion(const VersionedArray &x, int from_level) {
  PromotionEvent ev{from_level, facts_of(x)};
  if (sink_) sink_(ev);
  if (!cfg_.invariant_checks) return;
  const std::uint64_t cap = level_capacity(from_level);
  std::ostringstream os;
  os << "promotion from level " << from_level << " of " << ev.promoted.interval
     << " size " << ev.promoted.size << " lead " << ev.promoted.lead
     << " min live " << ev.promoted.min_live;
  if (3 * ev.promoted.min_live < cap) violation("promotion_live", os.str());
  if (3 * ev.promoted.lead < 2 * cap) violation("promotion_lead", os.str());
  if (!meets_density_bound(ev.promoted.min_live, ev.promoted.size))
    violation("promotion_density", os.str());
}

void Engine::check_subdivision(const SubdivisionEvent &ev, int level) {
  if (sink_) sink_(ev);
  if (!cfg_.invariant_checks) return;
  const std::uint64_t cap = level_capacity(level);
  std::ostringstream os;
  os << "subdivision at level " << level << " of " << ev.input.interval
     << " size " << ev.input.size << " min live " << ev.input.min_live
     << " into " << ev.pieces.size() << " pieces:";
  for (const auto &p : ev.pieces)
    os << ' ' << p.interval << "/size " << p.size << "/lead " << p.lead
       << "/min live " << p.min_live;
  std::uint64_t low_lead = 0;
  for (const auto &p : ev.pieces) {
    if (p.size >= cap) violation("subdivision_size", os.str());
    if (3 * p.lead < 2 * p.size) ++low_lead;
    if (!meets_density_bound(p.min_live, p.size))
      violation("subdivision_density", os.str());
  }
  if (low_lead > 1)
    violation("subdivision_lead", os.str() + ", " + std::to_string(low_lead) +
                                 " pieces below 2/3 lead");
  if (ev.leaf_reached) violation("subdivision_leaf", os.str());
}

std::vector<std::string> Engine::check_all_invariants() const {
  std::vector<std::string> out;
  auto fail = [&out](const std::string &s) {
    if (out.size() < kMaxSamples) out.push_back(s);
  };
  std::vector<std::uint64_t> bits(latest_.id + 1, 0);
  std::vector<std::uint32_t> lead_seen(latest_.id + 1, 0);

  for (int lv = 0; lv < level_count(); ++lv) {
    const Level &l = level_at(lv);
    for (std::size_t i = 0; i < l.live.size(); ++i) {
      const ArrayRecord &r = records_[l.live[i].id];
      if (r.status != RecordStatus::live || !r.array) {
        fail("index holds non-live " + describe(r));
        continue;
      }
      if (r.interval != r.array->interval() || r.level != lv)
        fail("record metadata mismatch for " + describe(r));
      if (i > 0 && records_[l.live[i - 1].id].interval.hi >= r.interval.lo)
        fail("level_disjoint: " + describe(r));
      const VersionedArray &a = *r.array;
      if (auto d = a.validate()) fail("array_layout: " + describe(r) + ": " + *d);
      if (a.empty()) {
        fail("empty_array: " + describe(r));
        continue;
      }
      const std::uint64_t min_live = live_profile(a).min_live();
      if (!meets_density_bound(min_live, a.size())) fail("density: " + describe(r));
      if (!meets_level_live_bound(min_live, lv))
        fail("level_live_bound: " + describe(r));
      if (a.size() > level_capacity(lv) && extract_promotable(a, lv))
        fail("level_size: " + describe(r));
      for (std::uint64_t u = r.interval.lo.id; u <= r.interval.hi.id; ++u)
        bits[u] |= std::uint64_t{1} << lv;
      for (const auto &e : a.elements())
        if (r.interval.contains(e.version)) ++lead_seen[e.version.id];
    }
    // The combined index tiles without overlaps.
    for (std::size_t i = 1; i < l.all.size(); ++i) {
      const ArrayRecord &p = records_[l.all[i - 1].id];
      const ArrayRecord &r = records_[l.all[i].id];
      if (p.interval.hi >= r.interval.lo)
        fail("record overlap at level " + std::to_string(lv) + ": " +
             describe(p) + " / " + describe(r));
    }
    if (succ_mode()) {
      for (const auto &e : l.all) {
        const ArrayRecord &r = records_[e.id];
        if (r.status == RecordStatus::retired) {
          fail("retired record in index: " + describe(r));
          continue;
        }
        if (r.succ) {
          const ArrayRecord &s = records_[*r.succ];
          if (s.status == RecordStatus::retired || s.level != lv + 1)
            fail("dangling succ from " + describe(r));
        }
        if (r.succ != compute_succ(r)) fail("stale succ on " + describe(r));
      }
    }
  }
  for (std::uint64_t u = 1; u <= latest_.id; ++u) {
    if (bits[u] == 0) fail("version " + std::to_string(u) + " uncovered");
    if (bits[u] != level_bits_[u])
      fail("highest-level map wrong at version " + std::to_string(u));
    // A hull merge can make an inherited copy lead again one level up, so
    // an element may be lead in several arrays; it must be in at least one.
    if (lead_seen[u] == 0)
      fail("element of version " + std::to_string(u) +
           " is stored in no live array covering it");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Snapshots

std::vector<SavedRecord> Engine::save_records() const {
  auto lock = read_lock();
  std::vector<SavedRecord> out;
  std::map<ArrayId, std::size_t> position;
  for (int lv = 0; lv < level_count(); ++lv)
    for (const auto &e : level_at(lv).all) position.emplace(e.id, position.size());
  for (int lv = 0; lv < level_count(); ++lv) {
    for (const auto &e : level_at(lv).all) {
      const ArrayRecord &r = records_[e.id];
      SavedRecord s;
      if (r.succ) s.succ = position.at(*r.succ);
      s.level = lv;
      s.interval = r.interval;
      s.status = r.status;
      if (r.array) s.elems.assign(r.array->elements().begin(), r.array->elements().end());
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::unique_ptr<Engine> Engine::restore(BlockIo &io, EngineConfig cfg,
                                        Version latest,
                                        const std::vector<SavedRecord> &records) {
  auto eng = std::make_unique<Engine>(io, cfg);
  eng->latest_ = latest;
  eng->level_bits_.assign(latest.id + 1, 0);
  for (const auto &s : records) {
    if (s.interval.hi > latest)
      throw std::invalid_argument("snapshot record beyond latest version");
    eng->ensure_level(s.level);
    if (s.status == RecordStatus::live) {
      auto a = VersionedArray::from_sorted(s.elems, s.interval, s.level);
      if (auto d = a.validate())
        throw std::invalid_argument("snapshot array invalid: " + *d);
      eng->register_live(s.level, eng->stage(std::move(a), Phase::update));
    } else if (s.status == RecordStatus::dummy) {
      eng->register_dummy(s.level, s.interval);
    }
  }
  if (eng->succ_mode()) eng->rewire_succ();
  eng->index_changes_.clear();
  eng->fresh_records_.clear();
  eng->vacated_.clear();
  eng->stats_ = EngineStats{};
  return eng;
}

}  // namespace vsi
