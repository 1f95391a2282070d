#include "vsi/query.hpp"

#include <queue>
#include <span>
#include <stdexcept>

#include <json.hpp>

namespace vsi {

namespace {

struct Cursor {
  std::span<const Element> elems;  // keys within [k1, k2]
  std::size_t pos = 0;
  int level = 0;
  Version v;

  void skip_newer() {
    while (pos < elems.size() && elems[pos].version > v) ++pos;
  }
  [[nodiscard]] bool done() const { return pos >= elems.size(); }
  [[nodiscard]] const Element &top() const { return elems[pos]; }
};

// Min-heap order: key ascending, version descending, level ascending. The
// first element popped for a key is its closest ancestor, lowest copy first.
struct HeapOrder {
  const std::vector<Cursor> *cur;
  bool operator()(std::size_t a, std::size_t b) const {
    const Element &x = (*cur)[a].top();
    const Element &y = (*cur)[b].top();
    if (x.key != y.key) return x.key > y.key;
    if (x.version != y.version) return x.version < y.version;
    return (*cur)[a].level > (*cur)[b].level;
  }
};

// The arrays to scan, one per level at most.
std::vector<std::pair<int, ArrayId>> pick_arrays(const Engine &eng, Version v,
                                                 QueryResult &res) {
  std::vector<std::pair<int, ArrayId>> out;
  if (eng.config().query_mode == QueryMode::aux_index) {
    const int top = eng.query_top_level(v);
    for (int l = 0; l <= top; ++l) {
      ++res.levels_visited;
      if (auto id = eng.find_covering(l, v)) out.emplace_back(l, *id);
    }
    return out;
  }

  std::optional<ArrayId> cur = eng.start_record(v);
  for (int l = 0; cur; ++l) {
    auto [id, hops] = eng.step_towards(*cur, v);
    res.succ_hops += hops;
    ++res.levels_visited;
    const ArrayRecord &r = eng.record(id);
    if (r.status == RecordStatus::live && r.interval.lo <= v)
      out.emplace_back(l, id);
    if (l + 1 >= eng.level_count()) break;
    cur = eng.succ_of(id);
    if (!cur) {
      // Nothing above starts at or before this record; a later start may
      // still precede v.
      cur = eng.first_record(l + 1);
      if (cur && eng.record(*cur).interval.lo > v) cur.reset();
    }
  }
  return out;
}

}  // namespace

QueryResult range_query(const Engine &eng, Version v, Key k1, Key k2) {
  if (k1 > k2) throw std::invalid_argument("range_query: k1 > k2");
  auto lock = eng.read_lock();
  if (v > eng.latest())
    throw std::out_of_range("range_query: version " + std::to_string(v.id) +
                            " is past the latest version " +
                            std::to_string(eng.latest().id));
  QueryResult res;
  BlockIo &io = eng.io();
  const auto picked = pick_arrays(eng, v, res);

  std::vector<Cursor> cursors;
  {
    PhaseScope scope(io, Phase::query);
    for (const auto &[level, id] : picked) {
      const ArrayRecord &r = eng.record(id);
      const auto elems = r.array->elements();
      const std::uint64_t before = io.extent_transfers(r.extent);

      LevelScan scan{level, id, elems.size(), 0, 0, 0};
      std::size_t lo = 0;
      std::size_t hi = elems.size();
      while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        io.read_record(r.extent, mid);
        ++scan.probes;
        if (elems[mid].key < k1) {
          lo = mid + 1;
        } else {
          hi = mid;
        }
      }
      std::size_t end = lo;
      while (end < elems.size() && elems[end].key <= k2) ++end;
      scan.examined = end - lo;
      if (scan.examined > 0) io.read_seq(r.extent, lo, scan.examined);
      scan.transfers = io.extent_transfers(r.extent) - before;
      res.scans.push_back(scan);

      Cursor c{elems.subspan(lo, end - lo), 0, level, v};
      c.skip_newer();
      if (!c.done()) cursors.push_back(c);
    }
  }

  std::priority_queue<std::size_t, std::vector<std::size_t>, HeapOrder> heap(
      HeapOrder{&cursors});
  for (std::size_t i = 0; i < cursors.size(); ++i) heap.push(i);
  std::optional<Key> last;
  while (!heap.empty()) {
    const std::size_t i = heap.top();
    heap.pop();
    const Element &e = cursors[i].top();
    if (!last || *last != e.key) {
      last = e.key;
      if (!e.tombstone) res.entries.push_back(Entry{e.key, e.version, e.payload});
    }
    ++cursors[i].pos;
    cursors[i].skip_newer();
    if (!cursors[i].done()) heap.push(i);
  }
  return res;
}

std::optional<Entry> point_query(const Engine &eng, Version v, Key k) {
  QueryResult r = range_query(eng, v, k, k);
  if (r.entries.empty()) return std::nullopt;
  return r.entries.front();
}

std::string QueryResult::stats_json() const {
  nlohmann::ordered_json j;
  j["entries"] = entries.size();
  j["levels_visited"] = levels_visited;
  j["succ_hops"] = succ_hops;
  j["scans"] = nlohmann::json::array();
  for (const auto &s : scans) {
    j["scans"].push_back({{"level", s.level},
                          {"array", s.array},
                          {"array_size", s.array_size},
                          {"examined", s.examined},
                          {"probes", s.probes},
                          {"transfers", s.transfers}});
  }
  return j.dump();
}

}  // namespace vsi
