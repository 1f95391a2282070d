#ifndef VSI_ENGINE_HPP
#define VSI_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "vsi/iomodel.hpp"
#include "vsi/restructure.hpp"
#include "vsi/varray.hpp"

namespace vsi {

enum class QueryMode : std::uint8_t { aux_index, succ_pointers };

struct EngineConfig {
  QueryMode query_mode = QueryMode::aux_index;
  // Validate every array as it is registered and every restructuring event
  // against its post-conditions.
  bool invariant_checks = false;
  // With checks on: throw on the first violation instead of only counting.
  bool abort_on_violation = true;
  MergeOptions merge{};
};

using ArrayId = std::uint64_t;

enum class RecordStatus : std::uint8_t { live, dummy, retired };

// One slot of the level registry. Dummies keep the interval and successor of
// an array that left its level and hold no elements.
struct ArrayRecord {
  ArrayId id = 0;
  int level = 0;
  Interval interval;
  RecordStatus status = RecordStatus::retired;
  std::shared_ptr<const VersionedArray> array;
  std::optional<ArrayId> succ;
  ExtentId extent = 0;
};

struct ArrayFacts {
  Interval interval;
  std::uint64_t size = 0;
  std::uint64_t lead = 0;
  std::uint64_t min_live = 0;
};

// An array promoted from `from_level` to `from_level + 1`.
struct PromotionEvent {
  int from_level = 0;
  ArrayFacts promoted;
};

struct SubdivisionEvent {
  int level = 0;
  ArrayFacts input;
  std::vector<ArrayFacts> pieces;
  bool leaf_reached = false;
};

using RestructureEvent = std::variant<PromotionEvent, SubdivisionEvent>;

struct EngineStats {
  std::uint64_t updates = 0;
  std::uint64_t merges = 0;
  std::uint64_t promotions = 0;
  std::uint64_t subdivisions = 0;
  std::uint64_t subdivision_pieces = 0;
  // Arrays left above 2^(l+1) because nothing was promotable.
  std::uint64_t oversized_dense = 0;
  // Extractions of a suffix holding exactly 2^(l+1) elements from a sparse
  // array, made so that it can be subdivided.
  std::uint64_t capacity_extractions = 0;
  // Extra same-level arrays swallowed because a merge hull overlapped them.
  std::uint64_t absorbed = 0;
  std::uint64_t dummies_created = 0;
  std::uint64_t succ_rewires = 0;
};

class ViolationLog {
 public:
  void add(const std::string &kind, const std::string &detail);
  [[nodiscard]] std::uint64_t total() const;
  [[nodiscard]] std::uint64_t count(const std::string &kind) const;
  [[nodiscard]] const std::map<std::string, std::uint64_t> &counts() const {
    return counts_;
  }
  [[nodiscard]] const std::vector<std::string> &samples() const {
    return samples_;
  }

 private:
  std::map<std::string, std::uint64_t> counts_;
  std::vector<std::string> samples_;
};

// Snapshot form of one registry slot.
struct SavedRecord {
  int level = 0;
  Interval interval;
  RecordStatus status = RecordStatus::live;
  std::vector<Element> elems;
  std::optional<std::size_t> succ;  // position in the saved list
};

// The leveled structure. Level l holds arrays with pairwise-disjoint version
// intervals, at most 2^(l+1) elements and at least 2^l/3 live elements at
// every version of their interval.
//
// Single writer: update() runs under an exclusive lock; readers take
// read_lock() and may run concurrently with each other.
class Engine {
 public:
  explicit Engine(BlockIo &io, EngineConfig cfg = {});
  Engine(const Engine &) = delete;
  Engine &operator=(const Engine &) = delete;

  // Creates version latest()+1 holding (key, payload) and returns it.
  Version update(Key key, const Payload &payload);
  Version erase(Key key);
  Version apply(const Element &e);  // e.version is ignored

  [[nodiscard]] Version latest() const { return latest_; }
  [[nodiscard]] int level_count() const {
    return static_cast<int>(levels_.size());
  }
  [[nodiscard]] const EngineConfig &config() const { return cfg_; }
  [[nodiscard]] BlockIo &io() const { return io_; }
  [[nodiscard]] const EngineStats &stats() const { return stats_; }
  [[nodiscard]] const ViolationLog &violations() const { return violations_; }

  void set_event_sink(std::function<void(const RestructureEvent &)> sink) {
    sink_ = std::move(sink);
  }

  [[nodiscard]] std::shared_lock<std::shared_mutex> read_lock() const {
    return std::shared_lock(mu_);
  }

  [[nodiscard]] const ArrayRecord &record(ArrayId id) const;
  [[nodiscard]] std::vector<ArrayId> live_arrays(int level) const;
  // Live and dummy records of a level, ordered by interval.
  [[nodiscard]] std::vector<ArrayId> level_records(int level) const;

  // The live array at `level` whose interval contains v. Uncharged.
  [[nodiscard]] std::optional<ArrayId> find_array(int level, Version v) const;

  // The live array at `level` with the largest interval start <= v, found
  // by a charged binary search over the level's interval index. It holds
  // the closest ancestor of v present at that level.
  [[nodiscard]] std::optional<ArrayId> find_covering(int level,
                                                     Version v) const;

  // Highest level whose first array starts at or before v: no level above
  // can hold anything visible at v.
  [[nodiscard]] int query_top_level(Version v) const;

  // Highest level with a live array containing v, or -1.
  [[nodiscard]] int highest_level(Version v) const;

  // Successor-pointer navigation. start_record() is a charged search over
  // level 0 (live and dummy records); succ_of() and step_towards() read the
  // record table.
  [[nodiscard]] std::optional<ArrayId> start_record(Version v) const;
  [[nodiscard]] std::optional<ArrayId> succ_of(ArrayId id) const;
  [[nodiscard]] std::optional<ArrayId> first_record(int level) const;
  // Moves right along the record's level while the next record starts at
  // or before v. Returns the record reached and the hops taken.
  [[nodiscard]] std::pair<ArrayId, std::uint64_t> step_towards(
      ArrayId id, Version v) const;

  // Sum of |A| over live arrays.
  [[nodiscard]] std::uint64_t stored_elements() const;

  // Recomputes every registry invariant from scratch. Returns diagnostics;
  // empty means clean. Does not touch the violation log.
  [[nodiscard]] std::vector<std::string> check_all_invariants() const;

  [[nodiscard]] std::vector<SavedRecord> save_records() const;
  // Rebuilds an engine from saved records (live and dummy).
  [[nodiscard]] static std::unique_ptr<Engine> restore(
      BlockIo &io, EngineConfig cfg, Version latest,
      const std::vector<SavedRecord> &records);

 private:
  struct IndexEntry {
    std::uint64_t lo;
    ArrayId id;
  };
  struct Level {
    std::vector<IndexEntry> live;  // sorted by lo
    std::vector<IndexEntry> all;   // live and dummy, sorted by lo
    ExtentId live_extent = 0;
    ExtentId all_extent = 0;
  };
  struct Staged {
    VersionedArray array;
    ExtentId extent = 0;
  };

  bool succ_mode() const { return cfg_.query_mode == QueryMode::succ_pointers; }
  void ensure_level(int level);
  Level &level_at(int level) { return levels_[static_cast<std::size_t>(level)]; }
  const Level &level_at(int level) const {
    return levels_[static_cast<std::size_t>(level)];
  }

  Version insert_element(Element e);
  void promote(Staged incoming, int level);
  void subdivide_and_register(Staged cur, int level);
  Staged stage(VersionedArray a, Phase phase);
  ArrayId register_live(int level, Staged s);
  ArrayId register_dummy(int level, Interval w);
  void unregister(ArrayId id);
  void clear_dummies(int level, Interval hull);
  void note_change(int level, std::uint64_t lo, ArrayId id, int delta);
  ArrayId claim_id(int level, Version lo, bool &reused);
  void rewire_succ();
  std::optional<ArrayId> compute_succ(const ArrayRecord &r) const;
  void set_level_bits(Interval w, int level, bool on);

  void check_registered(const ArrayRecord &r);
  void check_promotion(const VersionedArray &x, int from_level);
  void check_subdivision(const SubdivisionEvent &ev, int level);
  void violation(const std::string &kind, const std::string &detail);

  static std::size_t predecessor_pos(const std::vector<IndexEntry> &idx,
                                     std::uint64_t v);
  std::optional<std::size_t> charged_predecessor(
      const std::vector<IndexEntry> &idx, ExtentId extent,
      std::uint64_t v) const;
  static void index_insert(std::vector<IndexEntry> &idx, IndexEntry e,
                           BlockIo *io, ExtentId extent);
  static void index_erase(std::vector<IndexEntry> &idx, ArrayId id,
                          std::uint64_t lo, BlockIo *io, ExtentId extent);

  BlockIo &io_;
  EngineConfig cfg_;
  mutable std::shared_mutex mu_;
  Version latest_{0};
  std::vector<Level> levels_;
  std::vector<ArrayRecord> records_;  // indexed by id; slot 0 unused
  std::vector<std::uint64_t> level_bits_;  // per version: levels containing it
  ExtentId record_table_ = 0;
  ExtentId level_map_ = 0;
  struct Vacated {
    int level;
    std::uint64_t lo;
    ArrayId id;
  };
  // Net (level, lo, id) changes of the combined indexes during one update.
  std::map<std::tuple<int, std::uint64_t, ArrayId>, int> index_changes_;
  std::vector<ArrayId> fresh_records_;
  std::vector<Vacated> vacated_;
  EngineStats stats_;
  ViolationLog violations_;
  std::function<void(const RestructureEvent &)> sink_;
};

[[nodiscard]] ArrayFacts facts_of(const VersionedArray &a);

}  // namespace vsi

#endif  // VSI_ENGINE_HPP
