#ifndef VSI_IOMODEL_HPP
#define VSI_IOMODEL_HPP

#include <array>
#include <cstdint>
#include <list>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>

namespace vsi {

using ExtentId = std::uint64_t;

enum class Phase : std::uint8_t { update, merge, subdivide, query, aux };
inline constexpr std::size_t kPhaseCount = 5;

[[nodiscard]] std::string_view phase_name(Phase p);

struct PhaseCounters {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;

  [[nodiscard]] std::uint64_t total() const { return reads + writes; }
};

// Block transfers broken down by the phase that caused them. A write-back is
// charged to the phase that dirtied the block.
struct IoReport {
  std::array<PhaseCounters, kPhaseCount> phases{};
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;

  [[nodiscard]] const PhaseCounters &operator[](Phase p) const {
    return phases[static_cast<std::size_t>(p)];
  }
  [[nodiscard]] std::uint64_t total() const { return reads + writes; }
  // Everything an update pays for: update, merge, subdivide, and optionally
  // auxiliary-structure maintenance.
  [[nodiscard]] std::uint64_t update_cost(bool include_aux) const;

  [[nodiscard]] std::string to_json() const;
};

// The storage interface the index is written against. It exposes extents
// and record positions only: block size and cache size are not visible
// here, which keeps the index code cache-oblivious. Records themselves live
// with their owners; the device accounts for moving them.
class BlockIo {
 public:
  virtual ~BlockIo() = default;

  virtual ExtentId alloc_extent(std::uint64_t n_records) = 0;
  // Releases an extent. Cached blocks are dropped without write-back.
  virtual void free_extent(ExtentId id) = 0;

  virtual void read_seq(ExtentId id, std::uint64_t offset,
                        std::uint64_t len) = 0;
  virtual void write_seq(ExtentId id, std::uint64_t offset,
                         std::uint64_t len) = 0;
  virtual void read_record(ExtentId id, std::uint64_t index) = 0;
  virtual void write_record(ExtentId id, std::uint64_t index) = 0;

  // Transfers so far that touched blocks of this extent.
  [[nodiscard]] virtual std::uint64_t extent_transfers(ExtentId id) const = 0;

  virtual Phase set_phase(Phase p) = 0;
  virtual void flush() = 0;
};

// RAII phase tag.
class PhaseScope {
 public:
  PhaseScope(BlockIo &io, Phase p) : io_(io), prev_(io.set_phase(p)) {}
  ~PhaseScope() { io_.set_phase(prev_); }
  PhaseScope(const PhaseScope &) = delete;
  PhaseScope &operator=(const PhaseScope &) = delete;

 private:
  BlockIo &io_;
  Phase prev_;
};

struct DeviceGeometry {
  std::uint64_t block_records = 64;  // B
  std::uint64_t cache_blocks = 256;  // M, in blocks
};

// Simulated two-level memory: every extent starts on a fresh block, blocks
// hold B records, and an LRU cache of M blocks sits in front. Misses cost one
// read; evicting or flushing a dirty block costs one write. Writes allocate
// in cache without fetching.
class BlockDevice final : public BlockIo {
 public:
  explicit BlockDevice(DeviceGeometry g = {});

  ExtentId alloc_extent(std::uint64_t n_records) override;
  void free_extent(ExtentId id) override;
  void read_seq(ExtentId id, std::uint64_t offset, std::uint64_t len) override;
  void write_seq(ExtentId id, std::uint64_t offset, std::uint64_t len) override;
  void read_record(ExtentId id, std::uint64_t index) override;
  void write_record(ExtentId id, std::uint64_t index) override;
  [[nodiscard]] std::uint64_t extent_transfers(ExtentId id) const override;
  Phase set_phase(Phase p) override;
  void flush() override;

  // Flushes, then empties the cache so the next access pattern runs cold.
  void drop_cache();

  [[nodiscard]] IoReport snapshot_report() const;
  IoReport reset_counters();

  [[nodiscard]] const DeviceGeometry &geometry() const { return geom_; }
  [[nodiscard]] std::size_t resident_blocks() const;
  [[nodiscard]] std::size_t live_extents() const;

 private:
  struct Extent {
    std::uint64_t first_block = 0;
    std::uint64_t n_records = 0;
    std::uint64_t transfers = 0;
  };
  struct Frame {
    std::uint64_t block = 0;
    ExtentId extent = 0;
    bool dirty = false;
    Phase dirtied_by = Phase::update;
  };

  const Extent &extent_at(ExtentId id, std::uint64_t offset,
                          std::uint64_t len) const;
  void touch(ExtentId id, std::uint64_t first_record, std::uint64_t len,
             bool write);
  void touch_block(ExtentId id, std::uint64_t block, bool write);
  void evict_one();
  void count_read(ExtentId id);
  void count_write(const Frame &f);

  DeviceGeometry geom_;
  mutable std::mutex mu_;
  std::unordered_map<ExtentId, Extent> extents_;
  ExtentId next_extent_ = 1;
  std::uint64_t next_block_ = 0;
  std::list<Frame> lru_;  // front = most recent
  std::unordered_map<std::uint64_t, std::list<Frame>::iterator> where_;
  IoReport report_;
  Phase phase_ = Phase::update;
};

}  // namespace vsi

#endif  // VSI_IOMODEL_HPP
