#ifndef VSI_SNAPSHOT_HPP
#define VSI_SNAPSHOT_HPP

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "vsi/engine.hpp"

namespace vsi {

// On-disk layout, all integers little-endian:
//
//   header   magic "VSISNAP1" (8 bytes), u32 format (1), u32 record width (40),
//            u64 latest version, u8 query mode (0 aux, 1 succ), 7 pad bytes,
//            u64 table entries, u64 total records
//   table    per entry: u32 level, u8 status (0 live, 1 dummy), 3 pad bytes,
//            u64 w_lo, u64 w_hi, u64 succ (entry index + 1, 0 for none),
//            u64 first record, u64 record count
//   records  per element: u64 key, u64 version, 16 payload bytes,
//            u8 flags (bit 0 tombstone), 7 pad bytes
inline constexpr char kSnapshotMagic[8] = {'V', 'S', 'I', 'S', 'N', 'A', 'P', '1'};
inline constexpr std::uint32_t kSnapshotFormat = 1;
inline constexpr std::uint32_t kRecordWidth = 40;

struct Snapshot {
  Version latest;
  QueryMode mode = QueryMode::aux_index;
  std::vector<SavedRecord> records;
};

[[nodiscard]] Snapshot capture(const Engine &eng);
void write_snapshot(std::ostream &out, const Snapshot &s);
void save_snapshot(const std::string &path, const Snapshot &s);
// Throws std::runtime_error on a bad magic, width, truncation or bad field.
[[nodiscard]] Snapshot read_snapshot(std::istream &in);
[[nodiscard]] Snapshot load_snapshot(const std::string &path);

// Rebuilds a running engine. cfg.query_mode is taken from the snapshot.
[[nodiscard]] std::unique_ptr<Engine> restore_engine(BlockIo &io,
                                                     EngineConfig cfg,
                                                     const Snapshot &s);

}  // namespace vsi

#endif  // VSI_SNAPSHOT_HPP
