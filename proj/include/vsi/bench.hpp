#ifndef VSI_BENCH_HPP
#define VSI_BENCH_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vsi/config.hpp"
#include "vsi/engine.hpp"
#include "vsi/iomodel.hpp"
#include "vsi/oracle.hpp"
#include "vsi/workload.hpp"

namespace vsi {

struct QueryBatchStats {
  std::uint64_t queries = 0;
  std::uint64_t z_total = 0;
  std::uint64_t blocks = 0;  // query + aux transfers, each query run cold
  std::uint64_t aux_blocks = 0;
  std::uint64_t levels_visited = 0;
  std::uint64_t mismatches = 0;  // answers that differ from the oracle
  // Arrays where the batch examined more elements than the array holds.
  std::uint64_t overscanned_arrays = 0;
  std::uint64_t arrays_examined = 0;
  double avg_blocks = 0;
  double avg_z = 0;
  // avg_blocks / (log2(N_v)^2 + avg_z / B)
  double bound_ratio = 0;
};

struct Checkpoint {
  std::uint64_t n = 0;
  std::uint64_t nv = 0;
  std::uint64_t stored = 0;
  double space_ratio = 0;
  std::uint64_t update_blocks = 0;  // update + merge + subdivide, cumulative
  std::uint64_t aux_blocks = 0;
  double amortized = 0;           // update_blocks / n
  double amortized_with_aux = 0;  // (update_blocks + aux_blocks) / n
  // Amortized cost divided by log2(n) / B.
  double update_c = 0;
  double update_c_with_aux = 0;
  int levels = 0;
  QueryBatchStats query;
  EngineStats events;
  std::uint64_t violations = 0;
};

struct RunOptions {
  WorkloadSpec spec;
  RunConfig config;
  std::uint64_t query_ranges = 64;
  std::uint64_t target_z = 128;
  bool measure_queries = true;
};

struct MetricsReport {
  WorkloadSpec spec;
  RunConfig config;
  std::vector<Checkpoint> rows;

  [[nodiscard]] std::string to_csv() const;
  [[nodiscard]] std::string to_json() const;
};

// Replays the workload (or `log` when given), taking a row at every power of
// two and at the end.
[[nodiscard]] MetricsReport run_bench(const RunOptions &opts,
                                      const OracleLog *log = nullptr);

// Key-disjoint ranges over the keys present at the engine's latest version,
// each query measured from a cold cache. `sweep` must sit at that version.
[[nodiscard]] QueryBatchStats measure_queries(const Engine &eng,
                                              BlockDevice &dev,
                                              const OracleSweep &sweep,
                                              std::uint64_t ranges,
                                              std::uint64_t target_z,
                                              std::uint64_t seed);

struct VerifyOptions {
  WorkloadSpec spec;
  RunConfig config;
  std::uint64_t ranges_per_version = 4;
  // Full structural recheck after every this many updates (0 = only at end).
  std::uint64_t exhaustive_every = 1;
  bool inject_skip_dedup = false;
};

struct VerifyReport {
  bool pass = true;
  std::uint64_t updates = 0;
  std::uint64_t promotion_events = 0;
  std::uint64_t subdivision_events = 0;
  std::uint64_t exhaustive_checks = 0;
  std::uint64_t exhaustive_failures = 0;
  std::uint64_t queries = 0;
  std::uint64_t mismatches = 0;
  std::map<std::string, std::uint64_t> violations;
  std::vector<std::string> diagnostics;

  [[nodiscard]] std::string to_json() const;
  [[nodiscard]] std::string summary() const;
};

// Runs with every invariant check on and compares queries at every version
// against the oracle.
[[nodiscard]] VerifyReport verify(const VerifyOptions &opts,
                                  const OracleLog *log = nullptr);

// Human-readable listing of every level and record.
[[nodiscard]] std::string dump_structure(const Engine &eng);

}  // namespace vsi

#endif  // VSI_BENCH_HPP
