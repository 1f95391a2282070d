#ifndef VSI_QUERY_HPP
#define VSI_QUERY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vsi/engine.hpp"

namespace vsi {

// What one level contributed to a query: f_v(A, sigma) for the array scanned
// there.
struct LevelScan {
  int level = 0;
  ArrayId array = 0;
  std::uint64_t array_size = 0;
  std::uint64_t examined = 0;  // elements with keys inside the range
  std::uint64_t probes = 0;    // binary-search steps to find k1
  std::uint64_t transfers = 0; // block transfers on the array's extent
};

struct QueryResult {
  std::vector<Entry> entries;  // keys strictly increasing, no tombstones
  std::vector<LevelScan> scans;
  std::uint64_t levels_visited = 0;
  std::uint64_t succ_hops = 0;  // sideways steps along a level (succ mode)

  [[nodiscard]] std::string stats_json() const;
};

// Contents of D_v restricted to [k1, k2]. Throws std::out_of_range when v is
// past the latest version and std::invalid_argument when k1 > k2.
[[nodiscard]] QueryResult range_query(const Engine &eng, Version v, Key k1,
                                      Key k2);

[[nodiscard]] std::optional<Entry> point_query(const Engine &eng, Version v,
                                               Key k);

}  // namespace vsi

#endif  // VSI_QUERY_HPP
