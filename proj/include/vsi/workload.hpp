#ifndef VSI_WORKLOAD_HPP
#define VSI_WORKLOAD_HPP

#include <cstdint>
#include <string>

#include "vsi/oracle.hpp"

namespace vsi {

enum class KeyDist : std::uint8_t { uniform, zipf, sequential };

struct WorkloadSpec {
  std::uint64_t n = 0;
  KeyDist dist = KeyDist::uniform;
  double zipf_s = 1.1;
  std::uint64_t keyspace = 0;  // 0 means n
  double tombstone_fraction = 0.0;
  std::uint64_t seed = 1;

  [[nodiscard]] std::uint64_t effective_keyspace() const {
    return keyspace ? keyspace : (n ? n : 1);
  }
};

// "uniform", "sequential", "zipf" or "zipf:<s>".
void parse_dist(const std::string &s, WorkloadSpec &spec);
[[nodiscard]] std::string dist_name(const WorkloadSpec &spec);

// Deterministic in the spec. A tombstone deletes the key drawn for that step.
[[nodiscard]] OracleLog generate(const WorkloadSpec &spec);

}  // namespace vsi

#endif  // VSI_WORKLOAD_HPP
