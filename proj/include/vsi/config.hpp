#ifndef VSI_CONFIG_HPP
#define VSI_CONFIG_HPP

#include <iosfwd>
#include <string>

#include "vsi/engine.hpp"
#include "vsi/iomodel.hpp"

namespace vsi {

struct RunConfig {
  EngineConfig engine;
  DeviceGeometry geometry;
};

// Plain key=value lines; '#' starts a comment. Recognized keys:
//   query_mode = aux | succ
//   invariant_checks = true | false
//   abort_on_violation = true | false
//   block_size = <records per block>
//   cache_blocks = <blocks>
// Unknown keys and malformed values throw std::runtime_error naming the line.
[[nodiscard]] RunConfig parse_config(std::istream &in);
[[nodiscard]] RunConfig load_config(const std::string &path);
[[nodiscard]] std::string format_config(const RunConfig &cfg);

[[nodiscard]] QueryMode parse_query_mode(const std::string &s);
[[nodiscard]] std::string query_mode_name(QueryMode m);

}  // namespace vsi

#endif  // VSI_CONFIG_HPP
