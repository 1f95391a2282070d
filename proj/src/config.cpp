#include "vsi/config.hpp"

#include <boost/algorithm/string/trim.hpp>
#include <boost/lexical_cast.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vsi {

namespace {

bool parse_bool(const std::string &v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

std::uint64_t parse_positive(const std::string &v) {
  if (!v.empty() && v[0] == '-') throw std::invalid_argument("must be positive");
  const auto n = boost::lexical_cast<std::uint64_t>(v);
  if (n == 0) throw std::invalid_argument("must be positive");
  return n;
}

}  // namespace

QueryMode parse_query_mode(const std::string &s) {
  if (s == "aux" || s == "aux_index") return QueryMode::aux_index;
  if (s == "succ" || s == "succ_pointers") return QueryMode::succ_pointers;
  throw std::invalid_argument("unknown query mode '" + s + "'");
}

std::string query_mode_name(QueryMode m) {
  return m == QueryMode::aux_index ? "aux" : "succ";
}

RunConfig parse_config(std::istream &in) {
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    boost::algorithm::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = "config line " + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw std::runtime_error(where + "expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    boost::algorithm::trim(key);
    boost::algorithm::trim(value);
    try {
      if (key == "query_mode") {
        cfg.engine.query_mode = parse_query_mode(value);
      } else if (key == "invariant_checks") {
        cfg.engine.invariant_checks = parse_bool(value);
      } else if (key == "abort_on_violation") {
        cfg.engine.abort_on_violation = parse_bool(value);
      } else if (key == "block_size") {
        cfg.geometry.block_records = parse_positive(value);
      } else if (key == "cache_blocks") {
        cfg.geometry.cache_blocks = parse_positive(value);
      } else {
        throw std::invalid_argument("unknown key '" + key + "'");
      }
    } catch (const boost::bad_lexical_cast &) {
      throw std::runtime_error(where + key + ": not a number: '" + value + "'");
    } catch (const std::invalid_argument &e) {
      throw std::runtime_error(where + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return parse_config(in);
}

std::string format_config(const RunConfig &cfg) {
  std::ostringstream os;
  os << "query_mode = " << query_mode_name(cfg.engine.query_mode) << '\n'
     << "invariant_checks = " << (cfg.engine.invariant_checks ? "true" : "false")
     << '\n'
     << "abort_on_violation = "
     << (cfg.engine.abort_on_violation ? "true" : "false") << '\n'
     << "block_size = " << cfg.geometry.block_records << '\n'
     << "cache_blocks = " << cfg.geometry.cache_blocks << '\n';
  return os.str();
}

}  // namespace vsi
