#ifndef VSI_ORACLE_HPP
#define VSI_ORACLE_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "vsi/types.hpp"
#include "vsi/varray.hpp"

namespace vsi {

// The raw update sequence. The i-th entry (1-based) is version i.
class OracleLog {
 public:
  Version put(Key key, const Payload &payload);
  Version erase(Key key);

  [[nodiscard]] std::size_t size() const { return ops_.size(); }
  [[nodiscard]] Version latest() const { return Version{ops_.size()}; }
  // The element written by version v (1 <= v <= latest).
  [[nodiscard]] Element at(Version v) const;
  [[nodiscard]] const std::vector<Element> &elements() const { return ops_; }

  // Text form, one op per line: "put <key> <hex payload>" or "del <key>".
  // Blank lines and lines starting with '#' are skipped.
  static OracleLog load(std::istream &in);
  static OracleLog load_file(const std::string &path);
  void save(std::ostream &out) const;
  void save_file(const std::string &path) const;

 private:
  std::vector<Element> ops_;
};

// D_v restricted to [k1, k2], by replaying the log from the start.
// Throws std::out_of_range when v > log.latest().
[[nodiscard]] std::vector<Entry> oracle_query(const OracleLog &log, Version v,
                                              Key k1, Key k2);

// N_v: keys present (not deleted) at v.
[[nodiscard]] std::uint64_t oracle_nv(const OracleLog &log, Version v);

// live(A, w) by the quadratic definition: e counts when no other element of
// the same key has a version in (e.version, w]. Returns 0 outside W.
[[nodiscard]] std::uint64_t oracle_live_check(const VersionedArray &a,
                                              Version w);

// Walks the log forward once, keeping D_v materialized. Used where every
// version has to be checked and full replay per query would be too slow.
class OracleSweep {
 public:
  explicit OracleSweep(const OracleLog &log) : log_(log) {}

  // Moves forward to v. Moving backwards throws std::logic_error.
  void advance_to(Version v);
  [[nodiscard]] Version at() const { return v_; }
  [[nodiscard]] std::vector<Entry> query(Key k1, Key k2) const;
  [[nodiscard]] std::uint64_t nv() const { return state_.size(); }
  // Present keys in order.
  [[nodiscard]] std::vector<Key> keys() const;

 private:
  const OracleLog &log_;
  Version v_{0};
  std::map<Key, Entry> state_;
};

}  // namespace vsi

#endif  // VSI_ORACLE_HPP
