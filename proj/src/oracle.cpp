#include "vsi/oracle.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vsi {

Version OracleLog::put(Key key, const Payload &payload) {
  const Version v{ops_.size() + 1};
  ops_.push_back(Element::put(key, v, payload));
  return v;
}

Version OracleLog::erase(Key key) {
  const Version v{ops_.size() + 1};
  ops_.push_back(Element::erase(key, v));
  return v;
}

Element OracleLog::at(Version v) const {
  if (v.id == 0 || v.id > ops_.size())
    throw std::out_of_range("oracle log has no version " + std::to_string(v.id));
  return ops_[v.id - 1];
}

OracleLog OracleLog::load(std::istream &in) {
  OracleLog log;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string op;
    if (!(ls >> op) || op[0] == '#') continue;
    Key key = 0;
    if (!(ls >> key))
      throw std::runtime_error("log line " + std::to_string(lineno) + ": missing key");
    if (op == "put") {
      std::string hex;
      if (!(ls >> hex))
        throw std::runtime_error("log line " + std::to_string(lineno) +
                                 ": missing payload");
      log.put(key, payload_from_hex(hex));
    } else if (op == "del") {
      log.erase(key);
    } else {
      throw std::runtime_error("log line " + std::to_string(lineno) +
                               ": unknown op '" + op + "'");
    }
  }
  return log;
}

OracleLog OracleLog::load_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open log " + path);
  return load(in);
}

void OracleLog::save(std::ostream &out) const {
  for (const auto &e : ops_) {
    if (e.tombstone) {
      out << "del " << e.key << '\n';
    } else {
      out << "put " << e.key << ' ' << payload_to_hex(e.payload) << '\n';
    }
  }
}

void OracleLog::save_file(const std::string &path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write log " + path);
  save(out);
}

std::vector<Entry> oracle_query(const OracleLog &log, Version v, Key k1,
                                Key k2) {
  if (v > log.latest())
    throw std::out_of_range("oracle_query: version beyond log");
  std::map<Key, const Element *> last;
  for (std::uint64_t i = 0; i < v.id; ++i) {
    const Element &e = log.elements()[i];
    if (e.key >= k1 && e.key <= k2) last[e.key] = &e;
  }
  std::vector<Entry> out;
  for (const auto &[k, e] : last)
    if (!e->tombstone) out.push_back(Entry{k, e->version, e->payload});
  return out;
}

std::uint64_t oracle_nv(const OracleLog &log, Version v) {
  if (v > log.latest()) throw std::out_of_range("oracle_nv: version beyond log");
  std::map<Key, bool> present;
  for (std::uint64_t i = 0; i < v.id; ++i) {
    const Element &e = log.elements()[i];
    present[e.key] = !e.tombstone;
  }
  std::uint64_t n = 0;
  for (const auto &[k, p] : present) n += p ? 1 : 0;
  return n;
}

std::uint64_t oracle_live_check(const VersionedArray &a, Version w) {
  if (!a.interval().contains(w)) return 0;
  const auto elems = a.elements();
  std::uint64_t n = 0;
  for (const auto &e : elems) {
    if (e.version > w) continue;
    bool shadowed = false;
    for (const auto &o : elems) {
      if (o.key == e.key && o.version > e.version && o.version <= w) {
        shadowed = true;
        break;
      }
    }
    if (!shadowed) ++n;
  }
  return n;
}

void OracleSweep::advance_to(Version v) {
  if (v < v_) throw std::logic_error("oracle sweep cannot move backwards");
  if (v > log_.latest()) throw std::out_of_range("oracle sweep past log end");
  for (; v_ < v; v_ = v_.next()) {
    const Element &e = log_.elements()[v_.id];
    if (e.tombstone) {
      state_.erase(e.key);
    } else {
      state_[e.key] = Entry{e.key, e.version, e.payload};
    }
  }
}

std::vector<Entry> OracleSweep::query(Key k1, Key k2) const {
  std::vector<Entry> out;
  for (auto it = state_.lower_bound(k1); it != state_.end() && it->first <= k2;
       ++it)
    out.push_back(it->second);
  return out;
}

std::vector<Key> OracleSweep::keys() const {
  std::vector<Key> out;
  out.reserve(state_.size());
  for (const auto &[k, e] : state_) out.push_back(k);
  return out;
}

}  // namespace vsi
