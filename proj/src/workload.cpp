#include "vsi/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace vsi {

void parse_dist(const std::string &s, WorkloadSpec &spec) {
  if (s == "uniform") {
    spec.dist = KeyDist::uniform;
  } else if (s == "sequential") {
    spec.dist = KeyDist::sequential;
  } else if (s == "zipf") {
    spec.dist = KeyDist::zipf;
  } else if (s.rfind("zipf:", 0) == 0) {
    spec.dist = KeyDist::zipf;
    try {
      spec.zipf_s = std::stod(s.substr(5));
    } catch (const std::exception &) {
      throw std::invalid_argument("bad zipf exponent in '" + s + "'");
    }
    if (!(spec.zipf_s > 0)) throw std::invalid_argument("zipf exponent must be > 0");
  } else {
    throw std::invalid_argument("unknown key distribution '" + s + "'");
  }
}

std::string dist_name(const WorkloadSpec &spec) {
  switch (spec.dist) {
    case KeyDist::uniform: return "uniform";
    case KeyDist::sequential: return "sequential";
    case KeyDist::zipf: {
      std::ostringstream os;
      os << "zipf:" << spec.zipf_s;
      return os.str();
    }
  }
  return "?";
}

OracleLog generate(const WorkloadSpec &spec) {
  if (spec.tombstone_fraction < 0 || spec.tombstone_fraction > 1)
    throw std::invalid_argument("tombstone fraction must be in [0, 1]");
  std::mt19937_64 rng(spec.seed);
  const std::uint64_t keys = spec.effective_keyspace();

  // Zipf ranks are scattered over the key space so hot keys do not cluster.
  std::vector<Key> rank_to_key;
  std::discrete_distribution<std::uint64_t> zipf;
  if (spec.dist == KeyDist::zipf) {
    rank_to_key.resize(keys);
    std::iota(rank_to_key.begin(), rank_to_key.end(), Key{0});
    std::shuffle(rank_to_key.begin(), rank_to_key.end(), rng);
    std::vector<double> w(keys);
    for (std::uint64_t r = 0; r < keys; ++r)
      w[r] = 1.0 / std::pow(static_cast<double>(r + 1), spec.zipf_s);
    zipf = std::discrete_distribution<std::uint64_t>(w.begin(), w.end());
  }
  std::uniform_int_distribution<Key> uniform(0, keys - 1);
  std::bernoulli_distribution tomb(spec.tombstone_fraction);

  OracleLog log;
  for (std::uint64_t i = 0; i < spec.n; ++i) {
    Key k = 0;
    switch (spec.dist) {
      case KeyDist::uniform: k = uniform(rng); break;
      case KeyDist::sequential: k = i % keys; break;
      case KeyDist::zipf: k = rank_to_key[zipf(rng)]; break;
    }
    if (tomb(rng)) {
      log.erase(k);
    } else {
      log.put(k, payload_from_u64(i + 1, rng()));
    }
  }
  return log;
}

}  // namespace vsi
