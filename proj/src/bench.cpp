#include "vsi/bench.hpp"

#include <bit>
#include <cmath>
#include <random>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "vsi/query.hpp"

namespace vsi {

namespace {

bool power_of_two(std::uint64_t n) { return n != 0 && std::has_single_bit(n); }

nlohmann::ordered_json spec_json(const WorkloadSpec &s) {
  return {{"n", s.n},
          {"dist", dist_name(s)},
          {"keyspace", s.effective_keyspace()},
          {"tombstone_fraction", s.tombstone_fraction},
          {"seed", s.seed}};
}

nlohmann::ordered_json config_json(const RunConfig &c) {
  return {{"query_mode", query_mode_name(c.engine.query_mode)},
          {"invariant_checks", c.engine.invariant_checks},
          {"block_size", c.geometry.block_records},
          {"cache_blocks", c.geometry.cache_blocks}};
}

nlohmann::ordered_json events_json(const EngineStats &e) {
  return {{"updates", e.updates},
          {"merges", e.merges},
          {"promotions", e.promotions},
          {"subdivisions", e.subdivisions},
          {"subdivision_pieces", e.subdivision_pieces},
          {"oversized_dense", e.oversized_dense},
          {"capacity_extractions", e.capacity_extractions},
          {"absorbed", e.absorbed},
          {"dummies_created", e.dummies_created},
          {"succ_rewires", e.succ_rewires}};
}

}  // namespace

QueryBatchStats measure_queries(const Engine &eng, BlockDevice &dev,
                                const OracleSweep &sweep, std::uint64_t ranges,
                                std::uint64_t target_z, std::uint64_t seed) {
  QueryBatchStats st;
  const std::vector<Key> keys = sweep.keys();
  const std::uint64_t nv = keys.size();
  if (nv == 0 || ranges == 0) return st;
  ranges = std::min(ranges, nv);
  const std::uint64_t seg = nv / ranges;
  const std::uint64_t z = std::max<std::uint64_t>(1, std::min(target_z, seg));
  std::mt19937_64 rng(seed);
  const Version v = eng.latest();

  std::unordered_map<ArrayId, std::pair<std::uint64_t, std::uint64_t>> touched;
  for (std::uint64_t i = 0; i < ranges; ++i) {
    std::uniform_int_distribution<std::uint64_t> off(0, seg - z);
    const std::uint64_t start = i * seg + off(rng);
    const Key k1 = keys[start];
    const Key k2 = keys[start + z - 1];

    dev.drop_cache();
    const IoReport before = dev.snapshot_report();
    QueryResult r = range_query(eng, v, k1, k2);
    const IoReport after = dev.snapshot_report();
    st.blocks += after.total() - before.total();
    st.aux_blocks += after[Phase::aux].total() - before[Phase::aux].total();
    st.z_total += r.entries.size();
    st.levels_visited += r.levels_visited;
    ++st.queries;
    if (r.entries != sweep.query(k1, k2)) ++st.mismatches;
    for (const auto &s : r.scans) {
      auto &[examined, size] = touched[s.array];
      examined += s.examined;
      size = s.array_size;
    }
  }
  st.arrays_examined = touched.size();
  for (const auto &[id, t] : touched)
    if (t.first > t.second) ++st.overscanned_arrays;
  st.avg_blocks = static_cast<double>(st.blocks) / static_cast<double>(st.queries);
  st.avg_z = static_cast<double>(st.z_total) / static_cast<double>(st.queries);
  const double lg = std::log2(static_cast<double>(std::max<std::uint64_t>(nv, 2)));
  const double b = static_cast<double>(dev.geometry().block_records);
  st.bound_ratio = st.avg_blocks / (lg * lg + st.avg_z / b);
  return st;
}

MetricsReport run_bench(const RunOptions &opts, const OracleLog *log) {
  OracleLog generated;
  if (!log) {
    generated = generate(opts.spec);
    log = &generated;
  }
  MetricsReport rep;
  rep.spec = opts.spec;
  rep.spec.n = log->size();
  rep.config = opts.config;

  BlockDevice dev(opts.config.geometry);
  Engine eng(dev, opts.config.engine);
  OracleSweep sweep(*log);
  const double b = static_cast<double>(opts.config.geometry.block_records);
  std::uint64_t query_aux = 0;

  for (std::uint64_t i = 1; i <= log->size(); ++i) {
    eng.apply(log->elements()[i - 1]);
    if (!power_of_two(i) && i != log->size()) continue;

    dev.flush();
    const IoReport io = dev.snapshot_report();
    sweep.advance_to(Version{i});
    Checkpoint c;
    c.n = i;
    c.nv = sweep.nv();
    c.stored = eng.stored_elements();
    c.space_ratio = static_cast<double>(c.stored) / static_cast<double>(i);
    c.update_blocks = io.update_cost(false);
    // Index lookups made by measured queries are not update work.
    c.aux_blocks = io[Phase::aux].total() - query_aux;
    c.amortized = static_cast<double>(c.update_blocks) / static_cast<double>(i);
    c.amortized_with_aux =
        static_cast<double>(c.update_blocks + c.aux_blocks) / static_cast<double>(i);
    const double scale = std::log2(static_cast<double>(std::max<std::uint64_t>(i, 2))) / b;
    c.update_c = c.amortized / scale;
    c.update_c_with_aux = c.amortized_with_aux / scale;
    c.levels = eng.level_count();
    c.events = eng.stats();
    c.violations = eng.violations().total();
    if (opts.measure_queries) {
      c.query = measure_queries(eng, dev, sweep, opts.query_ranges, opts.target_z,
                                opts.spec.seed * 1000003 + i);
      query_aux += c.query.aux_blocks;
    }
    rep.rows.push_back(c);
  }
  return rep;
}

std::string MetricsReport::to_csv() const {
  std::ostringstream os;
  os << "n,nv,stored,space_ratio,update_blocks,aux_blocks,amortized,"
        "amortized_with_aux,update_c,update_c_with_aux,levels,queries,avg_z,"
        "avg_query_blocks,query_bound_ratio,levels_visited,overscanned_arrays,"
        "query_mismatches,merges,promotions,subdivisions,oversized_dense,"
        "violations\n";
  for (const auto &c : rows) {
    os << c.n << ',' << c.nv << ',' << c.stored << ',' << c.space_ratio << ','
       << c.update_blocks << ',' << c.aux_blocks << ',' << c.amortized << ','
       << c.amortized_with_aux << ',' << c.update_c << ','
       << c.update_c_with_aux << ',' << c.levels << ',' << c.query.queries
       << ',' << c.query.avg_z << ',' << c.query.avg_blocks << ','
       << c.query.bound_ratio << ',' << c.query.levels_visited << ','
       << c.query.overscanned_arrays << ',' << c.query.mismatches << ','
       << c.events.merges << ',' << c.events.promotions << ','
       << c.events.subdivisions << ',' << c.events.oversized_dense << ','
       << c.violations << '\n';
  }
  return os.str();
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["workload"] = spec_json(spec);
  j["config"] = config_json(config);
  j["rows"] = nlohmann::json::array();
  for (const auto &c : rows) {
    nlohmann::ordered_json r;
    r["n"] = c.n;
    r["nv"] = c.nv;
    r["stored"] = c.stored;
    r["space_ratio"] = c.space_ratio;
    r["update_blocks"] = c.update_blocks;
    r["aux_blocks"] = c.aux_blocks;
    r["amortized"] = c.amortized;
    r["amortized_with_aux"] = c.amortized_with_aux;
    r["update_c"] = c.update_c;
    r["update_c_with_aux"] = c.update_c_with_aux;
    r["levels"] = c.levels;
    r["query"] = {{"queries", c.query.queries},
                  {"z_total", c.query.z_total},
                  {"avg_z", c.query.avg_z},
                  {"blocks", c.query.blocks},
                  {"avg_blocks", c.query.avg_blocks},
                  {"bound_ratio", c.query.bound_ratio},
                  {"levels_visited", c.query.levels_visited},
                  {"arrays_examined", c.query.arrays_examined},
                  {"overscanned_arrays", c.query.overscanned_arrays},
                  {"mismatches", c.query.mismatches}};
    r["events"] = events_json(c.events);
    r["violations"] = c.violations;
    j["rows"].push_back(r);
  }
  return j.dump(2);
}

VerifyReport verify(const VerifyOptions &opts, const OracleLog *log) {
  OracleLog generated;
  if (!log) {
    generated = generate(opts.spec);
    log = &generated;
  }
  VerifyReport rep;
  EngineConfig cfg = opts.config.engine;
  cfg.invariant_checks = true;
  cfg.abort_on_violation = false;
  if (opts.inject_skip_dedup) cfg.merge.dedup = false;

  BlockDevice dev(opts.config.geometry);
  Engine eng(dev, cfg);
  eng.set_event_sink([&rep](const RestructureEvent &ev) {
    if (std::holds_alternative<PromotionEvent>(ev)) {
      ++rep.promotion_events;
    } else {
      ++rep.subdivision_events;
    }
  });
  auto note = [&rep](const std::string &d) {
    if (rep.diagnostics.size() < 20) rep.diagnostics.push_back(d);
  };
  auto exhaustive = [&] {
    ++rep.exhaustive_checks;
    auto problems = eng.check_all_invariants();
    if (!problems.empty()) {
      ++rep.exhaustive_failures;
      for (const auto &p : problems) note("after update " + std::to_string(rep.updates) + ": " + p);
    }
  };

  try {
    for (const auto &e : log->elements()) {
      eng.apply(e);
      ++rep.updates;
      if (opts.exhaustive_every && rep.updates % opts.exhaustive_every == 0)
        exhaustive();
    }
    if (opts.exhaustive_every == 0 || rep.updates % opts.exhaustive_every != 0)
      exhaustive();

    OracleSweep sweep(*log);
    std::mt19937_64 rng(opts.spec.seed ^ 0x9e3779b97f4a7c15ULL);
    const std::uint64_t keys = std::max<std::uint64_t>(
        opts.spec.effective_keyspace(), 1);
    std::uniform_int_distribution<Key> pick(0, keys - 1);
    std::uniform_int_distribution<Key> width(0, std::max<Key>(keys / 8, 1));
    for (std::uint64_t v = 1; v <= log->size(); ++v) {
      sweep.advance_to(Version{v});
      for (std::uint64_t q = 0; q < opts.ranges_per_version; ++q) {
        const Key k1 = pick(rng);
        const Key k2 = k1 + width(rng);
        ++rep.queries;
        const auto got = range_query(eng, Version{v}, k1, k2).entries;
        if (got != sweep.query(k1, k2)) {
          ++rep.mismatches;
          note("query mismatch at version " + std::to_string(v) + " range [" +
               std::to_string(k1) + "," + std::to_string(k2) + "]");
        }
      }
    }
  } catch (const std::exception &ex) {
    note(std::string("aborted: ") + ex.what());
    rep.pass = false;
  }

  rep.violations = eng.violations().counts();
  std::vector<std::string> found = std::move(rep.diagnostics);
  rep.diagnostics = eng.violations().samples();
  if (rep.diagnostics.size() > 10) rep.diagnostics.resize(10);
  for (auto &d : found) note(std::move(d));
  if (eng.violations().total() != 0 || rep.exhaustive_failures != 0 ||
      rep.mismatches != 0)
    rep.pass = false;
  return rep;
}

std::string VerifyReport::to_json() const {
  nlohmann::ordered_json j;
  j["pass"] = pass;
  j["updates"] = updates;
  j["promotion_events"] = promotion_events;
  j["subdivision_events"] = subdivision_events;
  j["exhaustive_checks"] = exhaustive_checks;
  j["exhaustive_failures"] = exhaustive_failures;
  j["queries"] = queries;
  j["mismatches"] = mismatches;
  j["violations"] = violations;
  j["diagnostics"] = diagnostics;
  return j.dump(2);
}

std::string VerifyReport::summary() const {
  std::ostringstream os;
  os << (pass ? "PASS" : "FAIL") << ": " << updates << " updates, "
     << promotion_events << " promotions and " << subdivision_events
     << " subdivisions checked, " << exhaustive_checks << " full sweeps ("
     << exhaustive_failures << " failed), " << queries << " queries ("
     << mismatches << " mismatches)";
  std::uint64_t total = 0;
  for (const auto &[k, n] : violations) total += n;
  os << ", " << total << " violations";
  for (const auto &[k, n] : violations) os << "\n  " << k << ": " << n;
  for (const auto &d : diagnostics) os << "\n  " << d;
  return os.str();
}

std::string dump_structure(const Engine &eng) {
  auto lock = eng.read_lock();
  std::ostringstream os;
  os << "latest version " << eng.latest().id << ", " << eng.level_count()
     << " levels, " << eng.stored_elements() << " stored elements\n";
  for (int l = 0; l < eng.level_count(); ++l) {
    const auto ids = eng.level_records(l);
    os << "level " << l << " (cap " << level_capacity(l) << "): " << ids.size()
       << " records\n";
    for (ArrayId id : ids) {
      const ArrayRecord &r = eng.record(id);
      os << "  #" << id << ' ' << r.interval;
      if (r.status == RecordStatus::dummy) {
        os << " dummy";
      } else {
        const ArrayFacts f = facts_of(*r.array);
        os << " size " << f.size << " lead " << f.lead << " min_live "
           << f.min_live;
      }
      if (r.succ) os << " succ #" << *r.succ;
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace vsi
