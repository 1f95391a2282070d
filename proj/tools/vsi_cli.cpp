// vsi: run, verify, query and inspect the versioned streaming index.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vsi/bench.hpp"
#include "vsi/config.hpp"
#include "vsi/query.hpp"
#include "vsi/snapshot.hpp"
#include "vsi/workload.hpp"

namespace {

struct SpecFlags {
  std::uint64_t n = 4096;
  std::string dist = "uniform";
  std::uint64_t keyspace = 0;
  double tombstones = 0.0;
  std::uint64_t seed = 1;
  std::string log_in;
};

struct ConfigFlags {
  std::string path;
  std::string query_mode;
  std::uint64_t block_size = 0;
  std::uint64_t cache_blocks = 0;
};

void add_spec_flags(CLI::App *cmd, SpecFlags &f) {
  cmd->add_option("-n,--updates", f.n, "Number of updates");
  cmd->add_option("--dist", f.dist, "uniform | sequential | zipf[:s]");
  cmd->add_option("--keyspace", f.keyspace, "Distinct keys (default: n)");
  cmd->add_option("--tombstones", f.tombstones, "Fraction of deletes")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--log-in", f.log_in, "Replay this update log instead");
}

void add_config_flags(CLI::App *cmd, ConfigFlags &f) {
  cmd->add_option("-c,--config", f.path, "key=value config file");
  cmd->add_option("--query-mode", f.query_mode, "aux | succ");
  cmd->add_option("--block-size", f.block_size, "Records per block");
  cmd->add_option("--cache-blocks", f.cache_blocks, "Cache size in blocks");
}

vsi::WorkloadSpec to_spec(const SpecFlags &f) {
  vsi::WorkloadSpec s;
  s.n = f.n;
  vsi::parse_dist(f.dist, s);
  s.keyspace = f.keyspace;
  s.tombstone_fraction = f.tombstones;
  s.seed = f.seed;
  return s;
}

vsi::RunConfig to_config(const ConfigFlags &f) {
  vsi::RunConfig c = f.path.empty() ? vsi::RunConfig{} : vsi::load_config(f.path);
  if (!f.query_mode.empty()) c.engine.query_mode = vsi::parse_query_mode(f.query_mode);
  if (f.block_size) c.geometry.block_records = f.block_size;
  if (f.cache_blocks) c.geometry.cache_blocks = f.cache_blocks;
  return c;
}

void write_file(const std::string &path, const std::string &text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Partially persistent streaming index: benchmark and verification"};
  app.require_subcommand(1);

  SpecFlags run_spec;
  ConfigFlags run_cfg;
  std::string csv_out, json_out, snap_out, log_out;
  std::uint64_t ranges = 64, target_z = 128;
  bool no_queries = false;
  auto *run = app.add_subcommand("run", "Replay a workload and report metrics");
  add_spec_flags(run, run_spec);
  add_config_flags(run, run_cfg);
  run->add_option("--csv", csv_out, "Write checkpoint rows as CSV");
  run->add_option("--json", json_out, "Write the report as JSON");
  run->add_option("--snapshot", snap_out, "Save the final structure");
  run->add_option("--log-out", log_out, "Save the generated update log");
  run->add_option("--ranges", ranges, "Queries per checkpoint");
  run->add_option("--target-z", target_z, "Keys per query range");
  run->add_flag("--no-queries", no_queries, "Skip query measurement");

  SpecFlags ver_spec;
  ConfigFlags ver_cfg;
  std::string ver_json, fault;
  std::uint64_t per_version = 4, every = 1;
  auto *ver = app.add_subcommand("verify", "Check invariants and oracle agreement");
  add_spec_flags(ver, ver_spec);
  add_config_flags(ver, ver_cfg);
  ver->add_option("--json", ver_json, "Write the verification report as JSON");
  ver->add_option("--ranges-per-version", per_version, "Oracle queries per version");
  ver->add_option("--sweep-every", every,
                  "Full structural recheck every k updates (0: at the end)");
  ver->add_option("--inject-fault", fault, "Deliberate bug: skip-dedup")
      ->check(CLI::IsMember({"skip-dedup"}));

  std::string q_snap;
  std::uint64_t q_version = 0;
  vsi::Key k1 = 0, k2 = 0;
  bool q_stats = false;
  auto *qry = app.add_subcommand("query", "Range query against a snapshot");
  qry->add_option("--snapshot", q_snap, "Snapshot file")->required();
  qry->add_option("-v,--version", q_version, "Version (default: latest)");
  qry->add_option("--k1", k1, "Low key")->required();
  qry->add_option("--k2", k2, "High key")->required();
  qry->add_flag("--stats", q_stats, "Print per-level scan statistics as JSON");

  std::string d_snap;
  auto *dump = app.add_subcommand("dump", "Print the level structure of a snapshot");
  dump->add_option("--snapshot", d_snap, "Snapshot file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      vsi::RunOptions opts;
      opts.spec = to_spec(run_spec);
      opts.config = to_config(run_cfg);
      opts.query_ranges = ranges;
      opts.target_z = target_z;
      opts.measure_queries = !no_queries;
      std::optional<vsi::OracleLog> log;
      if (!run_spec.log_in.empty()) log = vsi::OracleLog::load_file(run_spec.log_in);
      else log = vsi::generate(opts.spec);
      if (!log_out.empty()) log->save_file(log_out);

      const vsi::MetricsReport rep = vsi::run_bench(opts, &*log);
      if (!csv_out.empty()) write_file(csv_out, rep.to_csv());
      if (!json_out.empty()) write_file(json_out, rep.to_json());
      if (csv_out.empty() && json_out.empty()) std::cout << rep.to_csv();
      if (!snap_out.empty()) {
        vsi::BlockDevice dev(opts.config.geometry);
        vsi::Engine eng(dev, opts.config.engine);
        for (const auto &e : log->elements()) eng.apply(e);
        vsi::save_snapshot(snap_out, vsi::capture(eng));
      }
      std::uint64_t bad = 0;
      for (const auto &row : rep.rows) bad += row.violations + row.query.mismatches;
      return bad == 0 ? 0 : 1;
    }

    if (*ver) {
      vsi::VerifyOptions opts;
      opts.spec = to_spec(ver_spec);
      opts.config = to_config(ver_cfg);
      opts.ranges_per_version = per_version;
      opts.exhaustive_every = every;
      opts.inject_skip_dedup = fault == "skip-dedup";
      std::optional<vsi::OracleLog> log;
      if (!ver_spec.log_in.empty()) log = vsi::OracleLog::load_file(ver_spec.log_in);
      const vsi::VerifyReport rep = vsi::verify(opts, log ? &*log : nullptr);
      std::cout << rep.summary() << '\n';
      if (!ver_json.empty()) write_file(ver_json, rep.to_json());
      return rep.pass ? 0 : 1;
    }

    if (*qry) {
      const vsi::Snapshot snap = vsi::load_snapshot(q_snap);
      vsi::BlockDevice dev;
      auto eng = vsi::restore_engine(dev, {}, snap);
      const vsi::Version v = q_version ? vsi::Version{q_version} : eng->latest();
      const vsi::QueryResult res = vsi::range_query(*eng, v, k1, k2);
      for (const auto &e : res.entries)
        std::cout << e.key << ' ' << e.version.id << ' '
                  << vsi::payload_to_hex(e.payload) << '\n';
      if (q_stats) std::cout << res.stats_json() << '\n';
      return 0;
    }

    if (*dump) {
      const vsi::Snapshot snap = vsi::load_snapshot(d_snap);
      vsi::BlockDevice dev;
      auto eng = vsi::restore_engine(dev, {}, snap);
      std::cout << vsi::dump_structure(*eng);
      return 0;
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
