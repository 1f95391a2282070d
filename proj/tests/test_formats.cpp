#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "support.hpp"
#include "vsi/bench.hpp"
#include "vsi/config.hpp"
#include "vsi/query.hpp"
#include "vsi/snapshot.hpp"
#include "vsi/workload.hpp"

using namespace vsi;
using namespace vsi::testing;

TEST(Config, ParsesKeysCommentsAndWhitespace) {
  std::istringstream in(
      "# run settings\n"
      "query_mode = succ\n"
      "  invariant_checks=true   # on for this run\n"
      "abort_on_violation = false\n"
      "block_size = 16\n"
      "cache_blocks = 32\n");
  const RunConfig c = parse_config(in);
  EXPECT_EQ(c.engine.query_mode, QueryMode::succ_pointers);
  EXPECT_TRUE(c.engine.invariant_checks);
  EXPECT_FALSE(c.engine.abort_on_violation);
  EXPECT_EQ(c.geometry.block_records, 16u);
  EXPECT_EQ(c.geometry.cache_blocks, 32u);
}

TEST(Config, RoundTripsThroughFormat) {
  RunConfig c;
  c.engine.query_mode = QueryMode::succ_pointers;
  c.geometry = {256, 8};
  std::istringstream in(format_config(c));
  const RunConfig back = parse_config(in);
  EXPECT_EQ(back.engine.query_mode, c.engine.query_mode);
  EXPECT_EQ(back.geometry.block_records, 256u);
  EXPECT_EQ(back.geometry.cache_blocks, 8u);
}

TEST(Config, ErrorsNameTheLine) {
  for (const char *text : {"block_size = 0x\n", "\ncolour = blue\n", "query_mode\n",
                           "query_mode = fast\n"}) {
    std::istringstream in(text);
    try {
      (void)parse_config(in);
      FAIL() << "accepted: " << text;
    } catch (const std::runtime_error &e) {
      EXPECT_NE(std::string(e.what()).find("line"), std::string::npos) << e.what();
    }
  }
}

TEST(Snapshot, RoundTripPreservesStructureAndAnswers) {
  for (QueryMode mode : {QueryMode::aux_index, QueryMode::succ_pointers}) {
    const OracleLog log = random_log(1200, 200, 0.1, 6);
    BlockDevice dev;
    Engine eng(dev, {mode});
    for (const auto &e : log.elements()) eng.apply(e);

    std::stringstream buf;
    write_snapshot(buf, capture(eng));
    const Snapshot back = read_snapshot(buf);
    EXPECT_EQ(back.latest, eng.latest());
    EXPECT_EQ(back.mode, mode);

    BlockDevice dev2;
    auto copy = restore_engine(dev2, {}, back);
    EXPECT_EQ(copy->config().query_mode, mode);
    EXPECT_TRUE(copy->check_all_invariants().empty());
    const auto a = eng.save_records();
    const auto b = copy->save_records();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].interval, b[i].interval);
      EXPECT_EQ(a[i].status, b[i].status);
      EXPECT_EQ(a[i].elems, b[i].elems);
      EXPECT_EQ(a[i].succ, b[i].succ);
    }
    for (std::uint64_t v = 0; v <= log.size(); v += 13)
      ASSERT_EQ(range_query(eng, Version{v}, 0, 250).entries,
                range_query(*copy, Version{v}, 0, 250).entries);
  }
}

TEST(Snapshot, RejectsDamage) {
  BlockDevice dev;
  Engine eng(dev);
  for (Key k = 0; k < 50; ++k) eng.update(k, payload_from_u64(k));
  std::stringstream buf;
  write_snapshot(buf, capture(eng));
  const std::string good = buf.str();

  std::string magic = good;
  magic[0] = 'X';
  std::istringstream m(magic);
  EXPECT_THROW((void)read_snapshot(m), std::runtime_error);

  std::istringstream cut(good.substr(0, good.size() - 5));
  EXPECT_THROW((void)read_snapshot(cut), std::runtime_error);

  std::string width = good;
  width[12] = 41;
  std::istringstream w(width);
  EXPECT_THROW((void)read_snapshot(w), std::runtime_error);
}

TEST(Workload, DeterministicInTheSpec) {
  WorkloadSpec s;
  s.n = 500;
  parse_dist("zipf:1.2", s);
  s.tombstone_fraction = 0.1;
  s.seed = 42;
  EXPECT_EQ(generate(s).elements(), generate(s).elements());
  EXPECT_EQ(dist_name(s), "zipf:1.2");
  s.seed = 43;
  WorkloadSpec t = s;
  t.seed = 42;
  EXPECT_NE(generate(s).elements(), generate(t).elements());
  EXPECT_THROW(parse_dist("pareto", s), std::invalid_argument);
  EXPECT_THROW(parse_dist("zipf:-1", s), std::invalid_argument);
}

TEST(Report, RunIsReproducibleAndWellFormed) {
  RunOptions opts;
  opts.spec.n = 1 << 10;
  opts.spec.tombstone_fraction = 0.1;
  opts.query_ranges = 16;
  const MetricsReport a = run_bench(opts);
  const MetricsReport b = run_bench(opts);
  EXPECT_EQ(a.to_csv(), b.to_csv());
  EXPECT_EQ(a.to_json(), b.to_json());

  const auto j = nlohmann::json::parse(a.to_json());
  ASSERT_TRUE(j.contains("rows"));
  EXPECT_EQ(j["rows"].back()["n"], 1024);
  EXPECT_EQ(j["rows"].back()["violations"], 0);
  EXPECT_EQ(j["rows"].back()["query"]["mismatches"], 0);

  std::istringstream csv(a.to_csv());
  std::string header, row;
  std::getline(csv, header);
  const auto cols = std::count(header.begin(), header.end(), ',');
  while (std::getline(csv, row)) EXPECT_EQ(std::count(row.begin(), row.end(), ','), cols);
}

TEST(Report, EmptyWorkloadGivesEmptyReport) {
  RunOptions opts;
  opts.spec.n = 0;
  EXPECT_TRUE(run_bench(opts).rows.empty());
}

TEST(Verify, CleanBuildPassesAndFaultIsCaught) {
  VerifyOptions opts;
  opts.spec.n = 600;
  opts.spec.keyspace = 80;
  opts.spec.tombstone_fraction = 0.1;
  opts.exhaustive_every = 50;
  const VerifyReport ok = verify(opts);
  EXPECT_TRUE(ok.pass) << ok.summary();
  EXPECT_EQ(ok.mismatches, 0u);

  opts.inject_skip_dedup = true;
  const VerifyReport bad = verify(opts);
  EXPECT_FALSE(bad.pass);
  EXPECT_FALSE(bad.diagnostics.empty());

  VerifyOptions empty;
  empty.spec.n = 0;
  EXPECT_TRUE(verify(empty).pass);
}
