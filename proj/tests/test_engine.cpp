#include <random>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "support.hpp"
#include "vsi/engine.hpp"
#include "vsi/iomodel.hpp"
#include "vsi/query.hpp"

using namespace vsi;
using namespace vsi::testing;

namespace {

EngineConfig checked(QueryMode mode = QueryMode::aux_index) {
  EngineConfig c;
  c.query_mode = mode;
  c.invariant_checks = true;
  c.abort_on_violation = true;
  return c;
}

void put(Engine &eng, Key k) {
  eng.update(k, payload_from_u64(k, eng.latest().id + 1));
}

std::vector<Element> elems_of(const ArrayRecord &r) {
  return {r.array->elements().begin(), r.array->elements().end()};
}

std::string param_name(
    const ::testing::TestParamInfo<std::tuple<std::uint64_t, QueryMode>> &info) {
  return (std::get<1>(info.param) == QueryMode::aux_index ? "aux_seed" : "succ_seed") +
         std::to_string(std::get<0>(info.param));
}

}  // namespace

TEST(EngineUpdate, FirstUpdateIsASingletonAtLevelZero) {
  BlockDevice dev;
  Engine eng(dev, checked());
  EXPECT_EQ(eng.update(kA, payload_from_u64(1)), Version{1});
  const auto ids = eng.live_arrays(0);
  ASSERT_EQ(ids.size(), 1u);
  EXPECT_EQ(eng.record(ids[0]).interval, iv(1, 1));
  EXPECT_EQ(eng.record(ids[0]).array->size(), 1u);
}

TEST(EngineUpdate, TwoDistinctKeysMergeWithoutOverflow) {
  BlockDevice dev;
  Engine eng(dev, checked());
  put(eng, kA);
  EXPECT_EQ(eng.update(kB, payload_from_u64(kB, 2)), Version{2});
  const auto ids = eng.live_arrays(0);
  ASSERT_EQ(ids.size(), 1u);
  EXPECT_EQ(eng.record(ids[0]).interval, iv(1, 2));
  EXPECT_EQ(eng.record(ids[0]).array->size(), 2u);
  EXPECT_EQ(eng.stats().promotions, 0u);
}

TEST(EngineUpdate, ThirdUpdateOverflowsAndPromotes) {
  BlockDevice dev;
  Engine eng(dev, checked());
  put(eng, kA);
  put(eng, kB);
  put(eng, kA);
  EXPECT_TRUE(eng.live_arrays(0).empty());
  const auto up = eng.live_arrays(1);
  ASSERT_EQ(up.size(), 1u);
  EXPECT_EQ(eng.record(up[0]).interval, iv(1, 3));
  EXPECT_EQ(elems_of(eng.record(up[0])),
            (std::vector<Element>{el(kA, 3), el(kA, 1), el(kB, 2)}));
  EXPECT_EQ(eng.stats().promotions, 1u);
  EXPECT_EQ(eng.highest_level(Version{2}), 1);
}

TEST(EngineFind, PredecessorMustContainTheVersion) {
  BlockDevice dev;
  std::vector<SavedRecord> recs(2);
  recs[0].interval = iv(1, 3);
  recs[0].elems = {el(kA, 1)};
  recs[1].interval = iv(4, 9);
  recs[1].elems = {el(kA, 1), el(kB, 4)};
  auto eng = Engine::restore(dev, {}, Version{10}, recs);
  const auto hit = eng->find_array(0, Version{5});
  ASSERT_TRUE(hit);
  EXPECT_EQ(eng->record(*hit).interval, iv(4, 9));
  EXPECT_FALSE(eng->find_array(0, Version{10}));
  EXPECT_FALSE(eng->find_array(1, Version{5}));

  BlockDevice dev2;
  Engine empty(dev2);
  EXPECT_FALSE(empty.find_array(0, Version{1}));
}

TEST(EngineSucc, LoneArrayHasNoSuccessor) {
  BlockDevice dev;
  Engine eng(dev, checked(QueryMode::succ_pointers));
  put(eng, kA);
  const auto ids = eng.live_arrays(0);
  ASSERT_EQ(ids.size(), 1u);
  EXPECT_FALSE(eng.succ_of(ids[0]));
}

TEST(EngineSucc, LevelZeroPointsAtThePromotedArray) {
  BlockDevice dev;
  Engine eng(dev, checked(QueryMode::succ_pointers));
  put(eng, kA);
  put(eng, kB);
  put(eng, kA);
  put(eng, kC);
  const auto up = eng.live_arrays(1);
  ASSERT_EQ(up.size(), 1u);
  const auto low = eng.live_arrays(0);
  ASSERT_EQ(low.size(), 1u);
  EXPECT_EQ(eng.record(low[0]).interval, iv(4, 4));
  EXPECT_EQ(eng.succ_of(low[0]), up[0]);
  // The array that left level 0 is remembered by a dummy with the same edge.
  const auto all = eng.level_records(0);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(eng.record(all[0]).status, RecordStatus::dummy);
  EXPECT_EQ(eng.record(all[0]).interval, iv(1, 3));
  EXPECT_EQ(eng.succ_of(all[0]), up[0]);
}

class EngineProperty
    : public ::testing::TestWithParam<std::tuple<std::uint64_t, QueryMode>> {};

TEST_P(EngineProperty, RegistryInvariantsHoldAfterEveryUpdate) {
  const auto [seed, mode] = GetParam();
  const OracleLog log = random_log(700, 1 + seed * 37 % 300, 0.1, seed);
  BlockDevice dev;
  Engine eng(dev, checked(mode));
  for (const auto &e : log.elements()) {
    eng.apply(e);
    const auto bad = eng.check_all_invariants();
    ASSERT_TRUE(bad.empty()) << "after " << eng.latest() << ": " << bad.front();
  }
  EXPECT_EQ(eng.violations().total(), 0u);

  // Every write is the lead element of some live array whose interval holds
  // its version.
  for (const auto &e : log.elements()) {
    bool found = false;
    for (int l = 0; l < eng.level_count() && !found; ++l)
      for (ArrayId id : eng.live_arrays(l)) {
        const auto &r = eng.record(id);
        if (!r.interval.contains(e.version)) continue;
        for (const auto &x : r.array->elements())
          if (x.same_slot(e)) found = true;
      }
    ASSERT_TRUE(found) << e;
  }
}

TEST_P(EngineProperty, QueriesMatchTheOracleAtEveryVersion) {
  const auto [seed, mode] = GetParam();
  const std::uint64_t keys = 1 + seed * 53 % 200;
  const OracleLog log = random_log(900, keys, 0.15, seed + 7);
  BlockDevice dev;
  Engine eng(dev, {mode});
  for (const auto &e : log.elements()) eng.apply(e);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Key> key(0, keys);
  OracleSweep sweep(log);
  for (std::uint64_t v = 0; v <= log.size(); ++v) {
    sweep.advance_to(Version{v});
    for (int i = 0; i < 3; ++i) {
      Key a = key(rng), b = key(rng);
      if (a > b) std::swap(a, b);
      ASSERT_EQ(range_query(eng, Version{v}, a, b).entries, sweep.query(a, b))
          << "v=" << v << " [" << a << "," << b << "]";
    }
  }
}

class SuccessorChain : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(SuccessorChain, VisitsOneArrayPerLevel) {
  const std::uint64_t seed = GetParam();
  const OracleLog log = random_log(800, 150, 0.1, seed + 11);
  BlockDevice dev;
  Engine eng(dev, {QueryMode::succ_pointers});
  for (const auto &e : log.elements()) eng.apply(e);
  for (std::uint64_t v = 1; v <= log.size(); ++v) {
    const auto res = range_query(eng, Version{v}, 0, ~Key{0});
    std::set<int> seen;
    for (const auto &s : res.scans) {
      ASSERT_TRUE(seen.insert(s.level).second) << "level " << s.level << " twice";
      ASSERT_TRUE(eng.record(s.array).interval.contains(Version{v}) ||
                  eng.record(s.array).interval.hi < Version{v});
    }
    // Same arrays as the index-driven lookup.
    for (int l = 0; l < eng.level_count(); ++l) {
      const auto want = eng.find_array(l, Version{v});
      if (want) {
        ASSERT_TRUE(seen.count(l)) << "missed level " << l << " at " << v;
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, SuccessorChain, ::testing::Range<std::uint64_t>(1, 5));

INSTANTIATE_TEST_SUITE_P(
    Workloads, EngineProperty,
    ::testing::Combine(::testing::Range<std::uint64_t>(1, 5),
                       ::testing::Values(QueryMode::aux_index,
                                         QueryMode::succ_pointers)),
    param_name);

TEST(EngineModes, SameStructureAndAnswersInBothModes) {
  const OracleLog log = random_log(1500, 400, 0.1, 3);
  BlockDevice d1, d2;
  Engine aux(d1, {QueryMode::aux_index});
  Engine succ(d2, {QueryMode::succ_pointers});
  for (const auto &e : log.elements()) {
    aux.apply(e);
    succ.apply(e);
  }
  for (std::uint64_t v = 0; v <= log.size(); v += 7)
    ASSERT_EQ(range_query(aux, Version{v}, 0, 500).entries,
              range_query(succ, Version{v}, 0, 500).entries);
  ASSERT_EQ(aux.stored_elements(), succ.stored_elements());
}

TEST(EngineGeometry, BlockSizeChangesOnlyCounters) {
  const OracleLog log = random_log(1200, 300, 0.1, 5);
  std::vector<std::vector<SavedRecord>> saved;
  std::vector<std::uint64_t> transfers;
  for (std::uint64_t b : {16, 64, 256}) {
    BlockDevice dev({b, 64});
    Engine eng(dev);
    for (const auto &e : log.elements()) eng.apply(e);
    dev.flush();
    transfers.push_back(dev.snapshot_report().total());
    auto recs = eng.save_records();
    if (!saved.empty()) {
      ASSERT_EQ(recs.size(), saved.front().size());
      for (std::size_t i = 0; i < recs.size(); ++i) {
        ASSERT_EQ(recs[i].level, saved.front()[i].level);
        ASSERT_EQ(recs[i].interval, saved.front()[i].interval);
        ASSERT_EQ(recs[i].elems, saved.front()[i].elems);
      }
    }
    saved.push_back(std::move(recs));
  }
  EXPECT_GT(transfers[0], transfers[2]);
}

TEST(EngineChecks, SkippingDedupIsCaught) {
  const OracleLog log = random_log(600, 60, 0.0, 9);
  BlockDevice dev;
  EngineConfig cfg = checked();
  cfg.abort_on_violation = false;
  cfg.merge.dedup = false;
  Engine eng(dev, cfg);
  for (const auto &e : log.elements()) eng.apply(e);
  EXPECT_GT(eng.violations().total(), 0u);
}
