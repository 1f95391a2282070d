#include <atomic>
#include <map>
#include <random>
#include <set>
#include <thread>

#include <gtest/gtest.h>

#include "support.hpp"
#include "vsi/query.hpp"

using namespace vsi;
using namespace vsi::testing;

namespace {

Entry ent(Key k, std::uint64_t v, const OracleLog &log) {
  return {k, Version{v}, log.at(Version{v}).payload};
}

}  // namespace

TEST(RangeQuery, EmptyStructure) {
  BlockDevice dev;
  Engine eng(dev);
  EXPECT_TRUE(range_query(eng, Version{0}, 0, ~Key{0}).entries.empty());
  EXPECT_THROW((void)range_query(eng, Version{1}, 0, 1), std::out_of_range);
  EXPECT_THROW((void)range_query(eng, Version{0}, 2, 1), std::invalid_argument);
}

TEST(RangeQuery, ThreeUpdateHistory) {
  OracleLog log;
  log.put(kA, payload_from_u64(1));
  log.put(kB, payload_from_u64(2));
  log.put(kA, payload_from_u64(3));
  for (QueryMode mode : {QueryMode::aux_index, QueryMode::succ_pointers}) {
    BlockDevice dev;
    Engine eng(dev, {mode});
    for (const auto &e : log.elements()) eng.apply(e);
    EXPECT_EQ(range_query(eng, Version{2}, kA, kB).entries,
              (std::vector<Entry>{ent(kA, 1, log), ent(kB, 2, log)}));
    EXPECT_EQ(range_query(eng, Version{3}, kA, kZ).entries,
              (std::vector<Entry>{ent(kA, 3, log), ent(kB, 2, log)}));
  }
}

TEST(PointQuery, Examples) {
  OracleLog log;
  log.put(kA, payload_from_u64(1));
  log.erase(kA);
  log.put(kB, payload_from_u64(3));
  BlockDevice dev;
  Engine eng(dev);
  for (const auto &e : log.elements()) eng.apply(e);
  EXPECT_FALSE(point_query(eng, Version{3}, kC));
  EXPECT_FALSE(point_query(eng, Version{2}, kA));
  const auto hit = point_query(eng, Version{1}, kA);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->payload, payload_from_u64(1));
  EXPECT_EQ(point_query(eng, Version{3}, kB)->version, Version{3});
}

TEST(RangeQuery, StatsSerializeAsJson) {
  const OracleLog log = random_log(300, 50, 0.1, 4);
  BlockDevice dev;
  Engine eng(dev);
  for (const auto &e : log.elements()) eng.apply(e);
  const auto res = range_query(eng, eng.latest(), 10, 30);
  const std::string js = res.stats_json();
  EXPECT_NE(js.find("\"examined\""), std::string::npos);
  EXPECT_NE(js.find("\"levels_visited\""), std::string::npos);
}

class QueryProperty
    : public ::testing::TestWithParam<std::tuple<std::uint64_t, QueryMode>> {};

TEST_P(QueryProperty, EntriesAreSortedUniqueAndTombstoneFree) {
  const auto [seed, mode] = GetParam();
  const OracleLog log = random_log(1000, 120, 0.3, seed);
  BlockDevice dev;
  Engine eng(dev, {mode});
  for (const auto &e : log.elements()) eng.apply(e);
  for (std::uint64_t v = 0; v <= log.size(); v += 3) {
    const auto res = range_query(eng, Version{v}, 0, 200);
    for (std::size_t i = 1; i < res.entries.size(); ++i)
      ASSERT_LT(res.entries[i - 1].key, res.entries[i].key);
    for (const auto &e : res.entries) {
      ASSERT_LE(e.version, Version{v});
      ASSERT_FALSE(log.at(e.version).tombstone);
    }
    std::set<int> levels;
    for (const auto &s : res.scans) ASSERT_TRUE(levels.insert(s.level).second);
  }
}

TEST_P(QueryProperty, DisjointRangesNeverExamineMoreThanTheArray) {
  const auto [seed, mode] = GetParam();
  const OracleLog log = random_log(2000, 1000, 0.1, seed + 20);
  BlockDevice dev;
  Engine eng(dev, {mode});
  for (const auto &e : log.elements()) eng.apply(e);
  std::mt19937_64 rng(seed);
  for (int trial = 0; trial < 10; ++trial) {
    const Version v{std::uniform_int_distribution<std::uint64_t>(1, log.size())(rng)};
    std::map<ArrayId, std::pair<std::uint64_t, std::uint64_t>> seen;  // examined, size
    for (Key k = 0; k < 1000; k += 25) {
      const auto res = range_query(eng, v, k, k + 24);
      for (const auto &s : res.scans) {
        auto &acc = seen[s.array];
        acc.first += s.examined;
        acc.second = s.array_size;
      }
    }
    for (const auto &[id, acc] : seen) ASSERT_LE(acc.first, acc.second);
  }
}

INSTANTIATE_TEST_SUITE_P(
    Workloads, QueryProperty,
    ::testing::Combine(::testing::Values<std::uint64_t>(1, 2, 3),
                       ::testing::Values(QueryMode::aux_index,
                                         QueryMode::succ_pointers)),
    [](const auto &info) {
      return (std::get<1>(info.param) == QueryMode::aux_index ? "aux_seed"
                                                               : "succ_seed") +
             std::to_string(std::get<0>(info.param));
    });

TEST(RangeQuery, ConcurrentReadersAgree) {
  const OracleLog log = random_log(1500, 300, 0.1, 8);
  BlockDevice dev;
  Engine eng(dev);
  for (const auto &e : log.elements()) eng.apply(e);
  const auto want = range_query(eng, Version{900}, 0, 300).entries;
  std::vector<std::thread> readers;
  std::atomic<int> bad{0};
  for (int t = 0; t < 4; ++t)
    readers.emplace_back([&] {
      for (int i = 0; i < 20; ++i)
        if (range_query(eng, Version{900}, 0, 300).entries != want) ++bad;
    });
  for (auto &t : readers) t.join();
  EXPECT_EQ(bad.load(), 0);
}
