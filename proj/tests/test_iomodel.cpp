#include <bit>

#include <gtest/gtest.h>

#include "vsi/iomodel.hpp"

using namespace vsi;

TEST(BlockDevice, FreshDeviceIsZero) {
  BlockDevice dev;
  const auto r = dev.snapshot_report();
  EXPECT_EQ(r.reads, 0u);
  EXPECT_EQ(r.writes, 0u);
  EXPECT_EQ(r.total(), 0u);
}

TEST(BlockDevice, ColdSequentialReadCostsCeilBlocks) {
  BlockDevice dev({64, 16});
  const auto x = dev.alloc_extent(200);
  dev.read_seq(x, 0, 130);
  EXPECT_EQ(dev.snapshot_report().reads, 3u);
  dev.read_seq(x, 0, 64);  // cache hit
  EXPECT_EQ(dev.snapshot_report().reads, 3u);
}

TEST(BlockDevice, AlignedWriteCostsOneBlockOnFlush) {
  BlockDevice dev({64, 16});
  const auto x = dev.alloc_extent(64);
  dev.write_seq(x, 0, 64);
  dev.flush();
  const auto r = dev.snapshot_report();
  EXPECT_EQ(r.writes, 1u);
  EXPECT_EQ(r.reads, 0u);
  dev.reset_counters();
  EXPECT_EQ(dev.snapshot_report().total(), 0u);
}

TEST(BlockDevice, BinarySearchReadsAtMostLogBlocks) {
  for (int k = 6; k <= 16; ++k) {
    BlockDevice dev({64, 256});
    const std::uint64_t n = std::uint64_t{1} << k;
    const auto x = dev.alloc_extent(n);
    std::uint64_t lo = 0, hi = n;
    const std::uint64_t target = n / 3;
    while (lo < hi) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      dev.read_record(x, mid);
      if (mid < target) lo = mid + 1;
      else hi = mid;
    }
    EXPECT_LE(dev.snapshot_report().reads, static_cast<std::uint64_t>(k));
  }
}

TEST(BlockDevice, DirtyEvictionIsChargedToTheWritingPhase) {
  BlockDevice dev({4, 1});
  const auto x = dev.alloc_extent(8);
  {
    PhaseScope s(dev, Phase::merge);
    dev.write_record(x, 0);
  }
  {
    PhaseScope s(dev, Phase::query);
    dev.read_record(x, 4);  // evicts the dirty block
  }
  const auto r = dev.snapshot_report();
  EXPECT_EQ(r[Phase::merge].writes, 1u);
  EXPECT_EQ(r[Phase::query].reads, 1u);
  std::uint64_t sum = 0;
  for (const auto &p : r.phases) sum += p.total();
  EXPECT_EQ(sum, r.total());
}

TEST(BlockDevice, MergeOfTwoExtentsIsLinear) {
  for (std::uint64_t n : {100u, 1000u, 5000u}) {
    BlockDevice dev({64, 4});
    const auto a = dev.alloc_extent(n);
    const auto b = dev.alloc_extent(n);
    const auto out = dev.alloc_extent(2 * n);
    for (std::uint64_t i = 0; i < n; ++i) {
      dev.read_record(a, i);
      dev.read_record(b, i);
      dev.write_record(out, 2 * i);
      dev.write_record(out, 2 * i + 1);
    }
    dev.flush();
    const std::uint64_t blocks = (2 * n + 63) / 64;
    EXPECT_LE(dev.snapshot_report().total(), 3 * blocks + 4) << n;
  }
}

TEST(BlockDevice, OutOfBoundsAndUnknownExtentsThrow) {
  BlockDevice dev;
  const auto x = dev.alloc_extent(10);
  EXPECT_THROW(dev.read_seq(x, 5, 10), std::out_of_range);
  EXPECT_THROW(dev.read_record(x + 100, 0), std::out_of_range);
  EXPECT_THROW(BlockDevice({0, 1}), std::invalid_argument);
}

TEST(BlockDevice, ReportIsJson) {
  BlockDevice dev;
  const auto x = dev.alloc_extent(10);
  dev.read_seq(x, 0, 10);
  const std::string js = dev.snapshot_report().to_json();
  EXPECT_NE(js.find("\"phases\""), std::string::npos);
  EXPECT_NE(js.find("\"reads\":1"), std::string::npos);
}
