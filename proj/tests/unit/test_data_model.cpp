#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "../support/fixtures.hpp"
#include "resfault/data_model.hpp"
#include "resfault/error.hpp"

using namespace resfault;

namespace {

UnitSeries with_cycles(std::vector<int> cyc) {
  const auto T = static_cast<Index>(cyc.size());
  return {1, "d", MatrixXd::Zero(T, 1), MatrixXd::Zero(T, 1), std::move(cyc), {"w"}, {"x"}};
}

std::set<std::pair<std::size_t, Index>> as_set(const SampleSet& s) {
  std::set<std::pair<std::size_t, Index>> out;
  for (const auto& r : s) out.insert({r.unit, r.row});
  return out;
}

}  // namespace

TEST(UnitSeries, RejectsMismatchedShapes) {
  EXPECT_THROW(UnitSeries(1, "d", MatrixXd::Zero(3, 2), MatrixXd::Zero(2, 2), {1, 1, 1}, {"a", "b"}, {"c", "d"}),
               Error);
  EXPECT_THROW(UnitSeries(1, "d", MatrixXd::Zero(2, 1), MatrixXd::Zero(2, 1), {2, 1}, {"a"}, {"b"}), Error);
  EXPECT_THROW(UnitSeries(1, "d", MatrixXd::Zero(2, 1), MatrixXd::Zero(2, 1), {1, 1}, {"a", "b"}, {"c"}), Error);
}

TEST(UnitSeries, ZPutsSensorsFirst) {
  MatrixXd w(1, 2), x(1, 3);
  w << 10, 20;
  x << 1, 2, 3;
  UnitSeries s(1, "d", w, x, {1}, {"w1", "w2"}, {"x1", "x2", "x3"});
  MatrixXd expect(1, 5);
  expect << 1, 2, 3, 10, 20;
  EXPECT_EQ(s.z(), expect);
  EXPECT_EQ(s.z_names(), (std::vector<std::string>{"x1", "x2", "x3", "w1", "w2"}));
}

TEST(Cycles, SegmentsContiguousRuns) {
  const auto v = cycles(with_cycles({0, 0, 1, 1, 1}));
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0], (CycleView{0, 0, 2}));
  EXPECT_EQ(v[1], (CycleView{1, 2, 5}));
  const auto single = cycles(with_cycles({5}));
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0], (CycleView{5, 0, 1}));
}

TEST(Cycles, GeneratedUnitHasEqualBlocks) {
  const auto s = fixture::series(1, 3, 100);
  const auto v = cycles(s);
  ASSERT_EQ(v.size(), 3u);
  for (const auto& c : v) EXPECT_EQ(c.size(), 100);
}

TEST(Split, TestHoldsCyclesAfterHealthyWindow) {
  std::vector<UnitSeries> fleet{fixture::series(1, 20, 5)};
  const auto sp = split(fleet, SplitSpec{16, 0.15, 1});
  std::set<int> test_cycles;
  for (const auto& r : sp.test) test_cycles.insert(fleet[0].cycle_of()[static_cast<std::size_t>(r.row)]);
  EXPECT_EQ(test_cycles, (std::set<int>{17, 18, 19, 20}));
  EXPECT_EQ(sp.first_test_row[0], 80);
}

TEST(Split, ValidationFraction) {
  std::vector<UnitSeries> fleet{fixture::series(1, 30, 50)};
  const auto sp = split(fleet, SplitSpec{20, 0.15, 3});
  EXPECT_EQ(sp.validation.size(), 150u);
  EXPECT_EQ(sp.train.size(), 850u);
}

TEST(Split, IsAPartitionOfHealthyRows) {
  std::vector<UnitSeries> fleet{fixture::series(1, 20, 7), fixture::series(2, 25, 3)};
  const auto sp = split(fleet, SplitSpec{16, 0.2, 9});
  const auto tr = as_set(sp.train), va = as_set(sp.validation), te = as_set(sp.test);
  EXPECT_EQ(tr.size() + va.size(), 16u * 7 + 16u * 3);
  for (const auto& r : va) EXPECT_FALSE(tr.count(r));
  for (const auto& r : te) {
    EXPECT_FALSE(tr.count(r));
    EXPECT_FALSE(va.count(r));
    EXPECT_GT(fleet[r.first].cycle_of()[static_cast<std::size_t>(r.second)], 16);
  }
  for (const auto& r : tr) EXPECT_LE(fleet[r.first].cycle_of()[static_cast<std::size_t>(r.second)], 16);
}

TEST(Split, PureFunctionOfSeed) {
  std::vector<UnitSeries> fleet{fixture::series(1, 20, 10), fixture::series(2, 20, 10)};
  const auto a = split(fleet, SplitSpec{16, 0.15, 1});
  const auto b = split(fleet, SplitSpec{16, 0.15, 1});
  const auto c = split(fleet, SplitSpec{16, 0.15, 2});
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.validation.size(), c.validation.size());
  EXPECT_NE(as_set(a.validation), as_set(c.validation));
}

TEST(Split, ShortUnitIsRejected) {
  std::vector<UnitSeries> fleet{fixture::series(1, 16, 2)};
  try {
    split(fleet, SplitSpec{16, 0.15, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnitTooShort);
  }
}

TEST(Split, InvalidSpec) {
  EXPECT_THROW((SplitSpec{0, 0.15, 1}.validate()), Error);
  EXPECT_THROW((SplitSpec{16, 0.0, 1}.validate()), Error);
  EXPECT_THROW((SplitSpec{16, 1.0, 1}.validate()), Error);
}

TEST(Gather, PicksRequestedRowsAndChannels) {
  std::vector<UnitSeries> fleet{fixture::series(1, 2, 2), fixture::series(2, 2, 2, 2, 3, 7)};
  SampleSet rows{{1, 3}, {0, 0}};
  const auto z = gather(fleet, rows, Channels::Z);
  EXPECT_EQ(z.row(0), fleet[1].z().row(3));
  EXPECT_EQ(z.row(1), fleet[0].z().row(0));
  EXPECT_EQ(gather(fleet, rows, Channels::W).row(0), fleet[1].w().row(3));
  EXPECT_EQ(gather(fleet, rows, Channels::X).row(1), fleet[0].x().row(0));
}
