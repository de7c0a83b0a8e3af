#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "ctree/analysis.hpp"
#include "ctree/oracle.hpp"
#include "support.hpp"

namespace ctree {
namespace {

using testing::fig2_alarms;

TEST(ResolveBatch, Fig2PairSharingTwoAncestors) {
  const BatchOutcome out = resolve_batch(make_tree(fig2_alarms()), {2, 3});
  EXPECT_EQ(out.delivery_time.at(2), 4);
  EXPECT_EQ(out.delivery_time.at(3), 4);
  EXPECT_EQ(out.pilots_by_slot, (std::vector<int>{1, 2, 2, 2}));
}

TEST(ResolveBatch, LoneAndEmptyBatches) {
  const CollisionTree tree = make_tree(fig2_alarms());
  const BatchOutcome lone = resolve_batch(tree, {2});
  EXPECT_EQ(lone.delivery_time.at(2), 1);
  EXPECT_EQ(lone.pilots_by_slot, std::vector<int>{1});
  const BatchOutcome none = resolve_batch(tree, {});
  EXPECT_TRUE(none.delivery_time.empty());
  EXPECT_EQ(none.pilots_by_slot, std::vector<int>{1});
}

TEST(ResolveBatch, UnknownAlarmIsDomainError) {
  EXPECT_THROW(resolve_batch(make_tree(fig2_alarms()), {2, 42}), DomainError);
}

TEST(ResolveBatch, EveryAlarmDeliveredWithinSequenceLength) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const int n = 2 + static_cast<int>(seed % 9);
    const CollisionTree tree = make_tree(testing::random_alarms(n, 1.0, seed));
    const std::vector<AlarmId> ids = tree.alarm_ids();
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
      std::set<AlarmId> subset;
      for (int i = 0; i < n; ++i)
        if (mask >> i & 1U) subset.insert(ids[static_cast<std::size_t>(i)]);
      const BatchOutcome out = resolve_batch(tree, subset);
      ASSERT_EQ(out.delivery_time.size(), subset.size());
      EXPECT_EQ(out.pilots_by_slot.front(), 1);
      for (const auto& [a, d] : out.delivery_time) {
        EXPECT_GE(d, 1);
        EXPECT_LE(d, max_delivery_time(tree, a));
      }
      for (int p : out.pilots_by_slot) EXPECT_LE(p, tree.max_width());
    }
  }
}

TEST(ExactMetrics, Fig2) {
  const CollisionTree tree = make_tree(fig2_alarms());
  const ExactMetrics m = exact_metrics(tree, fig2_alarms());
  EXPECT_NEAR(m.node_collision_prob.at(6), 0.0225, 1e-12);
  EXPECT_NEAR(m.expected_resolution_pilots, 2.72506, 1e-12);
  EXPECT_NEAR(m.expected_delivery.at(1), 1.6712625, 1e-12);
}

TEST(ExactMetrics, SingleAlarm) {
  const AlarmSet alarms({{0, 0.3, {}}});
  const ExactMetrics m = exact_metrics(make_tree(alarms), alarms);
  EXPECT_DOUBLE_EQ(m.expected_delivery.at(0), 1.0);
  EXPECT_DOUBLE_EQ(m.expected_resolution_pilots, 1.0);
}

TEST(ExactMetrics, ConditionsCorrectlyOnZeroProbabilityAlarm) {
  const AlarmSet alarms({{0, 0.0, {}}, {1, 0.5, {}}, {2, 0.25, {}}});
  const CollisionTree tree = make_tree(alarms);
  const ExactMetrics m = exact_metrics(tree, alarms);
  EXPECT_NEAR(m.expected_delivery.at(0), expected_delivery_time(tree, 0), 1e-12);
}

TEST(ExactMetrics, RefusesOversizedSets) {
  const AlarmSet alarms = testing::random_alarms(21, 0.5, 1);
  EXPECT_THROW(exact_metrics(make_tree(alarms), alarms), SizeError);
}

TEST(ExactMetrics, MatchesClosedFormsOnSmallInstances) {
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const int n = 1 + static_cast<int>(seed % 8);
    const AlarmSet alarms = testing::random_alarms(n, 1.0, seed);
    for (MergeRule rule : {MergeRule::paired, MergeRule::greedy}) {
      const CollisionTree tree = make_tree(alarms, rule);
      const ExactMetrics m = exact_metrics(tree, alarms);
      for (std::size_t u = 0; u < tree.size(); ++u)
        EXPECT_NEAR(m.node_collision_prob.at(tree.node(u).id), collision_prob(tree, u), 1e-9);
      for (const AlarmSource& a : alarms)
        EXPECT_NEAR(m.expected_delivery.at(a.id), expected_delivery_time(tree, a.id), 1e-9);
      EXPECT_NEAR(m.expected_resolution_pilots, expected_pilots_per_slot(tree), 1e-9);
    }
  }
}

}  // namespace
}  // namespace ctree
