#include <algorithm>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "ctree/analysis.hpp"
#include "support.hpp"

namespace ctree {
namespace {

using testing::fig2_alarms;
using testing::node_with_id;

// Per-alarm expectations for the five-alarm tree, from a separate brute-force
// replay over all 32 trigger subsets.
const std::map<AlarmId, double> kFig2RootInclusive{
    {1, 1.6712625}, {2, 2.59195}, {3, 2.692525}, {4, 2.60855}, {5, 2.60855}};
const std::map<AlarmId, double> kFig2Literal{
    {1, 1.0}, {2, 1.79425}, {3, 1.880375}, {4, 1.76325}, {5, 1.76325}};

TEST(CollisionProb, Examples) {
  const CollisionTree tree = make_tree(fig2_alarms());
  EXPECT_NEAR(collision_prob(tree, node_with_id(tree, 6)), 0.0225, 1e-15);
  EXPECT_EQ(collision_prob(tree, tree.leaf_pos(3)), 0.0);
  const CollisionTree certain = make_tree(AlarmSet({{0, 1.0, {}}, {1, 1.0, {}}}));
  EXPECT_DOUBLE_EQ(collision_prob(certain, CollisionTree::root_pos()), 1.0);
}

TEST(CollisionProb, MatchesClosedFormSum) {
  const CollisionTree tree = make_tree(testing::random_alarms(9, 1.0, 3));
  for (std::size_t u = 0; u < tree.size(); ++u) {
    const std::vector<double> p = tree.leaf_probs_under(u);
    if (p.size() < 2) continue;
    double none = 1.0, one = 0.0;
    for (double x : p) none *= 1 - x;
    for (std::size_t l = 0; l < p.size(); ++l) {
      double term = p[l];
      for (std::size_t m = 0; m < p.size(); ++m)
        if (m != l) term *= 1 - p[m];
      one += term;
    }
    EXPECT_NEAR(collision_prob(tree, u), 1 - one - none, 1e-12);
  }
}

TEST(ConditionalCollisionProb, Examples) {
  const CollisionTree tree = make_tree(fig2_alarms());
  EXPECT_NEAR(conditional_collision_prob(tree, node_with_id(tree, 7), 2), 0.3, 1e-15);
  EXPECT_EQ(conditional_collision_prob(tree, tree.leaf_pos(2), 2), 0.0);
  EXPECT_NEAR(conditional_collision_prob(tree, CollisionTree::root_pos(), 2),
              1 - 0.4 * 0.7 * 0.85 * 0.85, 1e-15);
  EXPECT_NEAR(conditional_collision_prob(tree, CollisionTree::root_pos(), 2), 0.7977, 1e-4);
  EXPECT_THROW(conditional_collision_prob(tree, node_with_id(tree, 6), 2), DomainError);
}

TEST(ExpectedDeliveryTime, Fig2BothVariants) {
  const CollisionTree tree = make_tree(fig2_alarms());
  for (const auto& [alarm, value] : kFig2RootInclusive)
    EXPECT_NEAR(expected_delivery_time(tree, alarm), value, 1e-12) << alarm;
  for (const auto& [alarm, value] : kFig2Literal)
    EXPECT_NEAR(expected_delivery_time(tree, alarm, DeliveryVariant::paper_literal), value, 1e-12)
        << alarm;
  EXPECT_DOUBLE_EQ(expected_delivery_time(tree, 1, DeliveryVariant::paper_literal), 1.0);
  EXPECT_THROW(expected_delivery_time(tree, 99), LookupError);
}

TEST(ExpectedDeliveryTime, SingleAlarmIsOneSlot) {
  const CollisionTree tree = make_tree(AlarmSet({{0, 0.9, {}}}));
  EXPECT_EQ(expected_delivery_time(tree, 0), 1.0);
  EXPECT_EQ(expected_delivery_time(tree, 0, DeliveryVariant::paper_literal), 1.0);
}

TEST(AverageDeliveryTime, Examples) {
  EXPECT_EQ(average_delivery_time(make_tree(AlarmSet({{0, 0.2, {}}}))), 1.0);
  const CollisionTree pair = make_tree(AlarmSet({{0, 0.5, {}}, {1, 0.5, {}}}));
  EXPECT_DOUBLE_EQ(average_delivery_time(pair), 1.5);
  EXPECT_NEAR(average_delivery_time(make_tree(fig2_alarms())), 2.4345675, 1e-12);
}

TEST(ExpectedPilotsPerSlot, Examples) {
  EXPECT_EQ(expected_pilots_per_slot(make_tree(AlarmSet({{0, 0.2, {}}}))), 1.0);
  EXPECT_DOUBLE_EQ(expected_pilots_per_slot(make_tree(AlarmSet({{0, 0.5, {}}, {1, 0.5, {}}}))), 1.5);
  EXPECT_NEAR(expected_pilots_per_slot(make_tree(fig2_alarms())), 2.72506, 1e-12);
}

TEST(ExpectedPilotsPerSlot, ParentFormEqualsChildCountForm) {
  const CollisionTree tree = make_tree(testing::random_alarms(40, 0.2, 8));
  double by_parent = 1.0;
  for (const TreeNode& n : tree.nodes())
    if (!n.is_root()) by_parent += collision_prob(tree, n.parent);
  EXPECT_NEAR(expected_pilots_per_slot(tree), by_parent, 1e-12);
}

TEST(AnalysisProperties, LiteralNeverExceedsRootInclusive) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const CollisionTree tree = make_tree(testing::random_alarms(2 + static_cast<int>(seed), 0.3, seed));
    for (const auto& [alarm, leaf] : tree.leaf_map()) {
      const double incl = expected_delivery_time(tree, alarm);
      const double lit = expected_delivery_time(tree, alarm, DeliveryVariant::paper_literal);
      const double root_term = conditional_collision_prob(tree, CollisionTree::root_pos(), alarm);
      EXPECT_LE(lit, incl);
      EXPECT_NEAR(incl - lit, root_term, 1e-12);
      EXPECT_GE(lit, 1.0);
    }
  }
}

TEST(AnalysisProperties, PilotsMonotoneInEachTriggerProbability) {
  const CollisionTree tree = make_tree(testing::random_alarms(12, 0.6, 21));
  const double base = expected_pilots_per_slot(tree);
  for (const auto& [alarm, leaf] : tree.leaf_map()) {
    detail::Draft d = tree.to_draft();
    d.nodes[leaf].leaf_prob = std::min(1.0, d.nodes[leaf].leaf_prob + 0.05);
    EXPECT_GE(expected_pilots_per_slot(CollisionTree::from_draft(d)), base - 1e-15) << alarm;
  }
}

TEST(AnalysisProperties, InvariantUnderRelabeling) {
  const AlarmSet original = testing::random_alarms(15, 0.4, 77);
  std::vector<AlarmSource> permuted = original.alarms();
  std::vector<AlarmId> ids;
  for (const auto& a : permuted) ids.push_back(a.id * 3 + 100);
  std::reverse(ids.begin(), ids.end());
  for (std::size_t i = 0; i < permuted.size(); ++i) permuted[i].id = ids[i];

  auto metrics = [](const AlarmSet& set) {
    const AnalysisReport r = analyze(make_tree(set));
    std::vector<double> delivery, collision;
    for (const auto& [a, v] : r.expected_delivery) delivery.push_back(v);
    for (const auto& [u, v] : r.collision_prob) collision.push_back(v);
    std::sort(delivery.begin(), delivery.end());
    std::sort(collision.begin(), collision.end());
    return std::tuple{delivery, collision, r.average_delivery, r.expected_pilots_per_slot};
  };
  const auto [d1, c1, avg1, pil1] = metrics(original);
  const auto [d2, c2, avg2, pil2] = metrics(AlarmSet(permuted));
  ASSERT_EQ(d1.size(), d2.size());
  for (std::size_t i = 0; i < d1.size(); ++i) EXPECT_NEAR(d1[i], d2[i], 1e-12);
  for (std::size_t i = 0; i < c1.size(); ++i) EXPECT_NEAR(c1[i], c2[i], 1e-12);
  EXPECT_NEAR(avg1, avg2, 1e-12);
  EXPECT_NEAR(pil1, pil2, 1e-12);
}

TEST(AnalysisReport, JsonFieldNames) {
  const nlohmann::json doc = to_json(analyze(make_tree(fig2_alarms())));
  for (const char* field : {"expected_delivery", "average_delivery", "expected_pilots_per_slot", "collision_prob"})
    EXPECT_TRUE(doc.contains(field)) << field;
  EXPECT_NEAR(doc["expected_delivery"]["1"].get<double>(), 1.6712625, 1e-12);
  EXPECT_EQ(doc["collision_prob"].size(), 9u);
}

}  // namespace
}  // namespace ctree
