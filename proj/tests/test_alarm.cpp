#include <cstdio>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "ctree/alarm.hpp"
#include "ctree/alarm_io.hpp"
#include "support.hpp"

namespace ctree {
namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("ctree_" + name)).string();
}

TEST(GenerateInstance, ProducesDenseIdsWithinBound) {
  const AlarmSet set = generate_instance({10, 0.01, 1});
  ASSERT_EQ(set.size(), 10u);
  AlarmId expected = 0;
  for (const AlarmSource& a : set) {
    EXPECT_EQ(a.id, expected++);
    EXPECT_GT(a.trigger_prob, 0.0);
    EXPECT_LE(a.trigger_prob, 0.01);
    EXPECT_FALSE(a.deadline.has_value());
  }
}

TEST(GenerateInstance, SingleAlarm) {
  const AlarmSet set = generate_instance({1, 1.0, 7});
  ASSERT_EQ(set.size(), 1u);
  EXPECT_GT(set.alarms()[0].trigger_prob, 0.0);
  EXPECT_LE(set.alarms()[0].trigger_prob, 1.0);
}

TEST(GenerateInstance, DeterministicForSeed) {
  const InstanceConfig cfg{25, 0.3, 12345};
  EXPECT_EQ(generate_instance(cfg), generate_instance(cfg));
  EXPECT_NE(generate_instance(cfg), generate_instance({25, 0.3, 12346}));
}

TEST(GenerateInstance, RejectsInvalidConfig) {
  EXPECT_THROW(generate_instance({0, 0.5, 1}), ConfigError);
  EXPECT_THROW(generate_instance({5, 0.0, 1}), ConfigError);
  EXPECT_THROW(generate_instance({5, 1.5, 1}), ConfigError);
  EXPECT_THROW(generate_instance({5, -0.1, 1}), ConfigError);
}

TEST(GenerateInstance, MeanIsHalfTheBound) {
  const AlarmSet set = generate_instance({100000, 0.5, 99});
  double sum = 0.0;
  for (const AlarmSource& a : set) sum += a.trigger_prob;
  EXPECT_NEAR(sum / static_cast<double>(set.size()), 0.25, 0.01);
}

TEST(AlarmSet, SortsByIdAndValidates) {
  const AlarmSet set({{3, 0.1, {}}, {1, 0.2, 4}});
  EXPECT_EQ(set.alarms()[0].id, 1);
  EXPECT_EQ(set.at(3).trigger_prob, 0.1);
  EXPECT_THROW(set.at(2), LookupError);
  EXPECT_THROW(AlarmSet({{3, 0.1, {}}, {3, 0.2, {}}}), ValidationError);
  EXPECT_THROW(AlarmSet({{0, 1.2, {}}}), ValidationError);
  EXPECT_THROW(AlarmSet({{0, 0.2, 0}}), ValidationError);
  EXPECT_THROW(AlarmSet({{-1, 0.2, {}}}), ValidationError);
}

TEST(AlarmFile, RoundTripsFig2Set) {
  AlarmSet set = testing::fig2_alarms();
  const std::string path = temp_path("fig2.json");
  save_alarms(set, path);
  EXPECT_EQ(load_alarms(path), set);
  std::remove(path.c_str());
}

TEST(AlarmFile, RoundTripIsExactForRandomSets) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<AlarmSource> alarms = generate_instance({30, 1.0, seed}).alarms();
    for (std::size_t i = 0; i < alarms.size(); i += 3) alarms[i].deadline = static_cast<int>(i + 1);
    const AlarmSet set(alarms);
    EXPECT_EQ(alarms_from_json(alarms_to_json(set)), set);
  }
}

TEST(AlarmFile, WritesAtLeastTwelveSignificantDigits) {
  const std::string text = alarms_to_json(AlarmSet({{0, 0.6, {}}}));
  EXPECT_NE(text.find("0.600000000000"), std::string::npos) << text;
}

TEST(AlarmFile, EmptyFileIsParseError) { EXPECT_THROW(alarms_from_json(""), ParseError); }

TEST(AlarmFile, DuplicateIdIsValidationError) {
  const std::string text =
      R"({"alarms": [{"id": 3, "trigger_prob": 0.1}, {"id": 3, "trigger_prob": 0.2}]})";
  EXPECT_THROW(alarms_from_json(text), ValidationError);
}

TEST(AlarmFile, BadFieldIsNamed) {
  const std::string text = R"({"alarms": [{"id": 0, "trigger_prob": 0.1}, {"id": 1}]})";
  try {
    alarms_from_json(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("alarms[1].trigger_prob"), std::string::npos);
  }
}

TEST(AlarmFile, MissingFileIsIoError) {
  EXPECT_THROW(load_alarms("/nonexistent/dir/alarms.json"), IoError);
}

}  // namespace
}  // namespace ctree
