// Copyright 2026 The Pragref Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pragref/metrics.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "gradient_check.h"
#include "pragref/error.h"

namespace pragref {
namespace {

using testing_util::FillUniform;

ContextTrial Trial(int target, Condition c, std::optional<int> click = {}) {
  ContextTrial t;
  t.colors = {Color::FromRgb(0.9, 0.1, 0.1), Color::FromRgb(0.1, 0.9, 0.1),
              Color::FromRgb(0.1, 0.1, 0.9)};
  t.target_index = target;
  t.condition = c;
  t.speaker_text = {"red"};
  t.clicked_index = click;
  return t;
}

std::vector<ContextTrial> MixedTrials() {
  std::vector<ContextTrial> out;
  for (int i = 0; i < 9; ++i) {
    out.push_back(Trial(i % 3, i < 6 ? Condition::kFar : Condition::kClose));
  }
  return out;
}

TEST(ArgMaxTest, TiesGoLow) {
  EXPECT_EQ(ArgMax({0.2, 0.5, 0.3}), 1);
  EXPECT_EQ(ArgMax({0.4, 0.4, 0.2}), 0);
  EXPECT_EQ(ArgMax({0.2, 0.4, 0.4}), 1);
}

TEST(EvaluateTest, UniformAgent) {
  // Every target ties, so argmax picks index 0: one third correct.
  const EvalReport r = Evaluate(MixedTrials(), [](const ContextTrial&) {
    return ListenerDistribution{1.0 / 3, 1.0 / 3, 1.0 / 3};
  });
  EXPECT_EQ(r.overall.count, 9);
  EXPECT_NEAR(r.overall.accuracy, 1.0 / 3, 1e-12);
  EXPECT_NEAR(r.overall.perplexity, 3.0, 1e-9);
  ASSERT_EQ(r.by_condition.size(), 2u);
  EXPECT_EQ(r.by_condition.count(Condition::kSplit), 0u);
  EXPECT_EQ(r.by_condition.at(Condition::kFar).count, 6);
  EXPECT_EQ(r.by_condition.at(Condition::kClose).count, 3);
}

TEST(EvaluateTest, OracleAgent) {
  const EvalReport r = Evaluate(MixedTrials(), [](const ContextTrial& t) {
    ListenerDistribution p{0, 0, 0};
    p[t.target_index] = 1.0;
    return p;
  });
  EXPECT_DOUBLE_EQ(r.overall.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(r.overall.perplexity, 1.0);
}

TEST(EvaluateTest, PerplexityIsGeometricMean) {
  // Target mass 0.5 on one trial, 0.2 on another.
  std::vector<ContextTrial> trials = {Trial(0, Condition::kFar),
                                      Trial(1, Condition::kFar)};
  const EvalReport r = Evaluate(trials, [](const ContextTrial& t) {
    return t.target_index == 0 ? ListenerDistribution{0.5, 0.3, 0.2}
                               : ListenerDistribution{0.6, 0.2, 0.2};
  });
  EXPECT_NEAR(r.overall.perplexity, 1.0 / std::sqrt(0.5 * 0.2), 1e-12);
  EXPECT_DOUBLE_EQ(r.overall.accuracy, 0.5);
}

TEST(EvaluateTest, CsvAndJson) {
  const EvalReport r = Evaluate(MixedTrials(), [](const ContextTrial&) {
    return ListenerDistribution{1.0 / 3, 1.0 / 3, 1.0 / 3};
  });
  const std::string csv = r.ToCsv();
  EXPECT_EQ(csv.rfind("condition,count,accuracy,perplexity\nall,9,", 0), 0u);
  EXPECT_NE(csv.find("\nclose,3,"), std::string::npos);
  const auto j = r.ToJson();
  EXPECT_EQ(j["count"], 9);
  EXPECT_FALSE(j["by_condition"].contains("split"));
}

TEST(HumanAccuracyTest, CountsClicksAndSkipsMissing) {
  std::vector<ContextTrial> trials = {
      Trial(0, Condition::kFar, 0), Trial(1, Condition::kFar, 1),
      Trial(2, Condition::kClose, 2), Trial(2, Condition::kClose)};
  HumanAccuracy h = ComputeHumanAccuracy(trials);
  EXPECT_EQ(h.overall.count, 3);
  EXPECT_DOUBLE_EQ(h.overall.accuracy(), 1.0);
  EXPECT_EQ(h.missing_clicks, 1);

  trials.push_back(Trial(0, Condition::kSplit, 2));
  h = ComputeHumanAccuracy(trials);
  EXPECT_DOUBLE_EQ(h.overall.accuracy(), 0.75);
  EXPECT_DOUBLE_EQ(h.by_condition.at(Condition::kSplit).accuracy(), 0.0);
  EXPECT_EQ(h.ToJson()["missing_clicks"], 1);
}

TEST(ColorTermDepthsTest, BundledTable) {
  const ColorTermDepths& d = ColorTermDepths::Bundled();
  EXPECT_GT(d.size(), 20);
  EXPECT_EQ(d.Depth("blue"), ColorTermDepths::kBasicDepth);
  EXPECT_GT(*d.Depth("teal"), ColorTermDepths::kBasicDepth);
  EXPECT_FALSE(d.Depth("spaceship").has_value());
}

TEST(ColorTermDepthsTest, LoadErrors) {
  const auto dir = std::filesystem::temp_directory_path();
  EXPECT_THROW(ColorTermDepths::Load(dir / "no_such_depths.csv"), IoError);
  const auto path = dir / "pragref_bad_depths.csv";
  {
    std::ofstream out(path);
    out << "term,depth\nblue,7\nteal,deep\n";
  }
  try {
    ColorTermDepths::Load(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  std::filesystem::remove(path);
}

TEST(AnalyzeUtteranceTest, Flags) {
  const ColorTermDepths& d = ColorTermDepths::Bundled();
  UtteranceFlags f = AnalyzeUtterance("darker blue", d);
  EXPECT_TRUE(f.comparative);
  EXPECT_FALSE(f.superlative);
  EXPECT_FALSE(f.negative);
  EXPECT_FALSE(f.high_specificity);
  EXPECT_EQ(f.chars, 11);
  EXPECT_EQ(f.words, 2);

  f = AnalyzeUtterance("not the bluest one", d);
  EXPECT_TRUE(f.negative);
  EXPECT_TRUE(f.superlative);
  EXPECT_FALSE(f.comparative);
  EXPECT_EQ(f.words, 4);

  f = AnalyzeUtterance("Teal", d);
  EXPECT_TRUE(f.high_specificity);

  // Short stems are not inflections.
  f = AnalyzeUtterance("her best", d);
  EXPECT_FALSE(f.comparative);
  EXPECT_FALSE(f.superlative);
  EXPECT_TRUE(AnalyzeUtterance("the most purple", d).superlative);
  EXPECT_TRUE(AnalyzeUtterance("less green", d).comparative);
}

TEST(BehaviorTest, AveragesAndPercentages) {
  const ColorTermDepths& d = ColorTermDepths::Bundled();
  const BehaviorReport r = ComputeBehavior(
      {{"blue", Condition::kFar},
       {"darker blue", Condition::kFar},
       {"not the teal", Condition::kClose}},
      d);
  ASSERT_EQ(r.by_condition.size(), 2u);
  const BehaviorRow& far = r.by_condition.at(Condition::kFar);
  EXPECT_EQ(far.count, 2);
  EXPECT_DOUBLE_EQ(far.words, 1.5);
  EXPECT_DOUBLE_EQ(far.chars, 7.5);
  EXPECT_DOUBLE_EQ(far.pct_comparative, 50.0);
  const BehaviorRow& close = r.by_condition.at(Condition::kClose);
  EXPECT_DOUBLE_EQ(close.pct_negative, 100.0);
  EXPECT_DOUBLE_EQ(close.pct_high_specificity, 100.0);
  EXPECT_EQ(r.ToCsv("human").rfind("source,condition,count,", 0), 0u);
  EXPECT_EQ(r.ToCsv("human", false).rfind("human,far,2,", 0), 0u);
}

TEST(BehaviorTest, HumanUtterancesOnePerMessage) {
  ContextTrial t = Trial(0, Condition::kSplit);
  t.speaker_text = {"the red one", "darker"};
  const auto u = HumanUtterances({t, Trial(1, Condition::kFar)});
  ASSERT_EQ(u.size(), 3u);
  EXPECT_EQ(u[1].text, "darker");
  EXPECT_EQ(u[1].condition, Condition::kSplit);
}

TEST(SyntheticContextsTest, ConditionsHold) {
  Rng rng(5);
  const auto contexts = SyntheticContexts(20, rng);
  ASSERT_EQ(contexts.size(), 60u);
  for (const LabeledContext& lc : contexts) {
    EXPECT_EQ(ClassifyCondition(lc.context.colors, lc.context.target_index), lc.condition);
  }
}

class CompareSpeakersTest : public ::testing::Test {
 protected:
  CompareSpeakersTest()
      : listener_(Vocab(), ListenerConfig{4, 5}),
        speaker_(Vocab(), SpeakerConfig{4, 5, 6}) {
    Rng rng(17);
    for (nn::Parameter* p : listener_.store().params()) FillUniform(*p, rng, -1, 1);
    for (nn::Parameter* p : speaker_.store().params()) FillUniform(*p, rng, -1, 1);
  }

  static Vocabulary Vocab() {
    return Vocabulary::Build(
        {{"blue", "teal", "darker", "not", "bluest", "green"}});
  }

  ListenerModel listener_;
  SpeakerModel speaker_;
};

TEST_F(CompareSpeakersTest, Deterministic) {
  PragmaticReasoner r1(listener_, speaker_, {});
  PragmaticReasoner r2(listener_, speaker_, {});
  Rng c1(3), c2(3);
  const auto ctx = SyntheticContexts(10, c1);
  Rng a(9), b(9);
  const auto x = CompareSpeakers(r1, speaker_, ctx, a, ColorTermDepths::Bundled());
  const auto y = CompareSpeakers(r2, speaker_, ctx, b, ColorTermDepths::Bundled());
  ASSERT_EQ(x.s1_samples.size(), 30u);
  for (std::size_t i = 0; i < x.s1_samples.size(); ++i) {
    EXPECT_EQ(x.s0_samples[i].text, y.s0_samples[i].text);
    EXPECT_EQ(x.s1_samples[i].text, y.s1_samples[i].text);
  }
  EXPECT_EQ(x.s1.ToCsv("s1"), y.s1.ToCsv("s1"));
}

TEST_F(CompareSpeakersTest, ZeroAlphaMatchesLiteralSpeaker) {
  // With alpha = 0 the pragmatic reweighting is flat, so S1 samples follow
  // the literal speaker's distribution.
  PragmaticsConfig cfg;
  cfg.alpha = 0.0;
  PragmaticReasoner r(listener_, speaker_, cfg);
  Rng crng(4);
  const auto ctx = SyntheticContexts(700, crng);
  Rng rng(8);
  const auto cmp = CompareSpeakers(r, speaker_, ctx, rng, ColorTermDepths::Bundled());
  for (const auto& [c, s0] : cmp.s0.by_condition) {
    const BehaviorRow& s1 = cmp.s1.by_condition.at(c);
    EXPECT_NEAR(s0.words, s1.words, 0.2) << ConditionName(c);
    EXPECT_NEAR(s0.pct_negative, s1.pct_negative, 6.0) << ConditionName(c);
    EXPECT_NEAR(s0.pct_comparative, s1.pct_comparative, 6.0) << ConditionName(c);
  }
}

}  // namespace
}  // namespace pragref
