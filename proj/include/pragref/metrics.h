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

// Listener evaluation and speaker behavior statistics.

#ifndef PRAGREF_METRICS_H_
#define PRAGREF_METRICS_H_

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "pragref/colorspace.h"
#include "pragref/corpus.h"
#include "pragref/listener.h"
#include "pragref/rsa.h"

namespace pragref {

// Index of the largest entry; ties go to the lowest index.
int ArgMax(const ListenerDistribution& p);

struct EvalBucket {
  int count = 0;
  double accuracy = 0.0;
  double perplexity = 0.0;  // exp(mean -ln p(target)), no flooring
};

struct EvalReport {
  EvalBucket overall;
  std::map<Condition, EvalBucket> by_condition;  // empty conditions absent

  nlohmann::json ToJson() const;
  // Header "condition,count,accuracy,perplexity"; "all" row first.
  std::string ToCsv() const;
};

// Streams (trial, distribution) pairs into an EvalReport.
class EvalAccumulator {
 public:
  void Add(const ContextTrial& trial, const ListenerDistribution& p);
  EvalReport Report() const;

 private:
  struct Sums {
    int count = 0;
    int correct = 0;
    double nll = 0.0;
  };
  Sums all_;
  std::map<Condition, Sums> by_condition_;
};

using ListenerAgent = std::function<ListenerDistribution(const ContextTrial&)>;

EvalReport Evaluate(const std::vector<ContextTrial>& trials,
                    const ListenerAgent& agent);

struct HumanAccuracy {
  struct Bucket {
    int count = 0;
    int correct = 0;
    double accuracy() const { return count ? double(correct) / count : 0.0; }
  };
  Bucket overall;
  std::map<Condition, Bucket> by_condition;  // empty conditions absent
  int missing_clicks = 0;                    // excluded from every bucket

  nlohmann::json ToJson() const;
};

HumanAccuracy ComputeHumanAccuracy(const std::vector<ContextTrial>& trials);

// Term -> hypernym depth. Basic color terms sit at depth 7; anything deeper
// counts as high specificity.
class ColorTermDepths {
 public:
  static constexpr int kBasicDepth = 7;

  ColorTermDepths() = default;
  explicit ColorTermDepths(std::unordered_map<std::string, int> depths)
      : depths_(std::move(depths)) {}

  // CSV with header "term,depth". Throws IoError or ParseError.
  static ColorTermDepths Load(const std::filesystem::path& path);
  // The table shipped in data/color_term_depths.csv.
  static const ColorTermDepths& Bundled();

  std::optional<int> Depth(std::string_view term) const;
  int size() const { return static_cast<int>(depths_.size()); }

 private:
  std::unordered_map<std::string, int> depths_;
};

std::filesystem::path DefaultDataDir();

struct UtteranceFlags {
  int chars = 0;
  int words = 0;
  bool comparative = false;
  bool superlative = false;
  bool negative = false;
  bool high_specificity = false;
};

// Flags of one raw message. Tokens are speaker-mode (suffixes intact).
UtteranceFlags AnalyzeUtterance(std::string_view raw,
                                const ColorTermDepths& depths);

struct BehaviorRow {
  int count = 0;
  double chars = 0.0;
  double words = 0.0;
  double pct_comparative = 0.0;
  double pct_high_specificity = 0.0;
  double pct_negative = 0.0;
  double pct_superlative = 0.0;
};

struct BehaviorReport {
  std::map<Condition, BehaviorRow> by_condition;  // empty conditions absent

  nlohmann::json ToJson() const;
  // Header "source,condition,count,chars,words,pct_comparative,
  // pct_high_specificity,pct_negative,pct_superlative".
  std::string ToCsv(std::string_view source, bool header = true) const;
};

struct LabeledUtterance {
  std::string text;
  Condition condition = Condition::kFar;
};

BehaviorReport ComputeBehavior(const std::vector<LabeledUtterance>& utterances,
                               const ColorTermDepths& depths);

// One entry per speaker message.
std::vector<LabeledUtterance> HumanUtterances(
    const std::vector<ContextTrial>& trials);

struct SpeakerComparison {
  BehaviorReport s0;
  BehaviorReport s1;
  std::vector<LabeledUtterance> s0_samples;
  std::vector<LabeledUtterance> s1_samples;
};

struct LabeledContext {
  SampledContext context;
  Condition condition = Condition::kFar;
};

// `per_condition` synthetic contexts of each condition.
std::vector<LabeledContext> SyntheticContexts(int per_condition, Rng& rng,
                                              const ConditionThresholds& th = {});

// One S0 sample and one S1 sample per context.
SpeakerComparison CompareSpeakers(PragmaticReasoner& reasoner,
                                  const SpeakerModel& speaker,
                                  const std::vector<LabeledContext>& contexts,
                                  Rng& rng, const ColorTermDepths& depths);

}  // namespace pragref

#endif  // PRAGREF_METRICS_H_
