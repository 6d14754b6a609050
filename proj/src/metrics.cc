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
#include <fstream>

#include <fmt/core.h>

#include "pragref/error.h"

namespace pragref {

using nlohmann::json;

namespace {

constexpr Condition kConditions[] = {Condition::kFar, Condition::kSplit,
                                     Condition::kClose};

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

// Suffix with a stem of at least three characters.
bool HasSuffix(std::string_view token, std::string_view suffix) {
  return EndsWith(token, suffix) && token.size() >= suffix.size() + 3;
}

json BucketJson(const EvalBucket& b) {
  return {{"count", b.count}, {"accuracy", b.accuracy},
          {"perplexity", b.perplexity}};
}

json RowJson(const BehaviorRow& r) {
  return {{"count", r.count},
          {"chars", r.chars},
          {"words", r.words},
          {"pct_comparative", r.pct_comparative},
          {"pct_high_specificity", r.pct_high_specificity},
          {"pct_negative", r.pct_negative},
          {"pct_superlative", r.pct_superlative}};
}

}  // namespace

int ArgMax(const ListenerDistribution& p) {
  int best = 0;
  for (int k = 1; k < kContextSize; ++k) {
    if (p[k] > p[best]) best = k;
  }
  return best;
}

json EvalReport::ToJson() const {
  json by = json::object();
  for (const auto& [c, b] : by_condition) {
    by[std::string(ConditionName(c))] = BucketJson(b);
  }
  json out = BucketJson(overall);
  out["by_condition"] = by;
  return out;
}

std::string EvalReport::ToCsv() const {
  std::string out = "condition,count,accuracy,perplexity\n";
  auto row = [&](std::string_view name, const EvalBucket& b) {
    out += fmt::format("{},{},{:.6f},{:.6f}\n", name, b.count, b.accuracy,
                       b.perplexity);
  };
  row("all", overall);
  for (const auto& [c, b] : by_condition) row(ConditionName(c), b);
  return out;
}

void EvalAccumulator::Add(const ContextTrial& trial,
                          const ListenerDistribution& p) {
  const bool correct = ArgMax(p) == trial.target_index;
  const double nll = -std::log(p[trial.target_index]);
  for (Sums* s : {&all_, &by_condition_[trial.condition]}) {
    ++s->count;
    s->correct += correct;
    s->nll += nll;
  }
}

EvalReport EvalAccumulator::Report() const {
  auto bucket = [](const Sums& s) {
    EvalBucket b;
    b.count = s.count;
    if (s.count > 0) {
      b.accuracy = static_cast<double>(s.correct) / s.count;
      b.perplexity = std::exp(s.nll / s.count);
    }
    return b;
  };
  EvalReport r;
  r.overall = bucket(all_);
  for (const auto& [c, s] : by_condition_) r.by_condition[c] = bucket(s);
  return r;
}

EvalReport Evaluate(const std::vector<ContextTrial>& trials,
                    const ListenerAgent& agent) {
  EvalAccumulator acc;
  for (const ContextTrial& t : trials) acc.Add(t, agent(t));
  return acc.Report();
}

json HumanAccuracy::ToJson() const {
  json by = json::object();
  for (const auto& [c, b] : by_condition) {
    by[std::string(ConditionName(c))] = {
        {"count", b.count}, {"correct", b.correct}, {"accuracy", b.accuracy()}};
  }
  return {{"count", overall.count},
          {"correct", overall.correct},
          {"accuracy", overall.accuracy()},
          {"missing_clicks", missing_clicks},
          {"by_condition", by}};
}

HumanAccuracy ComputeHumanAccuracy(const std::vector<ContextTrial>& trials) {
  HumanAccuracy out;
  for (const ContextTrial& t : trials) {
    if (!t.clicked_index) {
      ++out.missing_clicks;
      continue;
    }
    const bool correct = *t.clicked_index == t.target_index;
    for (HumanAccuracy::Bucket* b : {&out.overall, &out.by_condition[t.condition]}) {
      ++b->count;
      b->correct += correct;
    }
  }
  return out;
}

ColorTermDepths ColorTermDepths::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open depth table " + path.string());
  std::unordered_map<std::string, int> depths;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("term,", 0) == 0)) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError(line_no, "expected term,depth");
    }
    try {
      std::size_t used = 0;
      const std::string depth = line.substr(comma + 1);
      depths[line.substr(0, comma)] = std::stoi(depth, &used);
      if (used != depth.size()) throw std::invalid_argument(depth);
    } catch (const std::exception&) {
      throw ParseError(line_no, "bad depth in '" + line + "'");
    }
  }
  return ColorTermDepths(std::move(depths));
}

std::filesystem::path DefaultDataDir() { return PRAGREF_DEFAULT_DATA_DIR; }

const ColorTermDepths& ColorTermDepths::Bundled() {
  static const ColorTermDepths table =
      Load(DefaultDataDir() / "color_term_depths.csv");
  return table;
}

std::optional<int> ColorTermDepths::Depth(std::string_view term) const {
  auto it = depths_.find(std::string(term));
  if (it == depths_.end()) return std::nullopt;
  return it->second;
}

UtteranceFlags AnalyzeUtterance(std::string_view raw,
                                const ColorTermDepths& depths) {
  UtteranceFlags f;
  f.chars = static_cast<int>(raw.size());
  f.words = CountWords(raw);
  for (const std::string& tok : Preprocess(raw, TokenizeMode::kSpeaker)) {
    f.comparative |= HasSuffix(tok, "er") || tok == "more" || tok == "less";
    f.superlative |= HasSuffix(tok, "est") || tok == "most" || tok == "least";
    f.negative |= tok == "not";
    const auto d = depths.Depth(tok);
    f.high_specificity |= d && *d > ColorTermDepths::kBasicDepth;
  }
  return f;
}

json BehaviorReport::ToJson() const {
  json out = json::object();
  for (const auto& [c, r] : by_condition) {
    out[std::string(ConditionName(c))] = RowJson(r);
  }
  return out;
}

std::string BehaviorReport::ToCsv(std::string_view source, bool header) const {
  std::string out;
  if (header) {
    out = "source,condition,count,chars,words,pct_comparative,"
          "pct_high_specificity,pct_negative,pct_superlative\n";
  }
  for (const auto& [c, r] : by_condition) {
    out += fmt::format("{},{},{},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f},{:.4f}\n",
                       source, ConditionName(c), r.count, r.chars, r.words,
                       r.pct_comparative, r.pct_high_specificity,
                       r.pct_negative, r.pct_superlative);
  }
  return out;
}

BehaviorReport ComputeBehavior(const std::vector<LabeledUtterance>& utterances,
                               const ColorTermDepths& depths) {
  std::map<Condition, BehaviorRow> sums;
  for (const LabeledUtterance& u : utterances) {
    const UtteranceFlags f = AnalyzeUtterance(u.text, depths);
    BehaviorRow& r = sums[u.condition];
    ++r.count;
    r.chars += f.chars;
    r.words += f.words;
    r.pct_comparative += f.comparative;
    r.pct_high_specificity += f.high_specificity;
    r.pct_negative += f.negative;
    r.pct_superlative += f.superlative;
  }
  BehaviorReport out;
  for (auto& [c, r] : sums) {
    const double n = r.count;
    r.chars /= n;
    r.words /= n;
    for (double* pct : {&r.pct_comparative, &r.pct_high_specificity,
                        &r.pct_negative, &r.pct_superlative}) {
      *pct *= 100.0 / n;
    }
    out.by_condition[c] = r;
  }
  return out;
}

std::vector<LabeledUtterance> HumanUtterances(
    const std::vector<ContextTrial>& trials) {
  std::vector<LabeledUtterance> out;
  for (const ContextTrial& t : trials) {
    for (const std::string& m : t.speaker_text) out.push_back({m, t.condition});
  }
  return out;
}

std::vector<LabeledContext> SyntheticContexts(int per_condition, Rng& rng,
                                              const ConditionThresholds& th) {
  std::vector<LabeledContext> out;
  out.reserve(3 * std::max(per_condition, 0));
  for (int i = 0; i < per_condition; ++i) {
    for (Condition c : kConditions) out.push_back({SampleContext(c, th, rng), c});
  }
  return out;
}

namespace {

std::string Join(const std::vector<std::string>& words) {
  std::string out;
  for (const std::string& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace

SpeakerComparison CompareSpeakers(PragmaticReasoner& reasoner,
                                  const SpeakerModel& speaker,
                                  const std::vector<LabeledContext>& contexts,
                                  Rng& rng, const ColorTermDepths& depths) {
  SpeakerComparison out;
  for (const LabeledContext& lc : contexts) {
    const SampledContext& ctx = lc.context;
    const UtteranceSample s0 = speaker.Sample(ctx.colors, ctx.target_index, rng);
    out.s0_samples.push_back({Join(s0.Words(speaker.vocab())), lc.condition});
    out.s1_samples.push_back(
        {Join(reasoner.SampleS1(ctx.colors, ctx.target_index, rng)),
         lc.condition});
  }
  out.s0 = ComputeBehavior(out.s0_samples, depths);
  out.s1 = ComputeBehavior(out.s1_samples, depths);
  return out;
}

}  // namespace pragref
