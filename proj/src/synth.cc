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

#include "pragref/synth.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "pragref/error.h"

namespace pragref {

namespace {

// Boundaries between lightness levels (L* offset from the term prototype)
// and chroma levels (C*ab offset).
constexpr double kLightBounds[] = {-20.0, -8.0, 8.0, 20.0};
constexpr double kChromaBounds[] = {-15.0, 15.0};

// Perceptual noise of the speaker. Term choice is a softmax over negative
// squared Lab distances to the prototypes at this temperature; level offsets
// are read with additive Gaussian noise.
constexpr double kTermSoftness = 6.0;
constexpr double kLightNoise = 3.0;
constexpr double kChromaNoise = 4.0;
// Percept outcomes below this probability are dropped and the rest
// renormalized, so enumeration stays small and exact.
constexpr double kMinPerceptProb = 1e-3;

// Detail level from the smallest pairwise CIEDE2000 distance in the context:
// level 2 below about kFineDistance, level 0 above about kCoarseDistance.
constexpr double kFineDistance = 10.0;
constexpr double kCoarseDistance = 20.0;
constexpr double kLevelSoftness = 3.0;

// Weight multiplier for forms false of every distractor sharing the
// target's term. 1 would make the speaker blind to the distractors.
constexpr double kPragmaticWeight = 4.0;

std::vector<TemplateTerm> MakeTerms() {
  auto t = [](const char* name, double r, double g, double b) {
    return TemplateTerm{name, Color::FromRgb(r, g, b)};
  };
  return {
      t("red", 0.80, 0.10, 0.12),    t("orange", 0.95, 0.55, 0.10),
      t("yellow", 0.95, 0.90, 0.15), t("green", 0.20, 0.60, 0.20),
      t("blue", 0.15, 0.30, 0.85),   t("purple", 0.50, 0.20, 0.65),
      t("pink", 0.95, 0.60, 0.75),   t("brown", 0.50, 0.30, 0.15),
      t("gray", 0.50, 0.50, 0.50),   t("black", 0.08, 0.08, 0.08),
      t("white", 0.95, 0.95, 0.95),  t("teal", 0.10, 0.55, 0.55),
      t("navy", 0.08, 0.10, 0.40),   t("maroon", 0.45, 0.05, 0.15),
      t("lime", 0.60, 0.90, 0.20),   t("magenta", 0.85, 0.15, 0.75),
      t("tan", 0.80, 0.70, 0.50),
  };
}

const std::vector<LabColor>& PrototypeLab() {
  static const std::vector<LabColor> labs = [] {
    std::vector<LabColor> out;
    for (const TemplateTerm& t : TemplateTerms()) {
      out.push_back(RgbToLab(t.prototype));
    }
    return out;
  }();
  return labs;
}

double Chroma(const LabColor& lab) { return std::hypot(lab.a, lab.b); }

double SquaredDistance(const LabColor& x, const LabColor& y) {
  const double dl = x.l - y.l, da = x.a - y.a, db = x.b - y.b;
  return dl * dl + da * da + db * db;
}

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Drops entries below kMinPerceptProb and renormalizes the rest.
void Prune(std::vector<std::pair<int, double>>& dist) {
  dist.erase(std::remove_if(dist.begin(), dist.end(),
                            [](const auto& e) { return e.second < kMinPerceptProb; }),
             dist.end());
  double total = 0.0;
  for (const auto& e : dist) total += e.second;
  for (auto& e : dist) e.second /= total;
}

// Distribution over levels lo..lo+n for an offset read with Gaussian noise.
template <std::size_t N>
std::vector<std::pair<int, double>> Levels(double offset, const double (&bounds)[N],
                                           double noise, int lo) {
  std::vector<std::pair<int, double>> out;
  double below = 0.0;
  for (std::size_t k = 0; k <= N; ++k) {
    const double upto = k < N ? NormalCdf((bounds[k] - offset) / noise) : 1.0;
    out.emplace_back(lo + static_cast<int>(k), upto - below);
    below = upto;
  }
  Prune(out);
  return out;
}

struct Modifier {
  const char* surface;  // "{}" stands for the term
  int level;            // 0 bare, 1 single modifier, 2 superlative or compound
  double weight;
  // Truth in terms of lightness level (-2..2) and chroma level (-1..1).
  bool (*holds)(int light, int chroma);
};

// Every utterance form with its literal meaning. The bare term is first.
const std::vector<Modifier>& Modifiers() {
  static const std::vector<Modifier> mods = {
      {"{}", 0, 1.0, [](int, int) { return true; }},
      {"light {}", 1, 3.0, [](int l, int) { return l >= 1; }},
      {"dark {}", 1, 3.0, [](int l, int) { return l <= -1; }},
      {"lighter {}", 1, 2.0, [](int l, int) { return l >= 1; }},
      {"darker {}", 1, 2.0, [](int l, int) { return l <= -1; }},
      {"{} not the dark one", 1, 1.0, [](int l, int) { return l >= 0; }},
      {"{} not the light one", 1, 1.0, [](int l, int) { return l <= 0; }},
      {"bright {}", 1, 2.0, [](int, int c) { return c == 1; }},
      {"dull {}", 1, 2.0, [](int, int c) { return c == -1; }},
      {"lightest {}", 2, 4.0, [](int l, int) { return l == 2; }},
      {"darkest {}", 2, 4.0, [](int l, int) { return l == -2; }},
      {"bright light {}", 2, 2.0, [](int l, int c) { return c == 1 && l >= 1; }},
      {"bright dark {}", 2, 2.0, [](int l, int c) { return c == 1 && l <= -1; }},
      {"dull light {}", 2, 2.0, [](int l, int c) { return c == -1 && l >= 1; }},
      {"dull dark {}", 2, 2.0, [](int l, int c) { return c == -1 && l <= -1; }},
  };
  return mods;
}

// Level-1 forms stay available at level 2 with this weight factor.
constexpr double kCoarserFormFactor = 0.5;

std::string Realize(const Modifier& m, const std::string& term) {
  std::string out = m.surface;
  out.replace(out.find("{}"), 2, term);
  return out;
}

// (term, modifier) of every producible utterance.
const std::map<std::string, std::pair<int, int>>& UtteranceIndex() {
  static const auto index = [] {
    std::map<std::string, std::pair<int, int>> out;
    const auto& terms = TemplateTerms();
    for (int t = 0; t < static_cast<int>(terms.size()); ++t) {
      for (int m = 0; m < static_cast<int>(Modifiers().size()); ++m) {
        out[Realize(Modifiers()[m], terms[t].name)] = {t, m};
      }
    }
    return out;
  }();
  return index;
}

using Percepts = std::array<const TemplatePercept*, kContextSize>;

double Logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// P(detail level | context). Depends on the colors only, never on which one
// is the target.
std::array<double, 3> DetailLevels(const Context& colors) {
  const auto d = PairwiseDistances(colors);
  const double dmin = *std::min_element(d.begin(), d.end());
  const double fine = Logistic((kFineDistance - dmin) / kLevelSoftness);
  const double coarse =
      (1.0 - fine) * Logistic((dmin - kCoarseDistance) / kLevelSoftness);
  return {coarse, 1.0 - fine - coarse, fine};
}

// Speaker's distribution over modifier indices at one detail level, given
// how it perceives the three colors.
std::vector<double> ModifierDistribution(const Percepts& d, int target,
                                         int level) {
  const auto& mods = Modifiers();
  std::vector<double> dist(mods.size(), 0.0);
  if (level == 0) {
    dist[0] = 1.0;
    return dist;
  }
  const TemplatePercept& t = *d[target];
  double total = 0.0;
  for (std::size_t k = 1; k < mods.size(); ++k) {
    const Modifier& m = mods[k];
    if (m.level > level || !m.holds(t.light, t.chroma)) continue;
    double w = m.weight * (m.level < level ? kCoarserFormFactor : 1.0);
    bool shared = false, excludes = true;
    for (int i = 0; i < kContextSize; ++i) {
      if (i == target || d[i]->term != t.term) continue;
      shared = true;
      excludes = excludes && !m.holds(d[i]->light, d[i]->chroma);
    }
    if (shared && excludes) w *= kPragmaticWeight;
    dist[k] = w;
    total += w;
  }
  for (double& p : dist) p /= total;
  return dist;
}

// Mixture over detail levels.
std::vector<double> ModifierDistribution(const Percepts& d, int target,
                                         const std::array<double, 3>& levels) {
  std::vector<double> dist(Modifiers().size(), 0.0);
  for (int level = 0; level < 3; ++level) {
    if (levels[level] <= 0.0) continue;
    const std::vector<double> part = ModifierDistribution(d, target, level);
    for (std::size_t k = 0; k < dist.size(); ++k) dist[k] += levels[level] * part[k];
  }
  return dist;
}

// Calls fn(percepts, probability) for every joint percept of the context.
template <typename Fn>
void ForEachJointPercept(const Context& colors, Fn fn) {
  std::array<std::vector<TemplatePercept>, kContextSize> per;
  for (int i = 0; i < kContextSize; ++i) per[i] = PerceiveColor(colors[i]);
  for (const auto& a : per[0]) {
    for (const auto& b : per[1]) {
      for (const auto& c : per[2]) {
        fn(Percepts{&a, &b, &c}, a.probability * b.probability * c.probability);
      }
    }
  }
}

double UtteranceProbability(const Context& colors, int target, int term,
                            int mod) {
  const auto levels = DetailLevels(colors);
  double total = 0.0;
  ForEachJointPercept(colors, [&](const Percepts& d, double p) {
    if (d[target]->term != term) return;
    total += p * ModifierDistribution(d, target, levels)[mod];
  });
  return total;
}

}  // namespace

const std::vector<TemplateTerm>& TemplateTerms() {
  static const std::vector<TemplateTerm> terms = MakeTerms();
  return terms;
}

int NearestTerm(const Color& c) {
  const LabColor lab = RgbToLab(c);
  const auto& protos = PrototypeLab();
  int best = 0;
  for (int i = 1; i < static_cast<int>(protos.size()); ++i) {
    if (SquaredDistance(lab, protos[i]) < SquaredDistance(lab, protos[best])) {
      best = i;
    }
  }
  return best;
}

std::vector<TemplatePercept> PerceiveColor(const Color& c) {
  const LabColor lab = RgbToLab(c);
  const auto& protos = PrototypeLab();
  const double nearest = SquaredDistance(lab, protos[NearestTerm(c)]);
  std::vector<std::pair<int, double>> terms;
  for (int i = 0; i < static_cast<int>(protos.size()); ++i) {
    terms.emplace_back(i, std::exp(-(SquaredDistance(lab, protos[i]) - nearest) /
                                   (2.0 * kTermSoftness * kTermSoftness)));
  }
  Prune(terms);
  std::vector<TemplatePercept> out;
  for (const auto& [term, pt] : terms) {
    const auto light = Levels(lab.l - protos[term].l, kLightBounds, kLightNoise, -2);
    const auto chroma = Levels(Chroma(lab) - Chroma(protos[term]), kChromaBounds,
                               kChromaNoise, -1);
    for (const auto& [l, pl] : light) {
      for (const auto& [k, pk] : chroma) out.push_back({term, l, k, pt * pl * pk});
    }
  }
  return out;
}

bool TemplateTrue(const std::string& utterance, const Color& c) {
  auto it = UtteranceIndex().find(utterance);
  if (it == UtteranceIndex().end()) return false;
  const auto [term, mod] = it->second;
  for (const TemplatePercept& p : PerceiveColor(c)) {
    if (p.term == term && Modifiers()[mod].holds(p.light, p.chroma)) return true;
  }
  return false;
}

UtteranceDistribution TemplateUtterances(const Context& colors, int target) {
  if (target < 0 || target >= kContextSize) {
    throw IndexOutOfRange("target index " + std::to_string(target));
  }
  const auto levels = DetailLevels(colors);
  std::map<std::pair<int, int>, double> acc;
  ForEachJointPercept(colors, [&](const Percepts& d, double p) {
    const std::vector<double> dist = ModifierDistribution(d, target, levels);
    for (std::size_t k = 0; k < dist.size(); ++k) {
      if (dist[k] > 0.0) acc[{d[target]->term, static_cast<int>(k)}] += p * dist[k];
    }
  });
  UtteranceDistribution out;
  for (const auto& [key, p] : acc) {
    out[Realize(Modifiers()[key.second], TemplateTerms()[key.first].name)] = p;
  }
  return out;
}

std::array<double, kContextSize> TemplateListener(const Context& colors,
                                                  const std::string& utterance) {
  std::array<double, kContextSize> post{};
  auto it = UtteranceIndex().find(utterance);
  double total = 0.0;
  if (it != UtteranceIndex().end()) {
    for (int i = 0; i < kContextSize; ++i) {
      post[i] = UtteranceProbability(colors, i, it->second.first,
                                     it->second.second);
      total += post[i];
    }
  }
  for (double& p : post) p = total > 0.0 ? p / total : 1.0 / kContextSize;
  return post;
}

double BayesCredit(const Context& colors, int target,
                   const std::string& utterance) {
  const auto post = TemplateListener(colors, utterance);
  const double best = *std::max_element(post.begin(), post.end());
  int ties = 0;
  for (double p : post) ties += p == best ? 1 : 0;
  return post[target] == best ? 1.0 / ties : 0.0;
}

std::vector<ContextTrial> SynthCorpus(int n_trials, Rng& rng,
                                      const SynthOptions& options) {
  static constexpr Condition kCycle[] = {Condition::kFar, Condition::kSplit,
                                         Condition::kClose};
  std::vector<ContextTrial> trials;
  trials.reserve(std::max(n_trials, 0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Index drawn from a vector of probabilities summing to 1.
  auto draw = [&](const auto& probs, auto weight) {
    const double u = unit(rng);
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
      if (weight(probs[k]) <= 0.0) continue;
      acc += weight(probs[k]);
      last = k;
      if (u < acc) return k;
    }
    return last;
  };
  auto id = [](double p) { return p; };
  for (int i = 0; i < n_trials; ++i) {
    const Condition cond = kCycle[i % 3];
    SampledContext ctx = SampleContext(cond, options.thresholds, rng);
    std::array<std::vector<TemplatePercept>, kContextSize> per;
    Percepts seen;
    for (int k = 0; k < kContextSize; ++k) {
      per[k] = PerceiveColor(ctx.colors[k]);
      seen[k] = &per[k][draw(per[k], [](const TemplatePercept& p) {
        return p.probability;
      })];
    }
    const std::vector<double> mods =
        ModifierDistribution(seen, ctx.target_index, DetailLevels(ctx.colors));
    const Modifier& mod = Modifiers()[draw(mods, id)];

    ContextTrial t;
    t.game_id = fmt::format("synth-{:04d}", i / options.rounds_per_game);
    t.round = i % options.rounds_per_game + 1;
    t.colors = ctx.colors;
    t.target_index = ctx.target_index;
    t.condition = cond;
    t.speaker_text.push_back(
        Realize(mod, TemplateTerms()[seen[ctx.target_index]->term].name));
    const auto post = TemplateListener(ctx.colors, t.speaker_text[0]);
    t.clicked_index = static_cast<int>(draw(post, id));
    trials.push_back(std::move(t));
  }
  return trials;
}

}  // namespace pragref
