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

// Hand-written template speaker used to generate a stand-in corpus when the
// human data is unavailable.
//
// The speaker perceives each color, with noise, as a term (usually the
// nearest prototype in CIELAB) plus coarse lightness and chroma levels
// relative to that term's prototype. How much detail it gives depends on the
// smallest pairwise distance in the context: widely separated colors mostly
// get the bare term, close ones a modified form ("light blue", "darker blue",
// "blue not the dark one", "dull blue") or a superlative or compound
// ("lightest blue", "dull dark blue"). Every form has context-free truth
// conditions on the levels and is only said when true of the target percept.
// Forms that rule out every distractor sharing the target's term get extra
// weight. The utterance distribution is small and finite, so the
// Bayes-optimal listener can be enumerated exactly.

#ifndef PRAGREF_SYNTH_H_
#define PRAGREF_SYNTH_H_

#include <array>
#include <map>
#include <string>
#include <vector>

#include "pragref/colorspace.h"
#include "pragref/corpus.h"

namespace pragref {

struct TemplateTerm {
  std::string name;
  Color prototype;
};

const std::vector<TemplateTerm>& TemplateTerms();

// Index into TemplateTerms() of the prototype nearest in Lab.
int NearestTerm(const Color& c);

// One way the speaker may perceive a color: a term plus the lightness level
// (-2 darkest .. 2 lightest) and chroma level (-1 dull, 0, 1 bright) relative
// to that term's prototype.
struct TemplatePercept {
  int term = 0;
  int light = 0;
  int chroma = 0;
  double probability = 0.0;
};

// Finite distribution over percepts. The term is a softmax over negative
// squared prototype distances; level offsets are read with Gaussian noise.
std::vector<TemplatePercept> PerceiveColor(const Color& c);

// True when some percept of `c` makes the utterance literally true.
// Utterances the template cannot produce are false of every color.
bool TemplateTrue(const std::string& utterance, const Color& c);

using UtteranceDistribution = std::map<std::string, double>;

// P(utterance | colors, target) under the template speaker. Probabilities sum
// to 1 and every utterance in the support is true of the target.
UtteranceDistribution TemplateUtterances(const Context& colors, int target);

// Posterior over target indices for an utterance, uniform prior. Returns a
// uniform distribution when no index could have produced the utterance.
std::array<double, kContextSize> TemplateListener(const Context& colors,
                                                  const std::string& utterance);

// Expected accuracy of the Bayes-optimal listener on one observed trial: the
// share of maximum-posterior indices equal to `target` (ties split credit).
double BayesCredit(const Context& colors, int target,
                   const std::string& utterance);

struct SynthOptions {
  int rounds_per_game = 50;
  ConditionThresholds thresholds;
};

// Conditions cycle far, split, close. Each trial carries one speaker message
// sampled from the template speaker and a click sampled from the Bayes
// posterior.
std::vector<ContextTrial> SynthCorpus(int n_trials, Rng& rng,
                                      const SynthOptions& options = {});

}  // namespace pragref

#endif  // PRAGREF_SYNTH_H_
