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

// Rational Speech Acts reasoning.
//
// The exact agents work over an explicit truth-conditional lexicon:
//
//   l0(t | u) ∝ L(u, t) P(t)
//   s1(u | t) ∝ exp(alpha log l0(t | u) - cost(u))
//   l2(t | u) ∝ s1(u | t) P(t)
//   s0(u | t) ∝ L(u, t) exp(-cost(u))
//   l1(t | u) ∝ s0(u | t) P(t)
//
// They are templates over the scalar type; with Rational they are exact and
// require an integral alpha and zero costs.
//
// The neural agents replace l0 with the trained listener and draw the
// alternative utterances from the trained speaker.

#ifndef PRAGREF_RSA_H_
#define PRAGREF_RSA_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "json.hpp"
#include "pragref/colorspace.h"
#include "pragref/corpus.h"
#include "pragref/listener.h"
#include "pragref/speaker.h"

namespace pragref {

// Compare only against other Rationals: mixed comparisons with plain
// integers recurse forever under C++20 rewritten operators.
using Rational = boost::rational<std::int64_t>;

struct Lexicon {
  std::vector<std::string> utterances;
  std::vector<std::string> referents;
  std::vector<std::vector<int>> truth;  // [utterance][referent], 0 or 1
  std::vector<double> costs;            // per utterance
  std::vector<Rational> prior;          // per referent, sums to 1

  int num_utterances() const { return static_cast<int>(utterances.size()); }
  int num_referents() const { return static_cast<int>(referents.size()); }
  int UtteranceIndex(const std::string& u) const;  // throws UsageError
  bool ZeroCost() const;

  // Throws UsageError on shape mismatches, non-binary truth values or a
  // prior that does not sum to 1.
  void Validate() const;

  // {"utterances": [...], "referents": [...], "truth": [[0/1, ...], ...],
  //  "costs": [...] (optional, default 0),
  //  "prior": [...] (optional, default uniform; numbers or "p/q" strings,
  //                  normalized)}
  static Lexicon FromJson(const nlohmann::json& j);
  static Lexicon Load(const std::filesystem::path& path);
  nlohmann::json ToJson() const;
};

double ToDouble(const Rational& r);
std::string ToString(const Rational& r);

template <typename T>
using Distribution = std::vector<T>;

// Throws VacuousUtterance when `u` is true of nothing.
template <typename T>
Distribution<T> ExactL0(const Lexicon& lex, int u);

// Distribution over utterances. Utterances false of t get probability 0.
// Throws VacuousUtterance when nothing is true of t, std::invalid_argument
// for a Rational call with non-integral alpha or nonzero costs.
template <typename T>
Distribution<T> ExactS1(const Lexicon& lex, int t, double alpha);

template <typename T>
Distribution<T> ExactL2(const Lexicon& lex, int u, double alpha);

template <typename T>
Distribution<T> ExactS0(const Lexicon& lex, int t);

template <typename T>
Distribution<T> ExactL1(const Lexicon& lex, int u);

extern template Distribution<Rational> ExactL0(const Lexicon&, int);
extern template Distribution<double> ExactL0(const Lexicon&, int);
extern template Distribution<Rational> ExactS1(const Lexicon&, int, double);
extern template Distribution<double> ExactS1(const Lexicon&, int, double);
extern template Distribution<Rational> ExactL2(const Lexicon&, int, double);
extern template Distribution<double> ExactL2(const Lexicon&, int, double);
extern template Distribution<Rational> ExactS0(const Lexicon&, int);
extern template Distribution<double> ExactS0(const Lexicon&, int);
extern template Distribution<Rational> ExactL1(const Lexicon&, int);
extern template Distribution<double> ExactL1(const Lexicon&, int);

// True when the Rational instantiation applies.
bool ExactArithmeticApplies(const Lexicon& lex, double alpha);

// Every agent of the exact model as JSON tables of probabilities, exact
// fractions included when rational arithmetic applies.
nlohmann::json ExactRsaReport(const Lexicon& lex, double alpha);

struct PragmaticsConfig {
  double alpha = 0.544;
  int m = 8;  // speaker samples per target index per alternative set
  int n = 8;  // alternative sets averaged
  double beta_a = 0.492;
  double beta_b = -0.15;
  double gamma = 0.491;

  void Validate() const;  // throws UsageError
  nlohmann::json ToJson() const;
};

inline constexpr double kProbabilityFloor = 1e-12;

// ∝ p^w q^(1-w) after flooring both at kProbabilityFloor.
ListenerDistribution Blend(const ListenerDistribution& p,
                           const ListenerDistribution& q, double w);

// S1 over an alternative multiset for one target:
//   log S1(alt_k | t) = alpha log L0(t | alt_k) - log sum_j L0(t | alt_j)^alpha
// `log_l0[k]` is the listener's log distribution for alternative k.
std::vector<double> NeuralS1LogProbs(
    const std::vector<std::array<double, kContextSize>>& log_l0, int target,
    double alpha);

// Derives an independent stream for one trial.
Rng TrialRng(std::uint64_t seed, std::uint64_t trial_id);

struct PragmaticDistributions {
  ListenerDistribution l0{}, l1{}, l2{}, la{}, lb{}, le{};

  const ListenerDistribution& Get(std::string_view name) const;
};

inline constexpr const char* kListenerNames[] = {"L0", "L1", "L2",
                                                 "La", "Lb", "Le"};

// Neural pragmatic agents over frozen base models. L0 quadratic forms are
// memoized by token sequence, so an instance is not safe to share between
// threads.
class PragmaticReasoner {
 public:
  PragmaticReasoner(const ListenerModel& listener, const SpeakerModel& speaker,
                    const PragmaticsConfig& config);

  const PragmaticsConfig& config() const { return config_; }

  // Log L0 over the context for listener-mode tokens.
  std::array<double, kContextSize> LogL0(const std::vector<std::string>& tokens,
                                         const Context& colors);
  ListenerDistribution L0(const std::vector<std::string>& tokens,
                          const Context& colors);

  // S0-based listener for speaker-mode tokens.
  ListenerDistribution L1(const std::vector<std::string>& speaker_tokens,
                          const Context& colors) const;

  // Alternatives for one replicate: the observed utterance followed by m
  // speaker samples per target index, as listener-mode tokens.
  std::vector<std::vector<std::string>> SampleAlternatives(
      const std::vector<std::string>& observed, const Context& colors,
      Rng& rng) const;

  // L2 over one explicit alternative multiset (observed utterance first).
  ListenerDistribution L2Given(
      const std::vector<std::vector<std::string>>& alternatives,
      const Context& colors);

  // Mean over n sampled alternative sets.
  ListenerDistribution L2(const std::vector<std::string>& listener_tokens,
                          const Context& colors, Rng& rng);

  PragmaticDistributions Evaluate(const ContextTrial& trial, Rng& rng);

  // Pragmatic speaker sample: a pool of 3m S0 samples for the target,
  // reweighted by L0(target | u)^alpha. Returns speaker-mode words.
  std::vector<std::string> SampleS1(const Context& colors, int target,
                                    Rng& rng);

 private:
  const QuadraticForm& Quadratic(const std::vector<std::string>& tokens);

  const ListenerModel& listener_;
  const SpeakerModel& speaker_;
  PragmaticsConfig config_;
  std::map<std::vector<int>, QuadraticForm> cache_;
};

}  // namespace pragref

#endif  // PRAGREF_RSA_H_
