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

#include "pragref/rsa.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "pragref/error.h"

namespace pragref {

using nlohmann::json;

namespace {

Rational ParseRational(const json& v) {
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return Rational(std::stoll(s));
      return Rational(std::stoll(s.substr(0, slash)),
                      std::stoll(s.substr(slash + 1)));
    } catch (const std::exception&) {
      throw UsageError("bad rational '" + s + "'");
    }
  }
  if (v.is_number()) {
    // Decimal weights are taken to micro precision.
    constexpr std::int64_t kScale = 1'000'000;
    return Rational(std::llround(v.get<double>() * kScale), kScale);
  }
  throw UsageError("prior entries must be numbers or \"p/q\" strings");
}

template <typename T>
struct Arith;

template <>
struct Arith<Rational> {
  static Rational FromPrior(const Rational& r) { return r; }
  static Rational Cost(double cost) {
    if (cost != 0.0) {
      throw std::invalid_argument("exact arithmetic needs zero costs");
    }
    return Rational(1);
  }
  static Rational Informativity(const Rational& l0, double alpha, double cost) {
    if (alpha != std::floor(alpha) || alpha < 0.0) {
      throw std::invalid_argument("exact arithmetic needs integral alpha");
    }
    if (l0 == Rational(0)) return Rational(0);
    Rational out = Cost(cost);
    for (int i = 0; i < static_cast<int>(alpha); ++i) out *= l0;
    return out;
  }
};

template <>
struct Arith<double> {
  static double FromPrior(const Rational& r) { return ToDouble(r); }
  static double Cost(double cost) { return std::exp(-cost); }
  static double Informativity(double l0, double alpha, double cost) {
    if (l0 == 0.0) return 0.0;
    return std::exp(alpha * std::log(l0) - cost);
  }
};

// Normalizes in place; returns false when everything is zero.
template <typename T>
bool Normalize(std::vector<T>& v) {
  T total(0);
  for (const T& x : v) total += x;
  if (total == T(0)) return false;
  for (T& x : v) x /= total;
  return true;
}

void CheckUtterance(const Lexicon& lex, int u) {
  if (u < 0 || u >= lex.num_utterances()) {
    throw IndexOutOfRange("utterance index " + std::to_string(u));
  }
}

void CheckReferent(const Lexicon& lex, int t) {
  if (t < 0 || t >= lex.num_referents()) {
    throw IndexOutOfRange("referent index " + std::to_string(t));
  }
}

bool Vacuous(const Lexicon& lex, int u) {
  const auto& row = lex.truth[u];
  return std::all_of(row.begin(), row.end(), [](int v) { return v == 0; });
}

// Listener ∝ speaker(u | t) P(t).
template <typename T, typename SpeakerFn>
Distribution<T> InvertSpeaker(const Lexicon& lex, int u, SpeakerFn speaker) {
  Distribution<T> out(lex.num_referents(), T(0));
  for (int t = 0; t < lex.num_referents(); ++t) {
    bool any_true = false;
    for (int v = 0; v < lex.num_utterances(); ++v) any_true |= lex.truth[v][t] != 0;
    if (!any_true) continue;
    out[t] = speaker(t)[u] * Arith<T>::FromPrior(lex.prior[t]);
  }
  if (!Normalize(out)) {
    throw VacuousUtterance("'" + lex.utterances[u] + "' fits no referent");
  }
  return out;
}

}  // namespace

double ToDouble(const Rational& r) {
  return static_cast<double>(r.numerator()) /
         static_cast<double>(r.denominator());
}

std::string ToString(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

int Lexicon::UtteranceIndex(const std::string& u) const {
  auto it = std::find(utterances.begin(), utterances.end(), u);
  if (it == utterances.end()) throw UsageError("unknown utterance '" + u + "'");
  return static_cast<int>(it - utterances.begin());
}

bool Lexicon::ZeroCost() const {
  return std::all_of(costs.begin(), costs.end(),
                     [](double c) { return c == 0.0; });
}

void Lexicon::Validate() const {
  if (utterances.empty() || referents.empty()) {
    throw UsageError("lexicon needs utterances and referents");
  }
  if (truth.size() != utterances.size()) {
    throw UsageError("truth needs one row per utterance");
  }
  for (const auto& row : truth) {
    if (row.size() != referents.size()) {
      throw UsageError("truth rows need one entry per referent");
    }
    for (int v : row) {
      if (v != 0 && v != 1) throw UsageError("truth values must be 0 or 1");
    }
  }
  if (costs.size() != utterances.size()) {
    throw UsageError("costs need one entry per utterance");
  }
  if (prior.size() != referents.size()) {
    throw UsageError("prior needs one entry per referent");
  }
  Rational total(0);
  for (const Rational& p : prior) {
    if (p < Rational(0)) throw UsageError("prior entries must be non-negative");
    total += p;
  }
  if (total != Rational(1)) throw UsageError("prior must sum to 1");
}

Lexicon Lexicon::FromJson(const json& j) {
  Lexicon lex;
  try {
    lex.utterances = j.at("utterances").get<std::vector<std::string>>();
    lex.truth = j.at("truth").get<std::vector<std::vector<int>>>();
    if (j.contains("referents")) {
      lex.referents = j["referents"].get<std::vector<std::string>>();
    } else if (!lex.truth.empty()) {
      for (std::size_t t = 0; t < lex.truth[0].size(); ++t) {
        lex.referents.push_back("r" + std::to_string(t));
      }
    }
    lex.costs = j.contains("costs") ? j["costs"].get<std::vector<double>>()
                                    : std::vector<double>(lex.utterances.size(), 0.0);
  } catch (const json::exception& e) {
    throw UsageError(std::string("lexicon: ") + e.what());
  }
  if (j.contains("prior")) {
    Rational total(0);
    for (const json& v : j["prior"]) {
      lex.prior.push_back(ParseRational(v));
      total += lex.prior.back();
    }
    if (total <= Rational(0)) throw UsageError("prior weights must be positive in sum");
    for (Rational& p : lex.prior) p /= total;
  } else {
    const auto n = static_cast<std::int64_t>(lex.referents.size());
    lex.prior.assign(lex.referents.size(), Rational(1, std::max<std::int64_t>(n, 1)));
  }
  lex.Validate();
  return lex;
}

Lexicon Lexicon::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
  return FromJson(j);
}

json Lexicon::ToJson() const {
  json prior_json = json::array();
  for (const Rational& p : prior) prior_json.push_back(ToString(p));
  return {{"utterances", utterances}, {"referents", referents},
          {"truth", truth},           {"costs", costs},
          {"prior", prior_json}};
}

template <typename T>
Distribution<T> ExactL0(const Lexicon& lex, int u) {
  CheckUtterance(lex, u);
  Distribution<T> out(lex.num_referents(), T(0));
  for (int t = 0; t < lex.num_referents(); ++t) {
    if (lex.truth[u][t]) out[t] = Arith<T>::FromPrior(lex.prior[t]);
  }
  if (!Normalize(out)) {
    throw VacuousUtterance("'" + lex.utterances[u] + "' is true of nothing");
  }
  return out;
}

template <typename T>
Distribution<T> ExactS1(const Lexicon& lex, int t, double alpha) {
  CheckReferent(lex, t);
  Distribution<T> out(lex.num_utterances(), T(0));
  for (int u = 0; u < lex.num_utterances(); ++u) {
    if (!lex.truth[u][t] || Vacuous(lex, u)) continue;
    out[u] = Arith<T>::Informativity(ExactL0<T>(lex, u)[t], alpha, lex.costs[u]);
  }
  if (!Normalize(out)) {
    throw VacuousUtterance("no utterance is true of '" + lex.referents[t] + "'");
  }
  return out;
}

template <typename T>
Distribution<T> ExactL2(const Lexicon& lex, int u, double alpha) {
  CheckUtterance(lex, u);
  return InvertSpeaker<T>(lex, u,
                          [&](int t) { return ExactS1<T>(lex, t, alpha); });
}

template <typename T>
Distribution<T> ExactS0(const Lexicon& lex, int t) {
  CheckReferent(lex, t);
  Distribution<T> out(lex.num_utterances(), T(0));
  for (int u = 0; u < lex.num_utterances(); ++u) {
    if (lex.truth[u][t]) out[u] = Arith<T>::Cost(lex.costs[u]);
  }
  if (!Normalize(out)) {
    throw VacuousUtterance("no utterance is true of '" + lex.referents[t] + "'");
  }
  return out;
}

template <typename T>
Distribution<T> ExactL1(const Lexicon& lex, int u) {
  CheckUtterance(lex, u);
  return InvertSpeaker<T>(lex, u, [&](int t) { return ExactS0<T>(lex, t); });
}

template Distribution<Rational> ExactL0(const Lexicon&, int);
template Distribution<double> ExactL0(const Lexicon&, int);
template Distribution<Rational> ExactS1(const Lexicon&, int, double);
template Distribution<double> ExactS1(const Lexicon&, int, double);
template Distribution<Rational> ExactL2(const Lexicon&, int, double);
template Distribution<double> ExactL2(const Lexicon&, int, double);
template Distribution<Rational> ExactS0(const Lexicon&, int);
template Distribution<double> ExactS0(const Lexicon&, int);
template Distribution<Rational> ExactL1(const Lexicon&, int);
template Distribution<double> ExactL1(const Lexicon&, int);

bool ExactArithmeticApplies(const Lexicon& lex, double alpha) {
  return alpha >= 0.0 && alpha == std::floor(alpha) && alpha <= 64.0 &&
         lex.ZeroCost();
}

namespace {

template <typename T>
json Cell(const T& v);

template <>
json Cell(const Rational& v) {
  return {{"p", ToDouble(v)}, {"exact", ToString(v)}};
}

template <>
json Cell(const double& v) {
  return {{"p", v}};
}

// Rows keyed by utterance for listeners and by referent for speakers. A
// vacuous row is null.
template <typename T>
json Report(const Lexicon& lex, double alpha) {
  auto listener_table = [&](auto fn) {
    json table = json::object();
    for (int u = 0; u < lex.num_utterances(); ++u) {
      json row = json::array();
      try {
        for (const T& p : fn(u)) row.push_back(Cell(p));
      } catch (const VacuousUtterance&) {
        row = nullptr;
      }
      table[lex.utterances[u]] = row;
    }
    return table;
  };
  auto speaker_table = [&](auto fn) {
    json table = json::object();
    for (int t = 0; t < lex.num_referents(); ++t) {
      json row = json::object();
      try {
        const Distribution<T> d = fn(t);
        for (int u = 0; u < lex.num_utterances(); ++u) {
          row[lex.utterances[u]] = Cell(d[u]);
        }
      } catch (const VacuousUtterance&) {
        row = nullptr;
      }
      table[lex.referents[t]] = row;
    }
    return table;
  };
  return {
      {"l0", listener_table([&](int u) { return ExactL0<T>(lex, u); })},
      {"s1", speaker_table([&](int t) { return ExactS1<T>(lex, t, alpha); })},
      {"l2", listener_table([&](int u) { return ExactL2<T>(lex, u, alpha); })},
      {"s0", speaker_table([&](int t) { return ExactS0<T>(lex, t); })},
      {"l1", listener_table([&](int u) { return ExactL1<T>(lex, u); })},
  };
}

}  // namespace

json ExactRsaReport(const Lexicon& lex, double alpha) {
  const bool exact = ExactArithmeticApplies(lex, alpha);
  json out = exact ? Report<Rational>(lex, alpha) : Report<double>(lex, alpha);
  out["alpha"] = alpha;
  out["exact_arithmetic"] = exact;
  out["referents"] = lex.referents;
  return out;
}

void PragmaticsConfig::Validate() const {
  if (alpha < 0.0) throw UsageError("alpha must be non-negative");
  if (m < 1 || n < 1) throw UsageError("m and n must be at least 1");
  for (double w : {alpha, beta_a, beta_b, gamma}) {
    if (!std::isfinite(w)) throw UsageError("pragmatic weights must be finite");
  }
}

json PragmaticsConfig::ToJson() const {
  return {{"alpha", alpha}, {"m", m},           {"n", n},
          {"beta_a", beta_a}, {"beta_b", beta_b}, {"gamma", gamma}};
}

ListenerDistribution Blend(const ListenerDistribution& p,
                           const ListenerDistribution& q, double w) {
  nn::Vector logits(kContextSize);
  for (int k = 0; k < kContextSize; ++k) {
    logits(k) = w * std::log(std::max(p[k], kProbabilityFloor)) +
                (1.0 - w) * std::log(std::max(q[k], kProbabilityFloor));
  }
  const nn::Vector out = nn::Softmax(logits);
  return {out(0), out(1), out(2)};
}

std::vector<double> NeuralS1LogProbs(
    const std::vector<std::array<double, kContextSize>>& log_l0, int target,
    double alpha) {
  if (log_l0.empty()) throw UsageError("alternative set is empty");
  if (target < 0 || target >= kContextSize) {
    throw IndexOutOfRange("target index " + std::to_string(target));
  }
  nn::Vector scores(static_cast<Eigen::Index>(log_l0.size()));
  for (std::size_t k = 0; k < log_l0.size(); ++k) {
    scores(k) = alpha * log_l0[k][target];
  }
  const nn::Vector out = nn::LogSoftmax(scores);
  return {out.data(), out.data() + out.size()};
}

Rng TrialRng(std::uint64_t seed, std::uint64_t trial_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial_id),
                    static_cast<std::uint32_t>(trial_id >> 32)};
  return Rng(seq);
}

const ListenerDistribution& PragmaticDistributions::Get(
    std::string_view name) const {
  if (name == "L0") return l0;
  if (name == "L1") return l1;
  if (name == "L2") return l2;
  if (name == "La") return la;
  if (name == "Lb") return lb;
  if (name == "Le") return le;
  throw UsageError("unknown listener '" + std::string(name) + "'");
}

PragmaticReasoner::PragmaticReasoner(const ListenerModel& listener,
                                     const SpeakerModel& speaker,
                                     const PragmaticsConfig& config)
    : listener_(listener), speaker_(speaker), config_(config) {
  config_.Validate();
}

const QuadraticForm& PragmaticReasoner::Quadratic(
    const std::vector<std::string>& tokens) {
  std::vector<int> ids = listener_.Encode(tokens);
  auto it = cache_.find(ids);
  if (it == cache_.end()) {
    QuadraticForm q = listener_.Quadratic(ids);
    it = cache_.emplace(std::move(ids), std::move(q)).first;
  }
  return it->second;
}

std::array<double, kContextSize> PragmaticReasoner::LogL0(
    const std::vector<std::string>& tokens, const Context& colors) {
  std::array<double, kContextSize> out;
  if (tokens.empty()) {
    // An empty sample carries no information.
    out.fill(-std::log(static_cast<double>(kContextSize)));
    return out;
  }
  const QuadraticForm& q = Quadratic(tokens);
  nn::Vector scores(kContextSize);
  for (int k = 0; k < kContextSize; ++k) {
    scores(k) = QuadraticScore(q, ComputeFourierFeatures(colors[k]));
  }
  const nn::Vector logp = nn::LogSoftmax(scores);
  for (int k = 0; k < kContextSize; ++k) out[k] = logp(k);
  return out;
}

ListenerDistribution PragmaticReasoner::L0(
    const std::vector<std::string>& tokens, const Context& colors) {
  if (tokens.empty()) throw EmptyUtterance("listener input has no tokens");
  const auto logp = LogL0(tokens, colors);
  return {std::exp(logp[0]), std::exp(logp[1]), std::exp(logp[2])};
}

ListenerDistribution PragmaticReasoner::L1(
    const std::vector<std::string>& speaker_tokens,
    const Context& colors) const {
  const std::vector<int> ids = speaker_.Encode(speaker_tokens);
  nn::Vector scores(kContextSize);
  for (int t = 0; t < kContextSize; ++t) {
    scores(t) = speaker_.LogProb(ids, colors, t);
  }
  const nn::Vector p = nn::Softmax(scores);
  return {p(0), p(1), p(2)};
}

std::vector<std::vector<std::string>> PragmaticReasoner::SampleAlternatives(
    const std::vector<std::string>& observed, const Context& colors,
    Rng& rng) const {
  std::vector<std::vector<std::string>> alts = {observed};
  for (int t = 0; t < kContextSize; ++t) {
    for (const UtteranceSample& s :
         speaker_.SampleMany(colors, t, rng, config_.m)) {
      alts.push_back(SpeakerToListenerTokens(s.Words(speaker_.vocab())));
    }
  }
  return alts;
}

ListenerDistribution PragmaticReasoner::L2Given(
    const std::vector<std::vector<std::string>>& alternatives,
    const Context& colors) {
  std::vector<std::array<double, kContextSize>> log_l0;
  log_l0.reserve(alternatives.size());
  for (const auto& alt : alternatives) log_l0.push_back(LogL0(alt, colors));
  nn::Vector scores(kContextSize);
  for (int t = 0; t < kContextSize; ++t) {
    scores(t) = NeuralS1LogProbs(log_l0, t, config_.alpha)[0];
  }
  const nn::Vector p = nn::Softmax(scores);
  return {p(0), p(1), p(2)};
}

ListenerDistribution PragmaticReasoner::L2(
    const std::vector<std::string>& listener_tokens, const Context& colors,
    Rng& rng) {
  if (listener_tokens.empty()) {
    throw EmptyUtterance("listener input has no tokens");
  }
  ListenerDistribution mean{};
  for (int r = 0; r < config_.n; ++r) {
    const ListenerDistribution d =
        L2Given(SampleAlternatives(listener_tokens, colors, rng), colors);
    for (int k = 0; k < kContextSize; ++k) mean[k] += d[k] / config_.n;
  }
  return mean;
}

PragmaticDistributions PragmaticReasoner::Evaluate(const ContextTrial& trial,
                                                   Rng& rng) {
  const auto listener_tokens =
      Preprocess(trial.speaker_text, TokenizeMode::kListener);
  const auto speaker_tokens =
      Preprocess(trial.speaker_text, TokenizeMode::kSpeaker);
  PragmaticDistributions out;
  out.l0 = L0(listener_tokens, trial.colors);
  out.l1 = L1(speaker_tokens, trial.colors);
  out.l2 = L2(listener_tokens, trial.colors, rng);
  out.la = Blend(out.l0, out.l1, config_.beta_a);
  out.lb = Blend(out.l0, out.l2, config_.beta_b);
  out.le = Blend(out.la, out.lb, config_.gamma);
  return out;
}

std::vector<std::string> PragmaticReasoner::SampleS1(const Context& colors,
                                                     int target, Rng& rng) {
  const std::vector<UtteranceSample> pool = speaker_.SampleMany(
      colors, target, rng, kContextSize * config_.m);
  std::vector<std::vector<std::string>> words;
  std::vector<std::array<double, kContextSize>> log_l0;
  for (const UtteranceSample& s : pool) {
    words.push_back(s.Words(speaker_.vocab()));
    log_l0.push_back(LogL0(SpeakerToListenerTokens(words.back()), colors));
  }
  const std::vector<double> logp = NeuralS1LogProbs(log_l0, target, config_.alpha);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < logp.size(); ++k) {
    acc += std::exp(logp[k]);
    if (u < acc) return words[k];
  }
  return words.back();
}

}  // namespace pragref
