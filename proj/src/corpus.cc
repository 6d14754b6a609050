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

#include "pragref/corpus.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "pragref/error.h"

namespace pragref {

using nlohmann::json;

std::string ContextTrial::Text() const {
  std::string out;
  for (const std::string& m : speaker_text) {
    if (!out.empty()) out += ' ';
    out += m;
  }
  return out;
}

namespace {

constexpr const char* kRequiredFields[] = {"game_id", "round", "colors",
                                           "target_index", "speaker_text"};

// Validates a parsed row. Returns an empty string on success, otherwise the
// reason the row is rejected.
std::string ParseTrial(const json& row, ContextTrial& t) {
  if (!row["game_id"].is_string()) return "game_id is not a string";
  t.game_id = row["game_id"].get<std::string>();
  if (!row["round"].is_number_integer()) return "round is not an integer";
  t.round = row["round"].get<int>();

  const json& colors = row["colors"];
  if (!colors.is_array() || colors.size() != kContextSize) {
    return "expected exactly 3 colors";
  }
  for (int i = 0; i < kContextSize; ++i) {
    const json& c = colors[i];
    if (!c.is_array() || c.size() != 3) return "color is not an [r,g,b] triple";
    for (const json& v : c) {
      if (!v.is_number()) return "color channel is not a number";
    }
    try {
      t.colors[i] = Color::FromRgb(c[0].get<double>(), c[1].get<double>(),
                                   c[2].get<double>());
    } catch (const std::exception& e) {
      return e.what();
    }
  }

  if (!row["target_index"].is_number_integer()) {
    return "target_index is not an integer";
  }
  t.target_index = row["target_index"].get<int>();
  if (t.target_index < 0 || t.target_index >= kContextSize) {
    return "target_index out of range";
  }

  const json& text = row["speaker_text"];
  if (!text.is_array()) return "speaker_text is not a list";
  for (const json& m : text) {
    if (!m.is_string()) return "speaker_text entry is not a string";
    t.speaker_text.push_back(m.get<std::string>());
  }
  if (Preprocess(t.speaker_text, TokenizeMode::kListener).empty()) {
    return "no speaker tokens";
  }

  try {
    if (row.contains("condition") && !row["condition"].is_null()) {
      if (!row["condition"].is_string()) return "condition is not a string";
      t.condition = ParseCondition(row["condition"].get<std::string>());
    } else {
      t.condition = ClassifyCondition(t.colors, t.target_index);
    }
  } catch (const std::exception& e) {
    return e.what();
  }

  if (row.contains("clicked_index") && !row["clicked_index"].is_null()) {
    if (!row["clicked_index"].is_number_integer()) {
      return "clicked_index is not an integer";
    }
    const int k = row["clicked_index"].get<int>();
    if (k < 0 || k >= kContextSize) return "clicked_index out of range";
    t.clicked_index = k;
  }
  return "";
}

bool IsPunct(unsigned char c) { return c < 128 && std::ispunct(c); }
bool IsSpace(unsigned char c) { return c < 128 && std::isspace(c); }

bool EndsWith(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Appends `word` split into stem and trailing suffixes.
void SplitSuffixes(std::string word, std::vector<std::string>& out) {
  static constexpr std::string_view kSuffixes[] = {"est", "ish", "er"};
  constexpr std::size_t kMinStem = 3;
  std::vector<std::string> suffixes;
  bool split = true;
  while (split) {
    split = false;
    for (std::string_view suf : kSuffixes) {
      if (EndsWith(word, suf) && word.size() - suf.size() >= kMinStem) {
        suffixes.emplace_back(suf);
        word.resize(word.size() - suf.size());
        split = true;
        break;
      }
    }
  }
  out.push_back(std::move(word));
  out.insert(out.end(), suffixes.rbegin(), suffixes.rend());
}

}  // namespace

LoadResult ParseJsonLines(std::istream& in) {
  LoadResult result;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (std::all_of(line.begin(), line.end(),
                    [](unsigned char c) { return IsSpace(c); })) {
      continue;
    }
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, e.what());
    }
    if (!row.is_object()) throw ParseError(lineno, "row is not an object");
    for (const char* field : kRequiredFields) {
      if (!row.contains(field)) {
        throw MissingField("line " + std::to_string(lineno) + ": missing '" +
                           field + "'");
      }
    }
    ContextTrial t;
    std::string reason = ParseTrial(row, t);
    if (reason.empty()) {
      result.trials.push_back(std::move(t));
    } else {
      result.rejects.push_back({lineno, std::move(reason)});
    }
  }
  return result;
}

LoadResult LoadRaw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus " + path.string());
  return ParseJsonLines(in);
}

json TrialToJson(const ContextTrial& t) {
  json colors = json::array();
  for (const Color& c : t.colors) colors.push_back({c.r, c.g, c.b});
  json row = {{"game_id", t.game_id},
              {"round", t.round},
              {"colors", colors},
              {"target_index", t.target_index},
              {"condition", std::string(ConditionName(t.condition))},
              {"speaker_text", t.speaker_text}};
  row["clicked_index"] =
      t.clicked_index ? json(*t.clicked_index) : json(nullptr);
  return row;
}

void WriteJsonLines(const std::filesystem::path& path,
                    const std::vector<ContextTrial>& trials) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const ContextTrial& t : trials) out << TrialToJson(t).dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string> Preprocess(std::string_view utterance,
                                    TokenizeMode mode) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    if (mode == TokenizeMode::kListener) {
      SplitSuffixes(std::move(word), tokens);
    } else {
      tokens.push_back(std::move(word));
    }
    word.clear();
  };
  for (char ch : utterance) {
    const auto c = static_cast<unsigned char>(ch);
    if (IsSpace(c)) {
      flush();
    } else if (IsPunct(c)) {
      flush();
      tokens.emplace_back(1, ch);
    } else {
      word += c < 128 ? static_cast<char>(std::tolower(c)) : ch;
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> Preprocess(const std::vector<std::string>& utterances,
                                    TokenizeMode mode) {
  std::vector<std::string> tokens;
  for (const std::string& u : utterances) {
    std::vector<std::string> part = Preprocess(u, mode);
    tokens.insert(tokens.end(), part.begin(), part.end());
  }
  return tokens;
}

int CountWords(std::string_view message) {
  int n = 0;
  bool in_word = false;
  for (char ch : message) {
    const bool space = IsSpace(static_cast<unsigned char>(ch));
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

json FilterReport::ToJson() const {
  return {{"messages_in", messages_in},
          {"messages_too_long", messages_too_long},
          {"trials_emptied", trials_emptied},
          {"incomplete_games", incomplete_games},
          {"trials_in_incomplete_games", trials_in_incomplete_games},
          {"mean_words", mean_words},
          {"stddev_words", stddev_words},
          {"max_words", max_words}};
}

FilterResult FilterTrials(std::vector<ContextTrial> trials,
                          const FilterOptions& options) {
  FilterResult result;
  FilterReport& rep = result.report;

  double sum = 0.0, sum_sq = 0.0;
  for (const ContextTrial& t : trials) {
    for (const std::string& m : t.speaker_text) {
      const double w = CountWords(m);
      sum += w;
      sum_sq += w * w;
      ++rep.messages_in;
    }
  }
  if (rep.messages_in > 0) {
    rep.mean_words = sum / rep.messages_in;
    rep.stddev_words = std::sqrt(
        std::max(0.0, sum_sq / rep.messages_in - rep.mean_words * rep.mean_words));
  }
  rep.max_words = rep.mean_words + options.sigma_mult * rep.stddev_words;

  std::map<std::string, std::set<int>> rounds;
  for (const ContextTrial& t : trials) rounds[t.game_id].insert(t.round);
  std::set<std::string> incomplete;
  if (options.required_rounds > 0) {
    for (const auto& [game, r] : rounds) {
      if (static_cast<int>(r.size()) < options.required_rounds) {
        incomplete.insert(game);
      }
    }
  }
  rep.incomplete_games = static_cast<int>(incomplete.size());

  for (ContextTrial& t : trials) {
    if (incomplete.count(t.game_id)) {
      ++rep.trials_in_incomplete_games;
      continue;
    }
    std::vector<std::string> kept;
    for (std::string& m : t.speaker_text) {
      if (CountWords(m) > rep.max_words) {
        ++rep.messages_too_long;
      } else {
        kept.push_back(std::move(m));
      }
    }
    t.speaker_text = std::move(kept);
    if (t.speaker_text.empty()) {
      ++rep.trials_emptied;
      continue;
    }
    result.trials.push_back(std::move(t));
  }
  return result;
}

Vocabulary::Vocabulary() {
  for (const char* tok : {"<unk>", "<s>", "</s>"}) {
    ids_.emplace(tok, static_cast<int>(tokens_.size()));
    tokens_.emplace_back(tok);
  }
}

Vocabulary Vocabulary::Build(const std::vector<std::vector<std::string>>& seqs,
                             int min_count) {
  std::map<std::string, int> counts;
  for (const auto& seq : seqs) {
    for (const std::string& tok : seq) ++counts[tok];
  }
  Vocabulary v;
  for (const auto& [tok, n] : counts) {
    if (n >= min_count && !v.ids_.count(tok)) {
      v.ids_.emplace(tok, v.size());
      v.tokens_.push_back(tok);
    }
  }
  return v;
}

int Vocabulary::Id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::Contains(std::string_view token) const {
  return ids_.count(std::string(token)) > 0;
}

const std::string& Vocabulary::Token(int id) const {
  if (id < 0 || id >= size()) {
    throw IndexOutOfRange("token id " + std::to_string(id));
  }
  return tokens_[id];
}

std::vector<int> Vocabulary::Encode(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) ids.push_back(Id(t));
  return ids;
}

std::vector<std::string> Vocabulary::Decode(const std::vector<int>& ids) const {
  std::vector<std::string> tokens;
  tokens.reserve(ids.size());
  for (int id : ids) tokens.push_back(Token(id));
  return tokens;
}

json Vocabulary::ToJson() const { return tokens_; }

Vocabulary Vocabulary::FromJson(const json& j) {
  if (!j.is_array() || j.size() < 3 || j[0] != "<unk>" || j[1] != "<s>" ||
      j[2] != "</s>") {
    throw CheckpointFormatError("vocabulary lacks reserved tokens");
  }
  Vocabulary v;
  for (std::size_t i = 3; i < j.size(); ++i) {
    const std::string tok = j[i].get<std::string>();
    if (v.ids_.count(tok)) {
      throw CheckpointFormatError("duplicate vocabulary token '" + tok + "'");
    }
    v.ids_.emplace(tok, v.size());
    v.tokens_.push_back(tok);
  }
  return v;
}

std::string_view SplitName(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kTest:
      return "test";
  }
  return "?";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw UsageError("unknown split '" + std::string(name) + "'");
}

Split SplitSpec::Of(const std::string& game_id) const {
  auto it = assignment.find(game_id);
  if (it == assignment.end()) {
    throw std::out_of_range("game '" + game_id + "' has no split");
  }
  return it->second;
}

json SplitSpec::ToJson() const {
  json j = json::object();
  for (const auto& [game, s] : assignment) j[game] = std::string(SplitName(s));
  return j;
}

SplitSpec SplitSpec::FromJson(const json& j) {
  SplitSpec spec;
  for (const auto& [game, s] : j.items()) {
    spec.assignment[game] = ParseSplit(s.get<std::string>());
  }
  return spec;
}

SplitSpec SplitByDyad(const std::vector<ContextTrial>& trials,
                      const SplitFractions& fractions, std::uint64_t seed) {
  const std::array<double, 3> frac = {fractions.train, fractions.dev,
                                      fractions.test};
  for (double f : frac) {
    if (f < 0.0) throw std::invalid_argument("negative split fraction");
  }
  if (std::fabs(frac[0] + frac[1] + frac[2] - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must sum to 1");
  }

  std::map<std::string, int> sizes;
  for (const ContextTrial& t : trials) ++sizes[t.game_id];
  std::vector<std::pair<std::string, int>> games(sizes.begin(), sizes.end());
  Rng rng(seed);
  std::shuffle(games.begin(), games.end(), rng);

  const double total = static_cast<double>(trials.size());
  std::array<double, 3> have = {0.0, 0.0, 0.0};
  SplitSpec spec;
  for (const auto& [game, n] : games) {
    int best = 0;
    double best_deficit = -1e300;
    for (int s = 0; s < 3; ++s) {
      if (frac[s] == 0.0) continue;
      const double deficit = frac[s] * total - have[s];
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = s;
      }
    }
    have[best] += n;
    spec.assignment[game] = static_cast<Split>(best);
  }
  return spec;
}

std::vector<ContextTrial> SelectSplit(const std::vector<ContextTrial>& trials,
                                      const SplitSpec& spec, Split which) {
  std::vector<ContextTrial> out;
  for (const ContextTrial& t : trials) {
    if (spec.Of(t.game_id) == which) out.push_back(t);
  }
  return out;
}

}  // namespace pragref
