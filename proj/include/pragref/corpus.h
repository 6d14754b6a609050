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

// Reference-game corpus: ingestion, filtering, tokenization, vocabularies and
// dyad-level splits.
//
// Canonical input is JSON lines, one trial per line:
//
//   {"game_id": "g1", "round": 3, "colors": [[r,g,b],[r,g,b],[r,g,b]],
//    "target_index": 0, "condition": "far", "speaker_text": ["blue"],
//    "clicked_index": 0}
//
// Colors are normalized RGB in listener order. "condition" is optional and
// recomputed from the colors when absent; "clicked_index" may be null.

#ifndef PRAGREF_CORPUS_H_
#define PRAGREF_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "pragref/colorspace.h"

namespace pragref {

struct ContextTrial {
  std::string game_id;
  int round = 0;
  Context colors{};
  int target_index = 0;
  Condition condition = Condition::kFar;
  // Speaker chat messages for the round, in order.
  std::vector<std::string> speaker_text;
  std::optional<int> clicked_index;

  // Messages joined with single spaces.
  std::string Text() const;
};

struct RejectEntry {
  int line = 0;
  std::string reason;
};

struct LoadResult {
  std::vector<ContextTrial> trials;
  std::vector<RejectEntry> rejects;
};

// Throws ParseError (with line number) on malformed JSON and MissingField when
// a required key is absent. Rows that parse but violate trial invariants go
// to `rejects`.
LoadResult LoadRaw(const std::filesystem::path& path);
LoadResult ParseJsonLines(std::istream& in);

nlohmann::json TrialToJson(const ContextTrial& trial);
void WriteJsonLines(const std::filesystem::path& path,
                    const std::vector<ContextTrial>& trials);

enum class TokenizeMode { kListener, kSpeaker };

// Lowercases, splits on whitespace and splits every punctuation character
// into its own token. Listener mode additionally splits trailing -er, -est
// and -ish into standalone suffix tokens when the remaining stem has at
// least three characters; splitting repeats until no suffix remains, so
// the function is idempotent.
std::vector<std::string> Preprocess(std::string_view utterance,
                                    TokenizeMode mode);
// Messages of one round, concatenated in order.
std::vector<std::string> Preprocess(const std::vector<std::string>& utterances,
                                    TokenizeMode mode);

// Whitespace-delimited word count of a raw message.
int CountWords(std::string_view message);

struct FilterOptions {
  double sigma_mult = 4.0;
  // Games with fewer distinct rounds are dropped; 0 disables the check.
  int required_rounds = 0;
};

struct FilterReport {
  int messages_in = 0;
  int messages_too_long = 0;
  int trials_emptied = 0;
  int incomplete_games = 0;
  int trials_in_incomplete_games = 0;
  double mean_words = 0.0;
  double stddev_words = 0.0;
  double max_words = 0.0;  // messages above this are dropped

  nlohmann::json ToJson() const;
};

struct FilterResult {
  std::vector<ContextTrial> trials;
  FilterReport report;
};

// Drops messages longer than mean + sigma_mult * stddev words (statistics
// over every message of the input), trials left with no message, and
// incomplete games.
FilterResult FilterTrials(std::vector<ContextTrial> trials,
                          const FilterOptions& options = {});

class Vocabulary {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kStart = 1;
  static constexpr int kEnd = 2;

  Vocabulary();

  // Keeps tokens seen at least `min_count` times; everything else encodes
  // as <unk>. Ids past the reserved ones follow lexicographic token order.
  static Vocabulary Build(const std::vector<std::vector<std::string>>& seqs,
                          int min_count = 2);

  int size() const { return static_cast<int>(tokens_.size()); }
  int Id(std::string_view token) const;  // kUnk when absent
  bool Contains(std::string_view token) const;
  const std::string& Token(int id) const;
  std::vector<int> Encode(const std::vector<std::string>& tokens) const;
  std::vector<std::string> Decode(const std::vector<int>& ids) const;

  nlohmann::json ToJson() const;
  static Vocabulary FromJson(const nlohmann::json& j);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

enum class Split { kTrain = 0, kDev = 1, kTest = 2 };
std::string_view SplitName(Split s);
Split ParseSplit(std::string_view name);

struct SplitFractions {
  double train = 1.0 / 3.0;
  double dev = 1.0 / 3.0;
  double test = 1.0 / 3.0;
};

struct SplitSpec {
  std::map<std::string, Split> assignment;  // game_id -> split

  // Throws std::out_of_range for an unknown game.
  Split Of(const std::string& game_id) const;
  nlohmann::json ToJson() const;
  static SplitSpec FromJson(const nlohmann::json& j);
};

// Shuffles games with `seed` and hands each to the split furthest below its
// target trial count. Throws std::invalid_argument unless the fractions are
// non-negative and sum to 1.
SplitSpec SplitByDyad(const std::vector<ContextTrial>& trials,
                      const SplitFractions& fractions, std::uint64_t seed);

std::vector<ContextTrial> SelectSplit(const std::vector<ContextTrial>& trials,
                                      const SplitSpec& spec, Split which);

}  // namespace pragref

#endif  // PRAGREF_CORPUS_H_
