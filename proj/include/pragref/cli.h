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

// The `pragref` command-line tool and the corpus plumbing it shares with the
// acceptance runner.
//
// Subcommands: prepare, synth, train, eval, rsa-demo, analyze, density.
// Flags override values from a --config file (TOML/INI), which override the
// built-in defaults. Errors map to distinct exit codes (see ErrorCode).

#ifndef PRAGREF_CLI_H_
#define PRAGREF_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pragref/corpus.h"

namespace pragref {

inline constexpr const char* kDataEnvVar = "PRAGREF_DATA";
inline constexpr const char* kListenerCheckpoint = "l0.ckpt";
inline constexpr const char* kSpeakerCheckpoint = "s0.ckpt";

// A filtered corpus with its dyad split.
struct PreparedCorpus {
  std::vector<ContextTrial> trials;
  SplitSpec split;
  FilterReport filter;
  int rejected = 0;

  std::vector<ContextTrial> Select(Split which) const;
};

// Filters `raw` and splits it by dyad into equal thirds.
PreparedCorpus PrepareCorpus(std::vector<ContextTrial> raw, std::uint64_t seed,
                             const FilterOptions& options = {});

// Writes trials.jsonl, split.json, {train,dev,test}.jsonl, the two
// vocabularies and stats.json into `dir`.
void WritePrepared(const std::filesystem::path& dir, const PreparedCorpus& c);

// Reads a directory written by WritePrepared, or prepares a raw JSON-lines
// file on the fly.
PreparedCorpus LoadCorpus(const std::filesystem::path& path, std::uint64_t seed);

// `flag` when non-empty, else $PRAGREF_DATA, else nullopt.
std::optional<std::filesystem::path> ResolveCorpusPath(const std::string& flag);

// Runs the tool; returns the process exit code. Output goes to `out`,
// diagnostics to `err`.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace pragref

#endif  // PRAGREF_CLI_H_
