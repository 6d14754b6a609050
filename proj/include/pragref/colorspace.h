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

#ifndef PRAGREF_COLORSPACE_H_
#define PRAGREF_COLORSPACE_H_

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace pragref {

// Random stream used across the library. Every stochastic operation takes one
// explicitly; there is no global generator.
using Rng = std::mt19937_64;

// Normalized RGB, each channel in [0, 1].
struct Color {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  // Throws std::invalid_argument if a channel is outside [0, 1] or NaN.
  static Color FromRgb(double r, double g, double b);
  static Color FromHex(std::string_view hex);  // "RRGGBB" or "#RRGGBB"

  bool operator==(const Color&) const = default;
};

struct HsvColor {
  double h = 0.0;  // degrees, [0, 360)
  double s = 0.0;
  double v = 0.0;
};

struct LabColor {
  double l = 0.0;
  double a = 0.0;
  double b = 0.0;
};

inline constexpr int kNumFourierFeatures = 54;
using FourierFeatures = std::array<double, kNumFourierFeatures>;

struct ConditionThresholds {
  double theta_dist = 20.0;
  double epsilon = 5.0;
};

enum class Condition { kFar = 0, kSplit = 1, kClose = 2 };
inline constexpr int kNumConditions = 3;
inline constexpr int kContextSize = 3;

using Context = std::array<Color, kContextSize>;

std::string_view ConditionName(Condition c);  // "far" | "split" | "close"
// Throws std::invalid_argument for anything else.
Condition ParseCondition(std::string_view name);

HsvColor RgbToHsv(const Color& c);
Color HsvToRgb(const HsvColor& hsv);

// sRGB (D65, standard companding) -> CIE L*a*b*.
LabColor RgbToLab(const Color& c);

// CIEDE2000 color difference with kL = kC = kH = 1.
double Ciede2000(const LabColor& x, const LabColor& y);
double Ciede2000(const Color& x, const Color& y);

// cos then sin of 2*pi*(j*r + k*g + l*b) for (j,k,l) in {0,1,2}^3, triples
// in lexicographic order.
FourierFeatures ComputeFourierFeatures(const Color& c);

// Pairwise distances of a context: d[0] = (0,1), d[1] = (0,2), d[2] = (1,2).
std::array<double, 3> PairwiseDistances(const Context& colors);

// Far when every pair is farther than theta, Close when every pair is within
// theta, Split otherwise. Throws PerceptibilityViolation if any pair is closer
// than epsilon and std::out_of_range for a bad target index.
Condition ClassifyCondition(const Context& colors, int target_index,
                            const ConditionThresholds& th = {});

// Exactly one distractor within theta of the target and the other farther.
bool IsTargetRelativeSplit(const Context& colors, int target_index,
                           const ConditionThresholds& th = {});

struct SampledContext {
  Context colors;
  int target_index = 0;
};

inline constexpr std::int64_t kDefaultSamplingBudget = 1'000'000;

// Rejection-samples three colors uniformly from the RGB cube until they form
// a context of the requested condition. Split contexts additionally satisfy
// IsTargetRelativeSplit. Throws SamplingBudgetExceeded after `max_attempts`.
SampledContext SampleContext(Condition cond, const ConditionThresholds& th,
                             Rng& rng,
                             std::int64_t max_attempts = kDefaultSamplingBudget);

}  // namespace pragref

#endif  // PRAGREF_COLORSPACE_H_
