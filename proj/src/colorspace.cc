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

#include "pragref/colorspace.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pragref/error.h"

namespace pragref {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double DegToRad(double d) { return d * std::numbers::pi / 180.0; }
double RadToDeg(double r) { return r * 180.0 / std::numbers::pi; }

double SrgbToLinear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double LabF(double t) {
  constexpr double kDelta = 6.0 / 29.0;
  constexpr double kDelta3 = kDelta * kDelta * kDelta;
  return t > kDelta3 ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

int HexDigit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw std::invalid_argument(std::string("bad hex digit '") + c + "'");
}

}  // namespace

Color Color::FromRgb(double r, double g, double b) {
  for (double v : {r, g, b}) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("color channel outside [0, 1]: " +
                                  std::to_string(v));
    }
  }
  return Color{r, g, b};
}

Color Color::FromHex(std::string_view hex) {
  if (!hex.empty() && hex.front() == '#') hex.remove_prefix(1);
  if (hex.size() != 6) {
    throw std::invalid_argument("expected RRGGBB hex color");
  }
  std::array<double, 3> ch{};
  for (int i = 0; i < 3; ++i) {
    ch[i] = (HexDigit(hex[2 * i]) * 16 + HexDigit(hex[2 * i + 1])) / 255.0;
  }
  return Color{ch[0], ch[1], ch[2]};
}

std::string_view ConditionName(Condition c) {
  switch (c) {
    case Condition::kFar:
      return "far";
    case Condition::kSplit:
      return "split";
    case Condition::kClose:
      return "close";
  }
  return "?";
}

Condition ParseCondition(std::string_view name) {
  if (name == "far") return Condition::kFar;
  if (name == "split") return Condition::kSplit;
  if (name == "close") return Condition::kClose;
  throw std::invalid_argument("unknown condition '" + std::string(name) + "'");
}

HsvColor RgbToHsv(const Color& c) {
  const double mx = std::max({c.r, c.g, c.b});
  const double mn = std::min({c.r, c.g, c.b});
  const double chroma = mx - mn;
  HsvColor out;
  out.v = mx;
  out.s = mx > 0.0 ? chroma / mx : 0.0;
  if (chroma <= 0.0) return out;  // grayscale: hue 0
  double h;
  if (mx == c.r) {
    h = std::fmod((c.g - c.b) / chroma, 6.0);
  } else if (mx == c.g) {
    h = (c.b - c.r) / chroma + 2.0;
  } else {
    h = (c.r - c.g) / chroma + 4.0;
  }
  h *= 60.0;
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

Color HsvToRgb(const HsvColor& hsv) {
  const double chroma = hsv.v * hsv.s;
  double hp = std::fmod(hsv.h, 360.0);
  if (hp < 0.0) hp += 360.0;
  hp /= 60.0;
  const double x = chroma * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp)) {
    case 0: r = chroma; g = x; break;
    case 1: r = x; g = chroma; break;
    case 2: g = chroma; b = x; break;
    case 3: g = x; b = chroma; break;
    case 4: r = x; b = chroma; break;
    default: r = chroma; b = x; break;
  }
  const double m = hsv.v - chroma;
  auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
  return Color{clamp01(r + m), clamp01(g + m), clamp01(b + m)};
}

LabColor RgbToLab(const Color& c) {
  const double r = SrgbToLinear(c.r);
  const double g = SrgbToLinear(c.g);
  const double b = SrgbToLinear(c.b);
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  // D65 reference white.
  const double fx = LabF(x / 0.95047);
  const double fy = LabF(y / 1.00000);
  const double fz = LabF(z / 1.08883);
  return LabColor{116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

double Ciede2000(const LabColor& x, const LabColor& y) {
  const double pow25_7 = 6103515625.0;  // 25^7
  const double c1 = std::hypot(x.a, x.b);
  const double c2 = std::hypot(y.a, y.b);
  const double c_bar = 0.5 * (c1 + c2);
  const double c_bar7 = std::pow(c_bar, 7.0);
  const double g = 0.5 * (1.0 - std::sqrt(c_bar7 / (c_bar7 + pow25_7)));

  const double a1p = (1.0 + g) * x.a;
  const double a2p = (1.0 + g) * y.a;
  const double c1p = std::hypot(a1p, x.b);
  const double c2p = std::hypot(a2p, y.b);

  auto hue = [](double b, double ap) {
    if (b == 0.0 && ap == 0.0) return 0.0;
    double h = RadToDeg(std::atan2(b, ap));
    return h < 0.0 ? h + 360.0 : h;
  };
  const double h1p = hue(x.b, a1p);
  const double h2p = hue(y.b, a2p);

  const double dlp = y.l - x.l;
  const double dcp = c2p - c1p;
  double dhp = 0.0;
  const double cprod = c1p * c2p;
  if (cprod != 0.0) {
    dhp = h2p - h1p;
    if (dhp > 180.0) {
      dhp -= 360.0;
    } else if (dhp < -180.0) {
      dhp += 360.0;
    }
  }
  const double dHp = 2.0 * std::sqrt(cprod) * std::sin(DegToRad(dhp) / 2.0);

  const double l_barp = 0.5 * (x.l + y.l);
  const double c_barp = 0.5 * (c1p + c2p);
  double h_barp = h1p + h2p;
  if (cprod != 0.0) {
    if (std::fabs(h1p - h2p) <= 180.0) {
      h_barp *= 0.5;
    } else if (h_barp < 360.0) {
      h_barp = 0.5 * (h_barp + 360.0);
    } else {
      h_barp = 0.5 * (h_barp - 360.0);
    }
  }

  const double t = 1.0 - 0.17 * std::cos(DegToRad(h_barp - 30.0)) +
                   0.24 * std::cos(DegToRad(2.0 * h_barp)) +
                   0.32 * std::cos(DegToRad(3.0 * h_barp + 6.0)) -
                   0.20 * std::cos(DegToRad(4.0 * h_barp - 63.0));
  const double d_theta =
      30.0 * std::exp(-std::pow((h_barp - 275.0) / 25.0, 2.0));
  const double c_barp7 = std::pow(c_barp, 7.0);
  const double rc = 2.0 * std::sqrt(c_barp7 / (c_barp7 + pow25_7));
  const double l50 = (l_barp - 50.0) * (l_barp - 50.0);
  const double sl = 1.0 + 0.015 * l50 / std::sqrt(20.0 + l50);
  const double sc = 1.0 + 0.045 * c_barp;
  const double sh = 1.0 + 0.015 * c_barp * t;
  const double rt = -std::sin(DegToRad(2.0 * d_theta)) * rc;

  const double tl = dlp / sl;
  const double tc = dcp / sc;
  const double th = dHp / sh;
  return std::sqrt(tl * tl + tc * tc + th * th + rt * tc * th);
}

double Ciede2000(const Color& x, const Color& y) {
  return Ciede2000(RgbToLab(x), RgbToLab(y));
}

FourierFeatures ComputeFourierFeatures(const Color& c) {
  FourierFeatures f{};
  int idx = 0;
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      for (int l = 0; l < 3; ++l) {
        const double phase = kTwoPi * (j * c.r + k * c.g + l * c.b);
        f[idx] = std::cos(phase);
        f[idx + 27] = std::sin(phase);
        ++idx;
      }
    }
  }
  return f;
}

std::array<double, 3> PairwiseDistances(const Context& colors) {
  const LabColor l0 = RgbToLab(colors[0]);
  const LabColor l1 = RgbToLab(colors[1]);
  const LabColor l2 = RgbToLab(colors[2]);
  return {Ciede2000(l0, l1), Ciede2000(l0, l2), Ciede2000(l1, l2)};
}

namespace {

// Distance between context positions i and j, given PairwiseDistances output.
double PairDistance(const std::array<double, 3>& d, int i, int j) {
  if (i > j) std::swap(i, j);
  if (i == 0) return j == 1 ? d[0] : d[1];
  return d[2];
}

void CheckTarget(int target_index) {
  if (target_index < 0 || target_index >= kContextSize) {
    throw std::out_of_range("target index " + std::to_string(target_index));
  }
}

Condition ClassifyDistances(const std::array<double, 3>& d,
                            const ConditionThresholds& th) {
  if (std::all_of(d.begin(), d.end(),
                  [&](double v) { return v > th.theta_dist; })) {
    return Condition::kFar;
  }
  if (std::all_of(d.begin(), d.end(),
                  [&](double v) { return v <= th.theta_dist; })) {
    return Condition::kClose;
  }
  return Condition::kSplit;
}

bool TargetRelativeSplit(const std::array<double, 3>& d, int target,
                         const ConditionThresholds& th) {
  int near = 0;
  for (int i = 0; i < kContextSize; ++i) {
    if (i != target && PairDistance(d, target, i) <= th.theta_dist) ++near;
  }
  return near == 1;
}

}  // namespace

Condition ClassifyCondition(const Context& colors, int target_index,
                            const ConditionThresholds& th) {
  CheckTarget(target_index);
  const auto d = PairwiseDistances(colors);
  for (double v : d) {
    if (v < th.epsilon) {
      throw PerceptibilityViolation("pair distance " + std::to_string(v) +
                                    " below epsilon");
    }
  }
  return ClassifyDistances(d, th);
}

bool IsTargetRelativeSplit(const Context& colors, int target_index,
                           const ConditionThresholds& th) {
  CheckTarget(target_index);
  return TargetRelativeSplit(PairwiseDistances(colors), target_index, th);
}

SampledContext SampleContext(Condition cond, const ConditionThresholds& th,
                             Rng& rng, std::int64_t max_attempts) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, kContextSize - 1);
  SampledContext out;
  out.target_index = pick(rng);

  auto draw = [&]() { return Color{unit(rng), unit(rng), unit(rng)}; };
  // The first pair is screened before the third color is drawn; this only
  // short-circuits attempts that would be rejected anyway.
  auto pair_ok = [&](double d) {
    if (d < th.epsilon) return false;
    switch (cond) {
      case Condition::kFar:
        return d > th.theta_dist;
      case Condition::kClose:
        return d <= th.theta_dist;
      case Condition::kSplit:
        return true;
    }
    return false;
  };

  for (std::int64_t attempt = 0; attempt < max_attempts; ++attempt) {
    const Color c0 = draw();
    const Color c1 = draw();
    const LabColor lab0 = RgbToLab(c0);
    const LabColor lab1 = RgbToLab(c1);
    const double d01 = Ciede2000(lab0, lab1);
    if (!pair_ok(d01)) continue;
    const Color c2 = draw();
    const LabColor lab2 = RgbToLab(c2);
    const double d02 = Ciede2000(lab0, lab2);
    if (!pair_ok(d02)) continue;
    const double d12 = Ciede2000(lab1, lab2);
    if (!pair_ok(d12)) continue;
    const std::array<double, 3> d{d01, d02, d12};
    if (ClassifyDistances(d, th) != cond) continue;
    if (cond == Condition::kSplit &&
        !TargetRelativeSplit(d, out.target_index, th)) {
      continue;
    }
    out.colors = {c0, c1, c2};
    return out;
  }
  throw SamplingBudgetExceeded("no " + std::string(ConditionName(cond)) +
                               " context after " +
                               std::to_string(max_attempts) + " attempts");
}

}  // namespace pragref
