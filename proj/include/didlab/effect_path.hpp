#pragma once

#include <map>

#include "didlab/errors.hpp"

namespace didlab {

enum class EffectShape { step, trend_break, inverted_u, fade_out };

struct Anticipation {
  int depth = 0;        // number of pre-periods with an effect
  double magnitude = 0.0;  // size of the dip; entries are -magnitude
};

// Shape knobs. Defaults reproduce the canonical paths:
//   step        a for e >= 0
//   trend_break a*(e+1) for e >= 0
//   inverted_u  rise to the peak at e = rise-1, back to zero at e = rise-1+fall
//   fade_out    peak at e = 0, zero from e = fade_length
// onset delays the whole post-treatment path by one period (effect responds
// the period after treatment starts, the 1{t > g} timing).
struct ShapeParams {
  int rise = 4;
  int fall = 5;
  int fade_length = 8;
  int onset = 0;  // 0 or 1
};

// True effect by event time, e in [-max(2, depth), T-2].
struct EffectPath {
  std::map<int, double> values;
  double at(int e) const {
    auto it = values.find(e);
    return it == values.end() ? 0.0 : it->second;
  }
  int min_e() const { return values.empty() ? 0 : values.begin()->first; }
  int max_e() const { return values.empty() ? 0 : values.rbegin()->first; }
};

EffectPath build_effect_path(EffectShape shape, double amplitude, Anticipation anti, int T,
                             ShapeParams params = {});

}  // namespace didlab
