#include "didlab/effect_path.hpp"

#include <algorithm>

namespace didlab {

namespace {

double shape_value(EffectShape shape, double a, const ShapeParams& p, int e) {
  if (e < 0) return 0.0;
  switch (shape) {
    case EffectShape::step:
      return a;
    case EffectShape::trend_break:
      return a * (e + 1);
    case EffectShape::inverted_u: {
      const int peak_e = p.rise - 1;
      if (e <= peak_e) return a * static_cast<double>(e + 1) / p.rise;
      return a * std::max(0.0, 1.0 - static_cast<double>(e - peak_e) / p.fall);
    }
    case EffectShape::fade_out:
      return a * std::max(0.0, 1.0 - static_cast<double>(e) / p.fade_length);
  }
  return 0.0;
}

}  // namespace

EffectPath build_effect_path(EffectShape shape, double amplitude, Anticipation anti, int T,
                             ShapeParams params) {
  if (amplitude < 0.0) fail(errc::bad_input, "amplitude must be >= 0");
  if (anti.depth < 0) fail(errc::bad_input, "anticipation depth must be >= 0");
  if (params.onset != 0 && params.onset != 1) fail(errc::bad_input, "onset must be 0 or 1");
  if (params.rise < 1 || params.fall < 1 || params.fade_length < 1)
    fail(errc::bad_input, "shape parameters must be >= 1");

  EffectPath path;
  const int lo = -std::max(2, anti.depth);
  for (int e = lo; e <= T - 2; ++e) {
    double v = 0.0;
    if (e < 0) {
      if (anti.depth > 0 && e >= -anti.depth) v = -anti.magnitude;
    } else {
      v = shape_value(shape, amplitude, params, e - params.onset);
    }
    path.values[e] = v;
  }
  return path;
}

}  // namespace didlab
