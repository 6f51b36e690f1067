#include "bandex/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bandex/errors.hpp"

namespace bandex {

namespace {

struct LagScore {
  double score = 0.0;
  double gain = 0.0;
};

LagScore score_lag(std::span<const double> x, int frame_begin, int frame_len,
                   int t) {
  // restrict to samples whose lagged partner exists
  int lo = std::max(frame_begin, t);
  int hi = frame_begin + frame_len;
  double num = 0.0, den = 0.0;
  for (int i = lo; i < hi; i++) {
    double lagged = x[std::size_t(i - t)];
    num += x[std::size_t(i)] * lagged;
    den += lagged * lagged;
  }
  LagScore ls;
  if (den > 0.0) {
    ls.score = num * num / den;
    ls.gain = num / den;
  }
  return ls;
}

}  // namespace

PitchEstimate pitch_search(std::span<const double> x, int frame_begin,
                           int frame_len, int t_min, int t_max) {
  if (t_min < 1 || t_max <= t_min) throw DataError("bad pitch lag range");
  if (frame_begin < 0 || frame_len < 1 ||
      std::size_t(frame_begin + frame_len) > x.size())
    throw DataError("pitch frame out of bounds");

  PitchEstimate best;
  best.period = t_min;
  best.period_frac = t_min;
  std::vector<double> scores(std::size_t(t_max - t_min + 1), 0.0);
  for (int t = t_min; t <= t_max; t++) {
    if (t >= frame_begin + frame_len) break;  // no overlap left
    LagScore ls = score_lag(x, frame_begin, frame_len, t);
    scores[std::size_t(t - t_min)] = ls.score;
    if (ls.score > best.score) {
      best.score = ls.score;
      best.gain = ls.gain;
      best.period = t;
    }
  }

  // parabolic refinement of the score peak (kept separate from the
  // integer lag used for filtering)
  best.period_frac = double(best.period);
  int idx = best.period - t_min;
  if (idx > 0 && idx + 1 < int(scores.size())) {
    double sm = scores[std::size_t(idx - 1)];
    double s0 = scores[std::size_t(idx)];
    double sp = scores[std::size_t(idx + 1)];
    double denom = sm - 2.0 * s0 + sp;
    if (denom < 0.0) {
      double delta = 0.5 * (sm - sp) / denom;
      delta = std::clamp(delta, -0.5, 0.5);
      best.period_frac = double(best.period) + delta;
    }
  }
  return best;
}

PitchEstimate refine_anti_doubling(const PitchEstimate& est,
                                   std::span<const double> x, int frame_begin,
                                   int frame_len, int t_min, int t_max,
                                   double theta) {
  PitchEstimate cur = est;
  for (int d : {2, 3}) {
    int center = cur.period / d;
    int best_t = -1;
    double best_score = 0.0;
    for (int t = center - 2; t <= center + 2; t++) {
      if (t < t_min || t > t_max || t >= cur.period) continue;
      if (t >= frame_begin + frame_len) continue;
      LagScore ls = score_lag(x, frame_begin, frame_len, t);
      if (ls.score > best_score) {
        best_score = ls.score;
        best_t = t;
      }
    }
    if (best_t > 0 && best_score >= theta * cur.score) {
      PitchEstimate sub = pitch_search(x, frame_begin, frame_len,
                                       std::max(t_min, best_t - 2),
                                       std::min(t_max, best_t + 2));
      cur = sub;
    }
  }
  return cur;
}

}  // namespace bandex
