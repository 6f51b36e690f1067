#ifndef BANDEX_PITCH_HPP
#define BANDEX_PITCH_HPP

#include <span>

namespace bandex {

struct PitchEstimate {
  int period = 0;            // integer lag in samples
  double period_frac = 0.0;  // parabolic-refined lag (for harmonic placement)
  double gain = 0.0;         // beta = sum x(i)x(i-T) / sum x(i-T)^2
  double score = 0.0;        // (sum x(i)x(i-T))^2 / sum x(i-T)^2
};

// Maximizes (sum x(i)x(i-T))^2 / sum x(i-T)^2 over T in [t_min, t_max].
// `x` spans the lag history followed by the frame: the frame occupies
// [frame_begin, frame_begin+frame_len) and lagged samples index into
// the preceding part (sums are restricted to available history when
// frame_begin < t_max).  Scale-invariant in the argmax and in gain.
PitchEstimate pitch_search(std::span<const double> x, int frame_begin,
                           int frame_len, int t_min, int t_max);

// Halving/third checks: for d in {2, 3}, rescores T' in
// [T/d - 2, T/d + 2]; switches when best score(T') >= theta * score(T).
PitchEstimate refine_anti_doubling(const PitchEstimate& est,
                                   std::span<const double> x, int frame_begin,
                                   int frame_len, int t_min, int t_max,
                                   double theta);

}  // namespace bandex

#endif
