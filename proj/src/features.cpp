#include "bandex/features.hpp"

#include <algorithm>
#include <cmath>

#include "bandex/errors.hpp"

namespace bandex {

namespace {
constexpr double kEnergyEps = 1e-10;
}

FeatureVector extract_features(const FrameContext& cur, const FrameContext* prev) {
  if (cur.cepstrum_tel.size() != 10)
    throw DataError("frame context needs 10 telephone cepstral coefficients");
  if (prev && prev->cepstrum_tel.size() != 10)
    throw DataError("previous frame context needs 10 cepstral coefficients");

  FeatureVector f;
  for (int i = 0; i < 10; i++) f.v[std::size_t(i)] = cur.cepstrum_tel[std::size_t(i)];
  f.v[FeatureVector::kPitchGain] = std::clamp(cur.pitch_gain, 0.0, 1.2);
  f.v[FeatureVector::kPitchPeriod] = cur.pitch_period;
  if (prev) {
    f.v[FeatureVector::kDLogEnergy] =
        std::log(cur.excitation_energy + kEnergyEps) -
        std::log(prev->excitation_energy + kEnergyEps);
    for (int i = 0; i < 4; i++)
      f.v[std::size_t(FeatureVector::kDCepstrum + i)] =
          cur.cepstrum_tel[std::size_t(i)] - prev->cepstrum_tel[std::size_t(i)];
  }
  return f;
}

std::vector<double> apply_mask(const FeatureVector& f, PredictorKind kind) {
  std::vector<double> out;
  switch (kind) {
    case PredictorKind::regression:
      out.assign(f.v.begin(), f.v.end());
      out.push_back(1.0);  // affine term
      break;
    case PredictorKind::mlp:
      out.reserve(16);
      for (int i = 0; i < FeatureVector::kDim; i++)
        if (i != FeatureVector::kPitchPeriod) out.push_back(f.v[std::size_t(i)]);
      break;
    case PredictorKind::codebook:
      out.reserve(12);
      for (int i = 0; i < 10; i++) out.push_back(f.v[std::size_t(i)]);
      out.push_back(4.0 * f.v[FeatureVector::kPitchGain]);
      out.push_back(f.v[FeatureVector::kDLogEnergy]);
      break;
  }
  return out;
}

int masked_dim(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::regression: return 18;
    case PredictorKind::mlp: return 16;
    case PredictorKind::codebook: return 12;
  }
  return 0;
}

}  // namespace bandex
