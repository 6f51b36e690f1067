#ifndef BANDEX_MODEL_IO_HPP
#define BANDEX_MODEL_IO_HPP

#include <string>

#include "bandex/config.hpp"
#include "bandex/predictors.hpp"

namespace bandex {

// Everything `extend` and `eval` need: the analysis snapshot the
// predictors were trained under, per-kind input standardizers, and the
// trained predictors themselves.  Codebook / MLPs / residual VQ are
// optional (empty when not trained).
struct ModelBundle {
  AnalysisConfig analysis;
  bool irs_inverse = true;

  Standardizer std_mlp;       // 16-dim masked space
  Standardizer std_codebook;  // 12-dim masked space

  RegressionModel reg_high;   // 18 -> 8
  RegressionModel reg_low;    // 18 -> 2
  AssociativeCodebook cb_high;
  MlpModel mlp_high;
  MlpModel mlp_low;
  ResidualVq vq_high;         // bits == 0 when absent

  std::string predictor_high = "regression";  // regression|codebook|mlp
  std::string predictor_low = "regression";   // regression|mlp
};

// Versioned JSON with a content checksum over the canonical payload
// serialization.  Throws DataError on I/O failure, unknown version,
// malformed or tampered files.
void save_model(const std::string& path, const ModelBundle& bundle);
ModelBundle load_model(const std::string& path);

}  // namespace bandex

#endif
