#include "bandex/model_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "bandex/errors.hpp"

namespace bandex {

namespace {

using nlohmann::json;

constexpr const char* kFormatVersion = "bandex-model-v1";

std::string fnv1a64_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x))
      throw DataError(std::string("non-finite value in ") + what +
                      " (refusing to serialize)");
}

json matrix_to_json(const Matrix& m, const char* what) {
  json a = json::array();
  for (const auto& row : m) {
    check_finite(row, what);
    a.push_back(row);
  }
  return a;
}

Matrix matrix_from_json(const json& a) {
  Matrix m;
  for (const auto& row : a) m.push_back(row.get<std::vector<double>>());
  return m;
}

json standardizer_to_json(const Standardizer& s) {
  check_finite(s.mean, "standardizer mean");
  check_finite(s.scale, "standardizer scale");
  return json{{"mean", s.mean}, {"scale", s.scale}};
}

Standardizer standardizer_from_json(const json& j) {
  Standardizer s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  if (s.mean.size() != s.scale.size())
    throw DataError("model bundle: standardizer mean/scale size mismatch");
  return s;
}

json regression_to_json(const RegressionModel& r) {
  check_finite(r.w, "regression weights");
  return json{{"in_dim", r.in_dim},
              {"out_dim", r.out_dim},
              {"w", r.w},
              {"train_rms", r.train_rms}};
}

RegressionModel regression_from_json(const json& j) {
  RegressionModel r;
  r.in_dim = j.at("in_dim").get<int>();
  r.out_dim = j.at("out_dim").get<int>();
  r.w = j.at("w").get<std::vector<double>>();
  r.train_rms = j.value("train_rms", 0.0);
  if (r.w.size() != std::size_t(r.in_dim) * std::size_t(r.out_dim))
    throw DataError("model bundle: regression weight count mismatch");
  return r;
}

json mlp_to_json(const MlpModel& m) {
  json layers = json::array();
  for (const MlpLayer& l : m.layers) {
    check_finite(l.w, "MLP weights");
    check_finite(l.b, "MLP biases");
    layers.push_back(json{{"in", l.in},
                          {"out", l.out},
                          {"w", l.w},
                          {"b", l.b},
                          {"tanh", l.tanh_act}});
  }
  return json{{"layers", layers}};
}

MlpModel mlp_from_json(const json& j) {
  MlpModel m;
  for (const auto& lj : j.at("layers")) {
    MlpLayer l;
    l.in = lj.at("in").get<int>();
    l.out = lj.at("out").get<int>();
    l.w = lj.at("w").get<std::vector<double>>();
    l.b = lj.at("b").get<std::vector<double>>();
    l.tanh_act = lj.at("tanh").get<bool>();
    if (l.w.size() != std::size_t(l.in) * std::size_t(l.out) ||
        l.b.size() != std::size_t(l.out))
      throw DataError("model bundle: MLP layer shape mismatch");
    m.layers.push_back(std::move(l));
  }
  return m;
}

json analysis_to_json(const AnalysisConfig& c) {
  return json{{"frame_len", c.frame_len},
              {"hop", c.hop},
              {"lpc_order_wide", c.lpc_order_wide},
              {"lpc_order_tel", c.lpc_order_tel},
              {"preemph_alpha", c.preemph_alpha},
              {"noise_floor_alpha", c.noise_floor_alpha},
              {"lag_beta", c.lag_beta},
              {"fft_size", c.fft_size},
              {"pitch_min", c.pitch_min},
              {"pitch_max", c.pitch_max},
              {"anti_doubling_theta", c.anti_doubling_theta},
              {"silence_rms", c.silence_rms},
              {"highband_atten_db", c.highband_atten_db}};
}

AnalysisConfig analysis_from_json(const json& j) {
  AnalysisConfig c;
  c.frame_len = j.at("frame_len").get<int>();
  c.hop = j.at("hop").get<int>();
  c.lpc_order_wide = j.at("lpc_order_wide").get<int>();
  c.lpc_order_tel = j.at("lpc_order_tel").get<int>();
  c.preemph_alpha = j.at("preemph_alpha").get<double>();
  c.noise_floor_alpha = j.at("noise_floor_alpha").get<double>();
  c.lag_beta = j.at("lag_beta").get<double>();
  c.fft_size = j.at("fft_size").get<int>();
  c.pitch_min = j.at("pitch_min").get<int>();
  c.pitch_max = j.at("pitch_max").get<int>();
  c.anti_doubling_theta = j.at("anti_doubling_theta").get<double>();
  c.silence_rms = j.at("silence_rms").get<double>();
  c.highband_atten_db = j.at("highband_atten_db").get<double>();
  c.validate();
  return c;
}

}  // namespace

void save_model(const std::string& path, const ModelBundle& bundle) {
  json payload;
  payload["analysis"] = analysis_to_json(bundle.analysis);
  payload["irs_inverse"] = bundle.irs_inverse;
  payload["feature_masks"] = json{
      {"regression", "all17+bias"},
      {"mlp", "drop pitch_period"},
      {"codebook", "drop pitch_period,d_cepstrum; pitch_gain x4"}};
  payload["std_mlp"] = standardizer_to_json(bundle.std_mlp);
  payload["std_codebook"] = standardizer_to_json(bundle.std_codebook);
  payload["reg_high"] = regression_to_json(bundle.reg_high);
  payload["reg_low"] = regression_to_json(bundle.reg_low);
  payload["predictor_high"] = bundle.predictor_high;
  payload["predictor_low"] = bundle.predictor_low;
  if (!bundle.cb_high.input_cb.centroids.empty()) {
    payload["cb_high"] =
        json{{"centroids", matrix_to_json(bundle.cb_high.input_cb.centroids,
                                          "codebook centroids")},
             {"outputs", matrix_to_json(bundle.cb_high.outputs, "codebook outputs")}};
  }
  if (!bundle.mlp_high.layers.empty()) payload["mlp_high"] = mlp_to_json(bundle.mlp_high);
  if (!bundle.mlp_low.layers.empty()) payload["mlp_low"] = mlp_to_json(bundle.mlp_low);
  if (bundle.vq_high.bits > 0) {
    payload["vq_high"] = json{
        {"bits", bundle.vq_high.bits},
        {"centroids", matrix_to_json(bundle.vq_high.cb.centroids, "VQ centroids")}};
  }

  json root;
  root["format_version"] = kFormatVersion;
  root["checksum"] = fnv1a64_hex(payload.dump());
  root["payload"] = payload;

  std::ofstream os(path);
  if (!os) throw DataError("cannot create model file: " + path);
  os << root.dump(1) << "\n";
  if (!os) throw DataError("short write to model file: " + path);
}

ModelBundle load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open model file: " + path);
  json root;
  try {
    is >> root;
  } catch (const json::exception& e) {
    throw DataError("malformed model file " + path + ": " + e.what());
  }
  try {
    if (root.at("format_version").get<std::string>() != kFormatVersion)
      throw DataError("unsupported model format version in " + path);
    const json& payload = root.at("payload");
    if (fnv1a64_hex(payload.dump()) != root.at("checksum").get<std::string>())
      throw DataError("model checksum mismatch in " + path);

    ModelBundle b;
    b.analysis = analysis_from_json(payload.at("analysis"));
    b.irs_inverse = payload.at("irs_inverse").get<bool>();
    b.std_mlp = standardizer_from_json(payload.at("std_mlp"));
    b.std_codebook = standardizer_from_json(payload.at("std_codebook"));
    b.reg_high = regression_from_json(payload.at("reg_high"));
    b.reg_low = regression_from_json(payload.at("reg_low"));
    b.predictor_high = payload.at("predictor_high").get<std::string>();
    b.predictor_low = payload.at("predictor_low").get<std::string>();
    if (payload.contains("cb_high")) {
      b.cb_high.input_cb.centroids =
          matrix_from_json(payload["cb_high"].at("centroids"));
      b.cb_high.outputs = matrix_from_json(payload["cb_high"].at("outputs"));
      if (b.cb_high.outputs.size() != b.cb_high.input_cb.centroids.size())
        throw DataError("model bundle: codebook centroid/output count mismatch");
    }
    if (payload.contains("mlp_high")) b.mlp_high = mlp_from_json(payload["mlp_high"]);
    if (payload.contains("mlp_low")) b.mlp_low = mlp_from_json(payload["mlp_low"]);
    if (payload.contains("vq_high")) {
      b.vq_high.bits = payload["vq_high"].at("bits").get<int>();
      b.vq_high.cb.centroids = matrix_from_json(payload["vq_high"].at("centroids"));
    }
    return b;
  } catch (const json::exception& e) {
    throw DataError("malformed model file " + path + ": " + e.what());
  }
}

}  // namespace bandex
