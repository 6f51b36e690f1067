// Command-line front end: extend a telephone recording, train or
// evaluate predictor models, or just design the inverse send filter.
#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "bandex/errors.hpp"
#include "bandex/fir.hpp"
#include "bandex/model_io.hpp"
#include "bandex/pipeline.hpp"
#include "bandex/wav.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

struct CommonArgs {
  std::string config;
  std::vector<std::string> sets;
  std::string irs_table;
};

void add_common(CLI::App* sc, CommonArgs& c) {
  sc->add_option("--config", c.config, "key=value configuration file");
  sc->add_option("--set", c.sets,
                 "override one configuration key (key=value, repeatable)");
  sc->add_option("--irs-table", c.irs_table,
                 "send-characteristic magnitude table");
}

bandex::PipelineConfig make_config(const CommonArgs& c) {
  bandex::PipelineConfig cfg;
  if (!c.config.empty()) cfg = bandex::load_pipeline_config(c.config);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw bandex::DataError("--set expects key=value, got '" + kv + "'");
    bandex::apply_config_line(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!c.irs_table.empty()) cfg.irs_table = c.irs_table;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speech bandwidth extension for telephone-band audio"};
  app.require_subcommand(1);

  CommonArgs c_ext, c_train, c_eval;
  std::string in_path, out_path, model_path_ext;
  bool no_irs_inverse = false;
  std::string corpus_train, model_out, predictor, hidden;
  int codebook_bits = -1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string corpus_eval, model_path_eval, report_path, frames_path;
  std::string table_path, taps_out;
  int half_order = 30;

  auto* sc_ext = app.add_subcommand(
      "extend", "Reconstruct 16 kHz wideband speech from an 8 kHz recording");
  sc_ext->add_option("--in", in_path, "input wav (8 kHz mono PCM)")->required();
  sc_ext->add_option("--out", out_path, "output wav (16 kHz)")->required();
  sc_ext->add_option("--model", model_path_ext, "trained model file")->required();
  sc_ext->add_flag("--no-irs-inverse", no_irs_inverse,
                   "skip the inverse send filter even if the model used it");
  add_common(sc_ext, c_ext);

  auto* sc_train = app.add_subcommand(
      "train", "Fit the band predictors on a directory of 16 kHz wav files");
  sc_train->add_option("--corpus", corpus_train, "directory of 16 kHz wavs")
      ->required();
  sc_train->add_option("--out", model_out, "model file to write")->required();
  sc_train->add_option("--predictor", predictor,
                       "high-band predictor: regression|codebook|mlp");
  sc_train->add_option("--hidden", hidden,
                       "high-band network layout, e.g. 30,30");
  sc_train->add_option("--codebook-bits", codebook_bits,
                       "codebook size as a bit count (2..11)");
  auto* seed_opt = sc_train->add_option("--seed", seed, "training seed");
  add_common(sc_train, c_train);

  auto* sc_eval = app.add_subcommand(
      "eval", "Score a trained model against wideband reference files");
  sc_eval->add_option("--corpus", corpus_eval, "directory of 16 kHz wavs")
      ->required();
  sc_eval->add_option("--model", model_path_eval, "trained model file")
      ->required();
  sc_eval->add_option("--report", report_path, "write the text report here");
  sc_eval->add_option("--frames", frames_path, "write per-frame scores (csv)");
  add_common(sc_eval, c_eval);

  auto* sc_irs = app.add_subcommand(
      "design-irs-inverse",
      "Design the telephone-band inverse of a send characteristic");
  sc_irs->add_option("--irs-table", table_path, "magnitude table file")
      ->required();
  sc_irs->add_option("--out", taps_out, "text file for the filter taps")
      ->required();
  sc_irs->add_option("--half-order", half_order,
                     "half order (taps = 2*half_order + 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  seed_given = seed_opt->count() > 0;

  try {
    if (sc_ext->parsed()) {
      const auto cfg = make_config(c_ext);
      auto bundle = bandex::load_model(model_path_ext);
      if (no_irs_inverse) bundle.irs_inverse = false;
      const auto in = bandex::read_wav(in_path);
      const auto out = bandex::extend_signal(in, bundle, cfg);
      bandex::write_wav(out_path, out);
      std::cout << "wrote " << out_path << " (" << out.samples.size()
                << " samples at " << out.sample_rate << " Hz)\n";
    } else if (sc_train->parsed()) {
      auto cfg = make_config(c_train);
      if (!predictor.empty()) cfg.predictor_high = predictor;
      if (!hidden.empty())
        bandex::apply_config_line(cfg, "mlp_hidden_high", hidden);
      if (codebook_bits >= 0) {
        if (codebook_bits < 2 || codebook_bits > 11)
          throw bandex::DataError("--codebook-bits must be 2..11");
        cfg.codebook_size = 1 << codebook_bits;
      }
      if (seed_given) cfg.seed = seed;
      const auto files = bandex::list_corpus(corpus_train);
      const auto res = bandex::train_corpus(files, cfg);
      bandex::save_model(model_out, res.bundle);
      std::cout << res.report;
      std::cout << "model written to " << model_out << "\n";
    } else if (sc_eval->parsed()) {
      const auto cfg = make_config(c_eval);
      const auto bundle = bandex::load_model(model_path_eval);
      const auto files = bandex::list_corpus(corpus_eval);
      const auto rep = bandex::evaluate_corpus(files, bundle, cfg);
      std::cout << rep.text();
      if (!report_path.empty()) {
        std::ofstream rf(report_path);
        if (!rf)
          throw bandex::DataError("cannot open report file: " + report_path);
        rf << rep.text();
      }
      if (!frames_path.empty()) {
        rep.write_csv(frames_path);
        std::cout << "per-frame scores written to " << frames_path << "\n";
      }
    } else if (sc_irs->parsed()) {
      const auto resp = bandex::load_magnitude_table(table_path, 512);
      const auto filt = bandex::design_inverse_irs(
          resp, half_order, 2.0 * kPi * 200.0 / 8000.0,
          2.0 * kPi * 3500.0 / 8000.0);
      std::ofstream out(taps_out);
      if (!out)
        throw bandex::DataError("cannot open tap output: " + taps_out);
      out << std::setprecision(17);
      for (double t : filt.taps) out << t << "\n";
      std::cout << "wrote " << filt.taps.size() << " taps to " << taps_out
                << "\n";
    }
  } catch (const bandex::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const bandex::TrainingError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return 3;
  } catch (const bandex::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
