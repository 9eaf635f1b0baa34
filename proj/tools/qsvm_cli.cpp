// qsvm: command line front end for the event-classification pipeline.
//
//   qsvm generate   -o pool.events
//   qsvm preprocess -i train.events -i test.events -o train.features -o test.features
//   qsvm kernel     --train train.features [--test test.features] -o k.qkm
//   qsvm train      --kernel train.qkm --features train.features -o model.txt
//   qsvm evaluate   --model model.txt --kernel test.qkm --features test.features
//   qsvm roc        --scores scores.csv -o roc.csv
//   qsvm run        --config cfg.json --set encoder.layers=1 -o out/
//   qsvm sweep      --config cfg.json --axis encoder --values combinatorial,bloch -o out/

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qsvm/datagen.hpp"
#include "qsvm/error.hpp"
#include "qsvm/experiment.hpp"
#include "qsvm/kernel.hpp"
#include "qsvm/kernel_io.hpp"
#include "qsvm/metrics.hpp"
#include "qsvm/rng.hpp"
#include "qsvm/svm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::vector<int> signed_labels(const std::vector<qsvm::FeatureVector>& f) {
  std::vector<int> y;
  for (const auto& v : f) {
    if (v.label == qsvm::Label::Unlabeled) throw UsageError("features must be labeled");
    y.push_back(qsvm::to_int(v.label));
  }
  return y;
}

std::vector<int> class_labels(const std::vector<qsvm::FeatureVector>& f) {
  std::vector<int> y;
  for (const auto& v : f) y.push_back(v.label == qsvm::Label::Signal ? 1 : 0);
  return y;
}

// "a.b.c=value" -> /a/b/c. The value is taken as JSON when it parses,
// otherwise as a plain string.
void apply_override(json& j, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + kv + "'");
  std::string pointer = "/" + kv.substr(0, eq);
  for (auto& c : pointer)
    if (c == '.') c = '/';
  const std::string text = kv.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  j[json::json_pointer(pointer)] = value;
}

qsvm::ExperimentConfig resolve_config(const std::string& path, const std::vector<std::string>& overrides,
                                      const std::string& out, unsigned threads) {
  json j = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config " + path);
    j = json::parse(in, nullptr, true, true);
  }
  for (const auto& kv : overrides) apply_override(j, kv);
  if (!out.empty()) j["output_dir"] = out;
  if (threads) j["threads"] = threads;
  try {
    auto cfg = qsvm::config_from_json(j);
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("bad config: ") + e.what());
  }
}

void print_summary(const qsvm::ExperimentSummary& s) {
  for (const auto& r : s.rows)
    if (!r.ok) std::cerr << "repeat " << r.repeat << " [" << r.method << "] failed: " << r.error << '\n';
  std::printf("%-24s %7s %18s %18s\n", "method", "repeats", "accuracy", "auc");
  for (const auto& m : s.methods) {
    std::printf("%-24s %7zu %9.4f +- %.4f %9.4f +- %.4f\n", m.method.c_str(), m.repeats, m.mean_accuracy,
                m.se_accuracy, m.mean_auc, m.se_auc);
  }
}

bool any_failed(const qsvm::ExperimentSummary& s) {
  for (const auto& r : s.rows)
    if (!r.ok) return true;
  return false;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-kernel SVM pipeline for signal/background event classification"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic labeled event pool");
  std::string gen_preset = "default", gen_out;
  qsvm::GenConfig gcfg;
  int gen_particles = 0;
  std::size_t gen_events = 0;
  double gen_spread = -1.0, gen_scale = -1.0;
  gen->add_option("--preset", gen_preset, "default | three_particle | near_collinear")
      ->check(CLI::IsMember({"default", "three_particle", "near_collinear"}));
  gen->add_option("--particles", gen_particles, "Particles per event")->check(CLI::PositiveNumber);
  gen->add_option("--events", gen_events, "Events per class")->check(CLI::PositiveNumber);
  gen->add_option("--spread", gen_spread, "Background jet spread (rad)");
  gen->add_option("--scale", gen_scale, "Mean momentum magnitude");
  gen->add_option("--seed", gcfg.seed, "Generator seed");
  gen->add_option("-o,--output", gen_out, "Events file")->required();

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Boost, rotate to the thrust frame and normalize");
  std::vector<std::string> pre_in, pre_out;
  double pre_pmax = 0.0;
  bool pre_no_boost = false;
  pre->add_option("-i,--input", pre_in, "Events files; p_max is taken over all of them")
      ->required()
      ->check(CLI::ExistingFile);
  pre->add_option("-o,--output", pre_out, "Feature files, one per input")->required();
  pre->add_option("--p-max", pre_pmax, "Fixed normalization momentum");
  pre->add_flag("--no-boost", pre_no_boost, "Inputs are already in the CM frame");

  // kernel
  auto* ker = app.add_subcommand("kernel", "Compute a Gram or cross-Gram matrix");
  std::string k_train, k_test, k_out, k_csv, k_strategy = "separate_particle_bloch", k_checkpoint;
  std::string k_noise = "none", k_calib = "auto";
  int k_layers = 2;
  bool k_no_intra = false, k_mitigate = false;
  std::uint64_t k_shots = 0, k_seed = 1, k_cal_shots = 8192;
  double k_flip = -1.0, k_sigma = 0.0;
  unsigned k_threads = 0;
  ker->add_option("--train", k_train, "Training features")->required()->check(CLI::ExistingFile);
  ker->add_option("--test", k_test, "Test features; gives the test x train cross kernel")
      ->check(CLI::ExistingFile);
  ker->add_option("-o,--output", k_out, "Binary kernel file")->required();
  ker->add_option("--csv", k_csv, "Also write the matrix as CSV");
  ker->add_option("--encoder", k_strategy, "combinatorial | bloch | separate_particle | separate_particle_bloch")
      ->check(CLI::IsMember({"combinatorial", "bloch", "separate_particle", "separate_particle_bloch"}));
  ker->add_option("--layers", k_layers, "Encoding layers")->check(CLI::PositiveNumber);
  ker->add_flag("--no-intra", k_no_intra, "Drop the intra-particle entangler");
  ker->add_option("--shots", k_shots, "0 = exact");
  ker->add_option("--seed", k_seed, "Sampling seed");
  ker->add_option("--noise", k_noise, "none | toronto_like")->check(CLI::IsMember({"none", "toronto_like"}));
  ker->add_option("--readout-flip", k_flip, "Symmetric readout flip probability (overrides preset)");
  ker->add_flag("--mitigate", k_mitigate, "Apply readout-error mitigation");
  ker->add_option("--calibration", k_calib, "auto | full | tensored")
      ->check(CLI::IsMember({"auto", "full", "tensored"}));
  ker->add_option("--calibration-shots", k_cal_shots, "Shots per calibration circuit");
  ker->add_option("--checkpoint", k_checkpoint, "Resume file for long Gram runs");
  ker->add_option("--rbf-sigma", k_sigma, "Classical RBF kernel instead of a quantum one");
  ker->add_option("--threads", k_threads, "Worker threads (0 = hardware)");

  // train
  auto* trn = app.add_subcommand("train", "Fit an SVM on a precomputed kernel");
  std::string t_kernel, t_features, t_out, t_repair = "shift";
  qsvm::TrainConfig tcfg;
  trn->add_option("--kernel", t_kernel, "Training Gram matrix")->required()->check(CLI::ExistingFile);
  trn->add_option("--features", t_features, "Training features (labels)")->required()->check(CLI::ExistingFile);
  trn->add_option("-C,--C", tcfg.C, "Box constraint")->check(CLI::PositiveNumber);
  trn->add_option("--tolerance", tcfg.tolerance, "KKT tolerance")->check(CLI::PositiveNumber);
  trn->add_option("--max-iterations", tcfg.max_iterations, "SMO iteration cap");
  trn->add_option("--repair", t_repair, "PSD repair on non-convergence: shift | clip")
      ->check(CLI::IsMember({"shift", "clip"}));
  trn->add_option("-o,--output", t_out, "Model file")->required();

  // evaluate
  auto* evl = app.add_subcommand("evaluate", "Score a test cross kernel with a trained model");
  std::string e_model, e_kernel, e_features, e_scores;
  evl->add_option("--model", e_model, "Model file")->required()->check(CLI::ExistingFile);
  evl->add_option("--kernel", e_kernel, "Test x train kernel")->required()->check(CLI::ExistingFile);
  evl->add_option("--features", e_features, "Test features (labels)")->required()->check(CLI::ExistingFile);
  evl->add_option("--scores", e_scores, "Write per-event scores as CSV");

  // roc
  auto* roc = app.add_subcommand("roc", "ROC curve from a scores CSV written by evaluate");
  std::string r_scores, r_out;
  roc->add_option("--scores", r_scores, "Scores CSV")->required()->check(CLI::ExistingFile);
  roc->add_option("-o,--output", r_out, "ROC CSV")->required();

  // run / sweep share the config handling
  std::string x_config, x_out, s_axis, s_values;
  std::vector<std::string> x_set;
  unsigned x_threads = 0;
  auto* run = app.add_subcommand("run", "Repeated-split experiment");
  auto* swp = app.add_subcommand("sweep", "Run one experiment per value of a config axis");
  for (auto* sc : {run, swp}) {
    sc->add_option("--config", x_config, "JSON config file")->check(CLI::ExistingFile);
    sc->add_option("--set", x_set, "Override, e.g. --set encoder.layers=1");
    sc->add_option("-o,--output", x_out, "Output directory");
    sc->add_option("--threads", x_threads, "Worker threads (0 = hardware)");
  }
  swp->add_option("--axis", s_axis, "train_size | encoder | shots | layers | jet_spread")->required();
  swp->add_option("--values", s_values, "Comma separated values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) {
      if (gen_preset == "three_particle") gcfg = qsvm::GenConfig::three_particle();
      if (gen_preset == "near_collinear") gcfg = qsvm::GenConfig::near_collinear();
      if (gen_particles) gcfg.n_particles = gen_particles;
      if (gen_events) gcfg.n_events = gen_events;
      if (gen_spread >= 0.0) gcfg.jet_spread = gen_spread;
      if (gen_scale >= 0.0) gcfg.momentum_scale = gen_scale;
      try {
        gcfg.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const auto events = qsvm::generate_dataset(gcfg);
      qsvm::write_events(events, gen_out);
      std::cout << "wrote " << events.size() << " events to " << gen_out << '\n';
    } else if (*pre) {
      if (pre_in.size() != pre_out.size()) throw UsageError("need one --output per --input");
      std::vector<std::vector<qsvm::Event>> sets;
      for (const auto& path : pre_in) {
        auto events = qsvm::read_events(path);
        if (!pre_no_boost)
          for (auto& e : events) e = qsvm::boost_to_cm(e);
        sets.push_back(std::move(events));
      }
      const double p_max = pre_pmax > 0.0 ? pre_pmax : qsvm::compute_p_max(sets);
      for (std::size_t i = 0; i < sets.size(); ++i) {
        const auto f = qsvm::make_features(sets[i], p_max);
        int clamped = 0;
        for (const auto& v : f) clamped += v.clamped;
        qsvm::write_features(f, p_max, pre_out[i]);
        std::cout << pre_out[i] << ": " << f.size() << " events, p_max " << fmt(p_max) << ", clamped "
                  << clamped << '\n';
      }
    } else if (*ker) {
      const auto train_f = qsvm::read_features(k_train).features;
      std::vector<qsvm::FeatureVector> test_f;
      if (!k_test.empty()) test_f = qsvm::read_features(k_test).features;
      qsvm::KernelMatrix k;
      if (k_sigma > 0.0) {
        k = k_test.empty() ? qsvm::rbf_gram(train_f, k_sigma) : qsvm::rbf_cross(test_f, train_f, k_sigma);
      } else {
        qsvm::GramOptions opts;
        opts.encoder.strategy = qsvm::parse_strategy(k_strategy);
        opts.encoder.layers = k_layers;
        opts.encoder.intra_particle_entangle = !k_no_intra;
        opts.threads = k_threads;
        opts.sampling.shots = k_shots;
        opts.sampling.seed = k_seed;
        if (k_noise == "toronto_like") opts.sampling.noise = qsvm::NoiseModel::toronto_like();
        if (k_flip >= 0.0) {
          if (!opts.sampling.noise) opts.sampling.noise = qsvm::NoiseModel{};
          opts.sampling.noise->readout = {qsvm::NoiseModel::symmetric_flip(k_flip)};
        }
        if (k_mitigate) {
          if (k_shots == 0) throw UsageError("--mitigate needs --shots > 0");
          const int nq = qsvm::qubit_count(opts.encoder.strategy, train_f.front().values.size());
          const auto mode = k_calib == "auto" ? qsvm::default_calibration_mode(nq)
                                              : qsvm::parse_calibration_mode(k_calib);
          opts.sampling.mitigation = qsvm::calibrate(nq, k_cal_shots, qsvm::derive_seed(k_seed, 0x63616c),
                                                     opts.sampling.noise.value_or(qsvm::NoiseModel{}), mode);
        }
        if (!k_checkpoint.empty()) opts.checkpoint = k_checkpoint;
        k = k_test.empty() ? qsvm::gram_matrix(train_f, opts) : qsvm::cross_gram(test_f, train_f, opts);
      }
      qsvm::write_kernel(k, k_out);
      if (!k_csv.empty()) qsvm::write_kernel_csv(k, k_csv);
      std::cout << "wrote " << k.rows() << "x" << k.cols() << " kernel (" << k.encoder << ") to " << k_out << '\n';
    } else if (*trn) {
      qsvm::KernelMatrix k = qsvm::read_kernel(t_kernel);
      const auto y = signed_labels(qsvm::read_features(t_features).features);
      const auto repair = t_repair == "clip" ? qsvm::PsdRepair::ClipEigenvalues : qsvm::PsdRepair::DiagonalShift;
      qsvm::SvmModel m = qsvm::train(k.entries, y, tcfg);
      if (!m.converged) {
        const double lmin = qsvm::repair_psd(k.entries, repair);
        std::cerr << "SMO did not converge; repaired kernel (min eigenvalue " << fmt(lmin) << ") and retrained\n";
        m = qsvm::train(k.entries, y, tcfg);
      }
      qsvm::write_model(m, t_out);
      std::cout << "support vectors " << m.support.size() << ", iterations " << m.iterations << ", objective "
                << fmt(m.objective) << (m.converged ? "" : " (not converged)") << '\n';
    } else if (*evl) {
      const qsvm::SvmModel m = qsvm::read_model(e_model);
      const qsvm::KernelMatrix k = qsvm::read_kernel(e_kernel);
      const auto test_f = qsvm::read_features(e_features).features;
      if (static_cast<std::size_t>(k.rows()) != test_f.size())
        throw UsageError("kernel has " + std::to_string(k.rows()) + " rows but features hold " +
                         std::to_string(test_f.size()) + " events");
      const auto p = qsvm::predict(m, k.entries);
      const auto truth = class_labels(test_f);
      std::cout << "accuracy " << fmt(qsvm::accuracy(p.classes, truth)) << "\nauc "
                << fmt(qsvm::auc(p.raw_scores, truth)) << '\n';
      if (!e_scores.empty()) {
        std::ofstream out(e_scores, std::ios::trunc);
        out << "index,label,score,unit_score,predicted\n";
        for (std::size_t i = 0; i < truth.size(); ++i)
          out << i << ',' << truth[i] << ',' << fmt(p.raw_scores[i]) << ',' << fmt(p.unit_scores[i]) << ','
              << p.classes[i] << '\n';
      }
    } else if (*roc) {
      std::ifstream in(r_scores);
      std::string line;
      std::getline(in, line);
      std::vector<double> scores;
      std::vector<int> labels;
      std::size_t lineno = 1;
      while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream s(line);
        std::string idx, label, score;
        if (!std::getline(s, idx, ',') || !std::getline(s, label, ',') || !std::getline(s, score, ','))
          throw qsvm::ParseError("expected index,label,score", lineno);
        try {
          labels.push_back(std::stoi(label));
          scores.push_back(std::stod(score));
        } catch (const std::exception&) {
          throw qsvm::ParseError("bad number", lineno);
        }
      }
      const auto curve = qsvm::roc_curve(scores, labels);
      qsvm::write_roc_csv(curve, r_out);
      std::cout << "auc " << fmt(qsvm::auc(curve)) << '\n';
    } else if (*run) {
      const auto cfg = resolve_config(x_config, x_set, x_out, x_threads);
      const auto s = qsvm::run_experiment(cfg);
      print_summary(s);
      if (any_failed(s)) return kExitRuntime;
    } else if (*swp) {
      auto cfg = resolve_config(x_config, x_set, x_out, x_threads);
      qsvm::SweepAxis axis;
      try {
        axis = qsvm::parse_sweep_axis(s_axis);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const auto rows = qsvm::sweep(cfg, axis, split_list(s_values));
      std::printf("%-24s %-24s %7s %18s\n", std::string(qsvm::to_string(axis)).c_str(), "method", "repeats", "auc");
      for (const auto& r : rows)
        std::printf("%-24s %-24s %7zu %9.4f +- %.4f\n", r.value.c_str(), r.summary.method.c_str(), r.summary.repeats,
                    r.summary.mean_auc, r.summary.se_auc);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
