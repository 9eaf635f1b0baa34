#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsvm/datagen.hpp"
#include "qsvm/encoders.hpp"
#include "qsvm/kernel.hpp"
#include "qsvm/noise.hpp"
#include "qsvm/svm.hpp"

namespace qsvm {

struct MitigationConfig {
  bool enabled = false;
  std::optional<CalibrationMode> mode;  // unset: default_calibration_mode(n_qubits)
  std::uint64_t shots = 8192;
};

struct RbfBaseline {
  bool enabled = false;
  std::vector<double> sigmas{0.5, 1.0, 2.0, 4.0, 8.0};
  int folds = 3;  // sigma chosen by cross-validated AUC on the training split
};

// Desk-scale defaults: 3 particles, 30/30 split, 10 repeats, separate
// particle with Bloch encoding, 8192 shots.
struct ExperimentConfig {
  GenConfig generator = GenConfig::three_particle();  // generator.seed is derived from `seed`
  EncoderSpec encoder;
  bool quantum = true;
  std::uint64_t shots = 8192;  // 0 = exact kernels
  std::optional<NoiseModel> noise;
  MitigationConfig mitigation;
  TrainConfig svm;
  PsdRepair psd_repair = PsdRepair::DiagonalShift;
  RbfBaseline baseline;
  std::size_t n_train = 30;
  std::size_t n_test = 30;
  std::size_t n_repeats = 10;
  std::uint64_t seed = 2022;
  std::filesystem::path output_dir;  // empty: nothing is written
  unsigned threads = 0;

  // Throws std::invalid_argument.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RepeatResult {
  std::string method;  // encoder tag or "rbf"
  std::size_t repeat = 0;
  bool ok = true;
  std::string error;
  double accuracy = 0.0;
  double auc = 0.0;
  double p_max = 0.0;
  int clamped = 0;
  double min_eigenvalue = 0.0;  // of the training kernel
  double rbf_sigma = 0.0;
};

struct MethodSummary {
  std::string method;
  std::size_t repeats = 0;  // successful repeats
  double mean_accuracy = 0.0, se_accuracy = 0.0;
  double mean_auc = 0.0, se_auc = 0.0;
};

struct ExperimentSummary {
  std::vector<RepeatResult> rows;
  std::vector<MethodSummary> methods;

  const MethodSummary& method(const std::string& name) const;
};

// Mean and standard error (sample std / sqrt(n)); se is 0 for n < 2.
std::pair<double, double> mean_and_stderr(const std::vector<double>& v);

// Disjoint seeded train/test index draw from a pool of `pool` events.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
Split draw_split(std::size_t pool, std::size_t n_train, std::size_t n_test, std::uint64_t seed);

// Runs every repeat. When cfg.output_dir is set, writes resolved_config.json,
// summary.csv (rewritten after each repeat) and per-repeat artifacts under
// repeat_<k>/.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

void write_summary_csv(const ExperimentSummary& s, const std::filesystem::path& path);

enum class SweepAxis { TrainSize, Encoder, Shots, Layers, JetSpread };
SweepAxis parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis a);

struct SweepRow {
  std::string value;
  MethodSummary summary;
};

// One experiment per value; results go to <output_dir>/<axis>_<value>/ and
// one row per (value, method) to <output_dir>/sweep.csv.
std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis,
                            const std::vector<std::string>& values);

}  // namespace qsvm
