#include "qsvm/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "qsvm/kernel_io.hpp"
#include "qsvm/metrics.hpp"
#include "qsvm/rng.hpp"

namespace qsvm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kGeneratorStream = 0x67656e;   // "gen"
constexpr std::uint64_t kSplitStream = 0x73706c6974;   // "split"
constexpr std::uint64_t kKernelStream = 0x6b65726e;    // "kern"
constexpr std::uint64_t kCalibrationStream = 0x63616c; // "cal"

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw std::invalid_argument("unknown config key '" + where + key + "'");
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::vector<int> signed_labels(const std::vector<FeatureVector>& f) {
  std::vector<int> y;
  for (const auto& v : f) {
    if (v.label == Label::Unlabeled) throw std::invalid_argument("unlabeled event in experiment");
    y.push_back(to_int(v.label));
  }
  return y;
}

std::vector<int> class_labels(const std::vector<FeatureVector>& f) {
  std::vector<int> y;
  for (const auto& v : f) y.push_back(v.label == Label::Signal ? 1 : 0);
  return y;
}

SvmModel train_with_repair(KernelMatrix& k, std::span<const int> y, const TrainConfig& cfg,
                           PsdRepair repair) {
  SvmModel m = train(k.entries, y, cfg);
  if (!m.converged) {
    repair_psd(k.entries, repair);
    m = train(k.entries, y, cfg);
  }
  return m;
}

void write_scores(const fs::path& path, const Prediction& p, std::span<const int> truth) {
  std::ofstream out(path, std::ios::trunc);
  out << "index,label,score,unit_score,predicted\n";
  for (std::size_t i = 0; i < p.raw_scores.size(); ++i) {
    out << i << ',' << truth[i] << ',' << fmt(p.raw_scores[i]) << ',' << fmt(p.unit_scores[i]) << ','
        << p.classes[i] << '\n';
  }
}

struct Scored {
  double accuracy = 0.0;
  double auc = 0.0;
  Prediction prediction;
};

Scored score(const SvmModel& model, const Eigen::MatrixXd& k_cross, const std::vector<FeatureVector>& test) {
  Scored s;
  s.prediction = predict(model, k_cross);
  const auto truth = class_labels(test);
  s.accuracy = accuracy(s.prediction.classes, truth);
  s.auc = auc(s.prediction.raw_scores, truth);
  return s;
}

double select_rbf_sigma(const std::vector<FeatureVector>& train_f, const std::vector<int>& y,
                        const RbfBaseline& b, const TrainConfig& svm) {
  const std::size_t n = train_f.size();
  const int folds = std::max(2, std::min<int>(b.folds, static_cast<int>(n)));
  double best_sigma = b.sigmas.front();
  double best_auc = -1.0;
  for (double sigma : b.sigmas) {
    double total = 0.0;
    int used = 0;
    for (int f = 0; f < folds; ++f) {
      std::vector<FeatureVector> tr, va;
      std::vector<int> ytr;
      for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<int>(i % static_cast<std::size_t>(folds)) == f) {
          va.push_back(train_f[i]);
        } else {
          tr.push_back(train_f[i]);
          ytr.push_back(y[i]);
        }
      }
      const auto va_truth = class_labels(va);
      const bool both_train = std::count(ytr.begin(), ytr.end(), 1) > 0 &&
                              std::count(ytr.begin(), ytr.end(), -1) > 0;
      const bool both_val = std::count(va_truth.begin(), va_truth.end(), 1) > 0 &&
                            std::count(va_truth.begin(), va_truth.end(), 0) > 0;
      if (!both_train || !both_val) continue;
      const SvmModel m = train(rbf_gram(tr, sigma).entries, ytr, svm);
      const Eigen::VectorXd sc = decision_function(m, rbf_cross(va, tr, sigma).entries);
      total += auc(std::span<const double>(sc.data(), static_cast<std::size_t>(sc.size())), va_truth);
      ++used;
    }
    const double mean = used ? total / used : 0.0;
    if (mean > best_auc) {
      best_auc = mean;
      best_sigma = sigma;
    }
  }
  return best_sigma;
}

std::vector<MethodSummary> summarize(const std::vector<RepeatResult>& rows) {
  std::vector<std::string> order;
  for (const auto& r : rows)
    if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
  std::vector<MethodSummary> out;
  for (const auto& name : order) {
    std::vector<double> acc, au;
    for (const auto& r : rows) {
      if (r.method != name || !r.ok) continue;
      acc.push_back(r.accuracy);
      au.push_back(r.auc);
    }
    MethodSummary s;
    s.method = name;
    s.repeats = acc.size();
    std::tie(s.mean_accuracy, s.se_accuracy) = mean_and_stderr(acc);
    std::tie(s.mean_auc, s.se_auc) = mean_and_stderr(au);
    out.push_back(s);
  }
  return out;
}

std::string repeat_dir_name(std::size_t r) {
  std::ostringstream s;
  s << "repeat_" << (r < 10 ? "0" : "") << r;
  return s.str();
}

}  // namespace

void ExperimentConfig::validate() const {
  generator.validate();
  if (encoder.layers < 1) throw std::invalid_argument("encoder layers must be >= 1");
  if (n_repeats < 1) throw std::invalid_argument("n_repeats must be >= 1");
  if (n_train < 2 || n_test < 1) throw std::invalid_argument("need n_train >= 2 and n_test >= 1");
  if (n_train + n_test > 2 * generator.n_events) {
    throw std::invalid_argument("n_train + n_test exceeds the generated pool of " +
                                std::to_string(2 * generator.n_events) + " events");
  }
  if (!quantum && !baseline.enabled) throw std::invalid_argument("nothing to run: quantum and baseline both off");
  if (baseline.enabled && baseline.sigmas.empty()) throw std::invalid_argument("empty rbf sigma grid");
  for (double s : baseline.sigmas)
    if (!(s > 0.0)) throw std::invalid_argument("rbf sigmas must be positive");
  if (noise) noise->validate();
  if (mitigation.enabled && mitigation.shots == 0) throw std::invalid_argument("mitigation shots must be >= 1");
  if (!(svm.C > 0.0) || !(svm.tolerance > 0.0)) throw std::invalid_argument("svm C and tolerance must be positive");
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["generator"] = {{"n_particles", c.generator.n_particles},
                    {"n_events", c.generator.n_events},
                    {"jet_spread", c.generator.jet_spread},
                    {"momentum_scale", c.generator.momentum_scale}};
  j["encoder"] = {{"strategy", std::string(to_string(c.encoder.strategy))},
                  {"layers", c.encoder.layers},
                  {"intra", c.encoder.intra_particle_entangle}};
  j["quantum"] = c.quantum;
  j["shots"] = c.shots;
  if (c.noise) {
    json ro = json::array();
    for (const auto& m : c.noise->readout) ro.push_back({m(0, 1), m(1, 0)});
    j["noise"] = {{"p1", c.noise->p1},
                  {"p2", c.noise->p2},
                  {"readout", ro},
                  {"trajectories", c.noise->trajectories}};
  } else {
    j["noise"] = nullptr;
  }
  j["mitigation"] = {{"enabled", c.mitigation.enabled},
                     {"mode", c.mitigation.mode ? std::string(to_string(*c.mitigation.mode)) : "auto"},
                     {"shots", c.mitigation.shots}};
  j["svm"] = {{"C", c.svm.C}, {"tolerance", c.svm.tolerance}, {"max_iterations", c.svm.max_iterations}};
  j["psd_repair"] = c.psd_repair == PsdRepair::DiagonalShift ? "shift" : "clip";
  j["baseline"] = {{"rbf", c.baseline.enabled}, {"sigmas", c.baseline.sigmas}, {"folds", c.baseline.folds}};
  j["splits"] = {{"n_train", c.n_train}, {"n_test", c.n_test}, {"n_repeats", c.n_repeats}};
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.string();
  j["threads"] = c.threads;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  reject_unknown(j, {"generator", "encoder", "quantum", "shots", "noise", "mitigation", "svm", "psd_repair",
                     "baseline", "splits", "seed", "output_dir", "threads"},
                 "");
  if (j.contains("generator")) {
    const auto& g = j.at("generator");
    reject_unknown(g, {"n_particles", "n_events", "jet_spread", "momentum_scale", "preset"}, "generator.");
    if (g.contains("preset")) {
      const auto p = g.at("preset").get<std::string>();
      if (p == "default") c.generator = GenConfig{};
      else if (p == "three_particle") c.generator = GenConfig::three_particle();
      else if (p == "near_collinear") c.generator = GenConfig::near_collinear();
      else throw std::invalid_argument("unknown generator preset '" + p + "'");
    }
    read_opt(g, "n_particles", c.generator.n_particles);
    read_opt(g, "n_events", c.generator.n_events);
    read_opt(g, "jet_spread", c.generator.jet_spread);
    read_opt(g, "momentum_scale", c.generator.momentum_scale);
  }
  if (j.contains("encoder")) {
    const auto& e = j.at("encoder");
    reject_unknown(e, {"strategy", "layers", "intra"}, "encoder.");
    if (e.contains("strategy")) c.encoder.strategy = parse_strategy(e.at("strategy").get<std::string>());
    read_opt(e, "layers", c.encoder.layers);
    read_opt(e, "intra", c.encoder.intra_particle_entangle);
  }
  read_opt(j, "quantum", c.quantum);
  read_opt(j, "shots", c.shots);
  if (j.contains("noise") && !j.at("noise").is_null()) {
    const auto& n = j.at("noise");
    reject_unknown(n, {"preset", "p1", "p2", "readout", "readout_flip", "trajectories"}, "noise.");
    NoiseModel m;
    if (n.contains("preset")) {
      const auto p = n.at("preset").get<std::string>();
      if (p != "toronto_like") throw std::invalid_argument("unknown noise preset '" + p + "'");
      m = NoiseModel::toronto_like();
    }
    read_opt(n, "p1", m.p1);
    read_opt(n, "p2", m.p2);
    read_opt(n, "trajectories", m.trajectories);
    if (n.contains("readout_flip")) m.readout = {NoiseModel::symmetric_flip(n.at("readout_flip").get<double>())};
    if (n.contains("readout")) {
      m.readout.clear();
      for (const auto& q : n.at("readout")) {
        const double p01 = q.at(0).get<double>();
        const double p10 = q.at(1).get<double>();
        Eigen::Matrix2d mat;
        mat << 1.0 - p01, p01, p10, 1.0 - p10;
        m.readout.push_back(mat);
      }
    }
    c.noise = m;
  }
  if (j.contains("mitigation")) {
    const auto& m = j.at("mitigation");
    reject_unknown(m, {"enabled", "mode", "shots"}, "mitigation.");
    read_opt(m, "enabled", c.mitigation.enabled);
    read_opt(m, "shots", c.mitigation.shots);
    if (m.contains("mode")) {
      const auto mode = m.at("mode").get<std::string>();
      if (mode == "auto") c.mitigation.mode.reset();
      else c.mitigation.mode = parse_calibration_mode(mode);
    }
  }
  if (j.contains("svm")) {
    const auto& s = j.at("svm");
    reject_unknown(s, {"C", "tolerance", "max_iterations"}, "svm.");
    read_opt(s, "C", c.svm.C);
    read_opt(s, "tolerance", c.svm.tolerance);
    read_opt(s, "max_iterations", c.svm.max_iterations);
  }
  if (j.contains("psd_repair")) {
    const auto r = j.at("psd_repair").get<std::string>();
    if (r == "shift") c.psd_repair = PsdRepair::DiagonalShift;
    else if (r == "clip") c.psd_repair = PsdRepair::ClipEigenvalues;
    else throw std::invalid_argument("psd_repair must be 'shift' or 'clip'");
  }
  if (j.contains("baseline")) {
    const auto& b = j.at("baseline");
    reject_unknown(b, {"rbf", "sigmas", "folds"}, "baseline.");
    read_opt(b, "rbf", c.baseline.enabled);
    read_opt(b, "sigmas", c.baseline.sigmas);
    read_opt(b, "folds", c.baseline.folds);
  }
  if (j.contains("splits")) {
    const auto& s = j.at("splits");
    reject_unknown(s, {"n_train", "n_test", "n_repeats"}, "splits.");
    read_opt(s, "n_train", c.n_train);
    read_opt(s, "n_test", c.n_test);
    read_opt(s, "n_repeats", c.n_repeats);
  }
  read_opt(j, "seed", c.seed);
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  read_opt(j, "threads", c.threads);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return config_from_json(json::parse(in, nullptr, true, true));
}

const MethodSummary& ExperimentSummary::method(const std::string& name) const {
  for (const auto& m : methods)
    if (m.method == name) return m;
  throw std::out_of_range("no results for method '" + name + "'");
}

std::pair<double, double> mean_and_stderr(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

Split draw_split(std::size_t pool, std::size_t n_train, std::size_t n_test, std::uint64_t seed) {
  if (n_train + n_test > pool) throw std::invalid_argument("split larger than the event pool");
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  // Partial Fisher-Yates: only the first n_train + n_test slots are needed.
  for (std::size_t i = 0; i < n_train + n_test; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool - i));
    std::swap(idx[i], idx[j]);
  }
  Split s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
  return s;
}

void write_summary_csv(const ExperimentSummary& s, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "method,repeat,status,accuracy,auc,p_max,clamped,min_eigenvalue,rbf_sigma\n";
  for (const auto& r : s.rows) {
    out << r.method << ',' << r.repeat << ',' << (r.ok ? "ok" : "failed") << ',' << fmt(r.accuracy) << ','
        << fmt(r.auc) << ',' << fmt(r.p_max) << ',' << r.clamped << ',' << fmt(r.min_eigenvalue) << ','
        << fmt(r.rbf_sigma) << '\n';
  }
  for (const auto& m : s.methods) {
    out << m.method << ",mean,n=" << m.repeats << ',' << fmt(m.mean_accuracy) << ',' << fmt(m.mean_auc)
        << ",,,,\n";
    out << m.method << ",stderr,n=" << m.repeats << ',' << fmt(m.se_accuracy) << ',' << fmt(m.se_auc)
        << ",,,,\n";
  }
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  GenConfig gen = cfg.generator;
  gen.seed = derive_seed(cfg.seed, kGeneratorStream);
  std::vector<Event> pool = generate_dataset(gen);
  for (auto& e : pool) e = boost_to_cm(e);

  const bool write = !cfg.output_dir.empty();
  if (write) {
    fs::create_directories(cfg.output_dir);
    std::ofstream(cfg.output_dir / "resolved_config.json") << to_json(cfg).dump(2) << '\n';
    write_events(pool, cfg.output_dir / "pool.events");
  }

  ExperimentSummary summary;
  std::ofstream errors;
  for (std::size_t r = 0; r < cfg.n_repeats; ++r) {
    const fs::path dir = write ? cfg.output_dir / repeat_dir_name(r) : fs::path{};
    auto fail = [&](const std::string& method, const std::string& what) {
      RepeatResult row;
      row.method = method;
      row.repeat = r;
      row.ok = false;
      row.error = what;
      summary.rows.push_back(row);
      if (write) {
        if (!errors.is_open()) errors.open(cfg.output_dir / "errors.log", std::ios::app);
        errors << "repeat " << r << " [" << method << "]: " << what << '\n';
      }
    };

    std::vector<Event> train_e, test_e;
    std::vector<FeatureVector> train_f, test_f;
    std::vector<int> y_train;
    double p_max = 0.0;
    int clamped = 0;
    try {
      const Split split = draw_split(pool.size(), cfg.n_train, cfg.n_test, derive_seed(cfg.seed, kSplitStream, r));
      for (std::size_t i : split.train) train_e.push_back(pool[i]);
      for (std::size_t i : split.test) test_e.push_back(pool[i]);
      const std::vector<std::vector<Event>> both{train_e, test_e};
      p_max = compute_p_max(both);
      train_f = make_features(train_e, p_max);
      test_f = make_features(test_e, p_max);
      for (const auto& f : train_f) clamped += f.clamped;
      for (const auto& f : test_f) clamped += f.clamped;
      y_train = signed_labels(train_f);
      if (write) {
        fs::create_directories(dir);
        write_events(train_e, dir / "train.events");
        write_events(test_e, dir / "test.events");
        write_features(train_f, p_max, dir / "train.features");
        write_features(test_f, p_max, dir / "test.features");
      }
    } catch (const std::exception& e) {
      fail("preprocess", e.what());
      continue;
    }
    const auto truth = class_labels(test_f);

    if (cfg.quantum) {
      const std::string method = cfg.encoder.tag();
      try {
        GramOptions opts;
        opts.encoder = cfg.encoder;
        opts.threads = cfg.threads;
        opts.sampling.shots = cfg.shots;
        opts.sampling.seed = derive_seed(cfg.seed, kKernelStream, r);
        opts.sampling.noise = cfg.noise;
        if (cfg.shots > 0 && cfg.mitigation.enabled) {
          const int nq = qubit_count(cfg.encoder.strategy, train_f.front().values.size());
          const CalibrationMode mode = cfg.mitigation.mode.value_or(default_calibration_mode(nq));
          opts.sampling.mitigation = calibrate(nq, cfg.mitigation.shots, derive_seed(cfg.seed, kCalibrationStream, r),
                                               cfg.noise.value_or(NoiseModel{}), mode);
        }
        KernelMatrix k = gram_matrix(train_f, opts);
        const KernelMatrix kx = cross_gram(test_f, train_f, opts);
        RepeatResult row;
        row.method = method;
        row.repeat = r;
        row.p_max = p_max;
        row.clamped = clamped;
        row.min_eigenvalue = min_eigenvalue(k.entries);
        const SvmModel model = train_with_repair(k, y_train, cfg.svm, cfg.psd_repair);
        const Scored s = score(model, kx.entries, test_f);
        row.accuracy = s.accuracy;
        row.auc = s.auc;
        summary.rows.push_back(row);
        if (write) {
          write_kernel(k, dir / "train.qkm");
          write_kernel(kx, dir / "test.qkm");
          write_model(model, dir / "model.txt");
          write_scores(dir / "scores.csv", s.prediction, truth);
          write_roc_csv(roc_curve(s.prediction.raw_scores, truth), dir / "roc.csv");
        }
      } catch (const std::exception& e) {
        fail(method, e.what());
      }
    }

    if (cfg.baseline.enabled) {
      try {
        const double sigma = select_rbf_sigma(train_f, y_train, cfg.baseline, cfg.svm);
        const KernelMatrix k = rbf_gram(train_f, sigma);
        const KernelMatrix kx = rbf_cross(test_f, train_f, sigma);
        const SvmModel model = train(k.entries, y_train, cfg.svm);
        const Scored s = score(model, kx.entries, test_f);
        RepeatResult row;
        row.method = "rbf";
        row.repeat = r;
        row.p_max = p_max;
        row.clamped = clamped;
        row.min_eigenvalue = min_eigenvalue(k.entries);
        row.rbf_sigma = sigma;
        row.accuracy = s.accuracy;
        row.auc = s.auc;
        summary.rows.push_back(row);
        if (write) {
          write_kernel(k, dir / "rbf_train.qkm");
          write_kernel(kx, dir / "rbf_test.qkm");
          write_model(model, dir / "rbf_model.txt");
          write_scores(dir / "rbf_scores.csv", s.prediction, truth);
          write_roc_csv(roc_curve(s.prediction.raw_scores, truth), dir / "rbf_roc.csv");
        }
      } catch (const std::exception& e) {
        fail("rbf", e.what());
      }
    }

    summary.methods = summarize(summary.rows);
    if (write) write_summary_csv(summary, cfg.output_dir / "summary.csv");
  }
  summary.methods = summarize(summary.rows);
  return summary;
}

SweepAxis parse_sweep_axis(std::string_view name) {
  for (SweepAxis a : {SweepAxis::TrainSize, SweepAxis::Encoder, SweepAxis::Shots, SweepAxis::Layers,
                      SweepAxis::JetSpread})
    if (to_string(a) == name) return a;
  throw std::invalid_argument("unknown sweep axis '" + std::string(name) + "'");
}

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::TrainSize: return "train_size";
    case SweepAxis::Encoder: return "encoder";
    case SweepAxis::Shots: return "shots";
    case SweepAxis::Layers: return "layers";
    case SweepAxis::JetSpread: return "jet_spread";
  }
  return "unknown";
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis, const std::vector<std::string>& values) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  std::vector<SweepRow> rows;
  for (const auto& v : values) {
    ExperimentConfig cfg = base;
    switch (axis) {
      case SweepAxis::TrainSize: cfg.n_train = std::stoul(v); break;
      case SweepAxis::Encoder: cfg.encoder.strategy = parse_strategy(v); break;
      case SweepAxis::Shots: cfg.shots = std::stoull(v); break;
      case SweepAxis::Layers: cfg.encoder.layers = std::stoi(v); break;
      case SweepAxis::JetSpread: cfg.generator.jet_spread = std::stod(v); break;
    }
    if (!base.output_dir.empty()) cfg.output_dir = base.output_dir / (std::string(to_string(axis)) + "_" + v);
    const ExperimentSummary s = run_experiment(cfg);
    for (const auto& m : s.methods) rows.push_back({v, m});
  }
  if (!base.output_dir.empty()) {
    fs::create_directories(base.output_dir);
    std::ofstream out(base.output_dir / "sweep.csv", std::ios::trunc);
    out << to_string(axis) << ",method,repeats,mean_accuracy,se_accuracy,mean_auc,se_auc\n";
    for (const auto& r : rows) {
      out << r.value << ',' << r.summary.method << ',' << r.summary.repeats << ',' << fmt(r.summary.mean_accuracy)
          << ',' << fmt(r.summary.se_accuracy) << ',' << fmt(r.summary.mean_auc) << ',' << fmt(r.summary.se_auc)
          << '\n';
    }
  }
  return rows;
}

}  // namespace qsvm
