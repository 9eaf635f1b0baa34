#include "qsvm/datagen.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qsvm/error.hpp"
#include "qsvm/rng.hpp"

namespace qsvm {

namespace {

constexpr std::uint64_t kSignalStream = 0x5349474e;  // "SIGN"
constexpr std::uint64_t kBackgroundStream = 0x424b4744;  // "BKGD"

Eigen::Vector3d isotropic(Rng& rng) {
  const double cos_t = rng.uniform(-1.0, 1.0);
  const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return {sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t};
}

// Gamma(2) with unit mean: sum of two exponentials / 2.
double magnitude(Rng& rng, double scale) {
  double u1 = rng.uniform();
  double u2 = rng.uniform();
  while (u1 <= 0.0) u1 = rng.uniform();
  while (u2 <= 0.0) u2 = rng.uniform();
  return scale * 0.5 * (-std::log(u1) - std::log(u2));
}

// Removes net momentum, then rescales so the mean |p| is unchanged.
void recoil_correct(std::vector<Eigen::Vector3d>& ps) {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  double mean_before = 0.0;
  for (const auto& p : ps) {
    sum += p;
    mean_before += p.norm();
  }
  const Eigen::Vector3d shift = sum / static_cast<double>(ps.size());
  double mean_after = 0.0;
  for (auto& p : ps) {
    p -= shift;
    mean_after += p.norm();
  }
  if (mean_after > 0.0)
    for (auto& p : ps) p *= mean_before / mean_after;
}

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

double parse_real(const std::string& tok, std::size_t lineno) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  auto r = std::from_chars(tok.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) throw ParseError("bad number '" + tok + "'", lineno);
  if (!std::isfinite(v)) throw ParseError("non-finite value '" + tok + "'", lineno);
  return v;
}

long parse_int(const std::string& tok, std::size_t lineno) {
  long v = 0;
  const auto* end = tok.data() + tok.size();
  auto r = std::from_chars(tok.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) throw ParseError("bad integer '" + tok + "'", lineno);
  return v;
}

Label parse_label(const std::string& tok, std::size_t lineno) {
  const long l = parse_int(tok, lineno);
  if (l < -1 || l > 1) throw ParseError("label must be -1, 0 or 1", lineno);
  return static_cast<Label>(l);
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream s(line);
  std::vector<std::string> out;
  for (std::string t; s >> t;) out.push_back(t);
  return out;
}

bool skippable(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#';
}

}  // namespace

GenConfig GenConfig::three_particle() {
  GenConfig c;
  c.n_particles = 3;
  return c;
}

GenConfig GenConfig::near_collinear() {
  GenConfig c;
  c.jet_spread = 0.01;
  return c;
}

void GenConfig::validate() const {
  if (n_particles < 2) throw std::invalid_argument("n_particles must be >= 2");
  if (!(jet_spread > 0.0)) throw std::invalid_argument("jet_spread must be positive");
  if (!(momentum_scale > 0.0)) throw std::invalid_argument("momentum_scale must be positive");
}

Event generate_signal(const GenConfig& cfg, std::uint64_t index) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, kSignalStream, index));
  Event e;
  e.label = Label::Signal;
  for (int i = 0; i < cfg.n_particles; ++i)
    e.particles.push_back(magnitude(rng, cfg.momentum_scale) * isotropic(rng));
  recoil_correct(e.particles);
  return e;
}

Event generate_background(const GenConfig& cfg, std::uint64_t index) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, kBackgroundStream, index));
  const Eigen::Vector3d axis = isotropic(rng);
  Eigen::Vector3d e1 = axis.unitOrthogonal();
  const Eigen::Vector3d e2 = axis.cross(e1);
  Event e;
  e.label = Label::Background;
  const int forward = (cfg.n_particles + 1) / 2;
  for (int i = 0; i < cfg.n_particles; ++i) {
    const double side = i < forward ? 1.0 : -1.0;
    const double g1 = rng.normal() * cfg.jet_spread;
    const double g2 = rng.normal() * cfg.jet_spread;
    const Eigen::Vector3d dir = (side * axis + g1 * e1 + g2 * e2).normalized();
    e.particles.push_back(magnitude(rng, cfg.momentum_scale) * dir);
  }
  recoil_correct(e.particles);
  return e;
}

std::vector<Event> generate_dataset(const GenConfig& cfg) {
  cfg.validate();
  std::vector<Event> out;
  out.reserve(2 * cfg.n_events);
  for (std::size_t i = 0; i < cfg.n_events; ++i) {
    out.push_back(generate_signal(cfg, i));
    out.push_back(generate_background(cfg, i));
  }
  return out;
}

void write_events(std::span<const Event> events, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "# qsvm-events v1\n";
  for (const auto& e : events) {
    out << to_int(e.label) << ' ' << e.particles.size();
    for (const auto& p : e.particles) out << ' ' << fmt(p.x()) << ' ' << fmt(p.y()) << ' ' << fmt(p.z());
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<Event> read_events(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line) || line.rfind("# qsvm-events v1", 0) != 0) {
    throw ParseError("missing '# qsvm-events v1' header", 1);
  }
  ++lineno;
  std::vector<Event> events;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    const auto tok = tokens(line);
    if (tok.size() < 2) throw ParseError("expected 'label n momenta...'", lineno);
    Event e;
    e.label = parse_label(tok[0], lineno);
    const long n = parse_int(tok[1], lineno);
    if (n < 1) throw ParseError("event needs at least one particle", lineno);
    if (tok.size() != 2 + 3 * static_cast<std::size_t>(n)) {
      throw ParseError("expected " + std::to_string(3 * n) + " momentum components, found " +
                           std::to_string(tok.size() - 2),
                       lineno);
    }
    for (long i = 0; i < n; ++i) {
      const std::size_t b = 2 + 3 * static_cast<std::size_t>(i);
      e.particles.emplace_back(parse_real(tok[b], lineno), parse_real(tok[b + 1], lineno),
                               parse_real(tok[b + 2], lineno));
    }
    events.push_back(std::move(e));
  }
  return events;
}

void write_features(std::span<const FeatureVector> features, double p_max,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "# qsvm-features v1\n";
  out << "p_max " << fmt(p_max) << '\n';
  for (const auto& f : features) {
    out << to_int(f.label) << ' ' << f.clamped << ' ' << f.values.size();
    for (double v : f.values) out << ' ' << fmt(v);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

FeatureFile read_features(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line) || line.rfind("# qsvm-features v1", 0) != 0) {
    throw ParseError("missing '# qsvm-features v1' header", 1);
  }
  ++lineno;
  FeatureFile ff;
  bool have_pmax = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    const auto tok = tokens(line);
    if (!have_pmax) {
      if (tok.size() != 2 || tok[0] != "p_max") throw ParseError("expected 'p_max <value>'", lineno);
      ff.p_max = parse_real(tok[1], lineno);
      have_pmax = true;
      continue;
    }
    if (tok.size() < 3) throw ParseError("expected 'label clamped n values...'", lineno);
    FeatureVector f;
    f.label = parse_label(tok[0], lineno);
    f.clamped = static_cast<int>(parse_int(tok[1], lineno));
    const long n = parse_int(tok[2], lineno);
    if (n < 0 || tok.size() != 3 + static_cast<std::size_t>(n)) {
      throw ParseError("feature count does not match header", lineno);
    }
    for (long i = 0; i < n; ++i) f.values.push_back(parse_real(tok[3 + static_cast<std::size_t>(i)], lineno));
    ff.features.push_back(std::move(f));
  }
  if (!have_pmax) throw ParseError("missing p_max line", lineno);
  return ff;
}

}  // namespace qsvm
