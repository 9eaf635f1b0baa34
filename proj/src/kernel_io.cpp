#include "qsvm/kernel_io.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "qsvm/error.hpp"

namespace qsvm {

namespace {

constexpr std::array<char, 4> kMagic = {'Q', 'K', 'M', '1'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

void write_header(std::ostream& out, std::uint64_t rows, std::uint64_t cols, const KernelMatrix& k) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint64_t>(out, rows);
  put<std::uint64_t>(out, cols);
  put<std::uint64_t>(out, k.shots);
  put<std::uint64_t>(out, k.seed);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(k.encoder.size()));
  out.write(k.encoder.data(), static_cast<std::streamsize>(k.encoder.size()));
}

struct Header {
  std::uint64_t rows = 0, cols = 0;
  KernelMatrix meta;
};

Header read_header(std::istream& in, const std::filesystem::path& path) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw ParseError(path.string() + ": not a QKM1 kernel file");
  }
  Header h;
  std::uint32_t tag_len = 0;
  if (!get(in, h.rows) || !get(in, h.cols) || !get(in, h.meta.shots) || !get(in, h.meta.seed) ||
      !get(in, tag_len)) {
    throw ParseError(path.string() + ": truncated kernel header");
  }
  if (tag_len > 4096) throw ParseError(path.string() + ": implausible encoder tag length");
  h.meta.encoder.resize(tag_len);
  if (!in.read(h.meta.encoder.data(), tag_len)) {
    throw ParseError(path.string() + ": truncated encoder tag");
  }
  return h;
}

}  // namespace

void write_kernel(const KernelMatrix& k, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_header(out, static_cast<std::uint64_t>(k.rows()), static_cast<std::uint64_t>(k.cols()), k);
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = 0; j < k.cols(); ++j) put<double>(out, k.entries(i, j));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

KernelMatrix read_kernel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Header h = read_header(in, path);
  if (h.rows > (1u << 20) || h.cols > (1u << 20)) throw ParseError(path.string() + ": implausible size");
  KernelMatrix k = std::move(h.meta);
  k.entries.resize(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols));
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      if (!get(in, k.entries(i, j))) throw ParseError(path.string() + ": truncated payload");
    }
  }
  return k;
}

void write_kernel_csv(const KernelMatrix& k, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  char buf[64];
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      auto res = std::to_chars(buf, buf + sizeof(buf), k.entries(i, j));
      if (j) out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

GramCheckpoint::GramCheckpoint(std::filesystem::path path, Eigen::Index n, const KernelMatrix& meta)
    : path_(std::move(path)), n_(n), recovered_(Eigen::MatrixXd::Zero(n, n)) {
  std::streamoff valid_end = 0;
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    Header h = read_header(in, path_);
    if (h.rows != static_cast<std::uint64_t>(n) || h.cols != static_cast<std::uint64_t>(n) ||
        h.meta.shots != meta.shots || h.meta.seed != meta.seed || h.meta.encoder != meta.encoder) {
      throw ParseError(path_.string() + ": checkpoint belongs to a different kernel computation");
    }
    valid_end = in.tellg();
    for (;;) {
      std::uint64_t i = 0;
      if (!get(in, i) || i != static_cast<std::uint64_t>(completed_)) break;
      bool complete = true;
      for (Eigen::Index j = completed_; j < n_ && complete; ++j)
        complete = get(in, recovered_(completed_, j));
      if (!complete) break;
      ++completed_;
      valid_end = in.tellg();
    }
    in.close();
    // Drop a partially written trailing record.
    std::filesystem::resize_file(path_, static_cast<std::uintmax_t>(valid_end));
  } else {
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot create checkpoint " + path_.string());
    write_header(out, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(n), meta);
  }
}

void GramCheckpoint::restore(Eigen::MatrixXd& upper) const {
  for (Eigen::Index i = 0; i < completed_; ++i)
    for (Eigen::Index j = i; j < n_; ++j) upper(i, j) = recovered_(i, j);
}

void GramCheckpoint::append_row(Eigen::Index i, const Eigen::MatrixXd& upper) {
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot append to checkpoint " + path_.string());
  put<std::uint64_t>(out, static_cast<std::uint64_t>(i));
  for (Eigen::Index j = i; j < n_; ++j) put<double>(out, upper(i, j));
  out.flush();
  if (!out) throw std::runtime_error("checkpoint write failed: " + path_.string());
  completed_ = std::max(completed_, i + 1);
}

}  // namespace qsvm
