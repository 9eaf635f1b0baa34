#pragma once

#include <filesystem>
#include <optional>

#include "qsvm/kernel.hpp"

namespace qsvm {

// Binary kernel file, native little-endian:
//   "QKM1" | u64 rows | u64 cols | u64 shots | u64 seed | u32 tag_len | tag
//   | rows*cols f64, row-major
// A square Gram matrix has rows == cols == n.
void write_kernel(const KernelMatrix& k, const std::filesystem::path& path);
KernelMatrix read_kernel(const std::filesystem::path& path);

// Plain CSV of the entries, 17 significant digits, no header.
void write_kernel_csv(const KernelMatrix& k, const std::filesystem::path& path);

// Checkpoint file: the QKM1 header with rows == cols == n and no payload,
// followed by records "u64 i | (n - i) f64" holding K[i][i..n-1].
class GramCheckpoint {
 public:
  // Opens or creates the checkpoint. An existing file whose header differs
  // from `meta` (size, shots, seed, tag) is rejected with ParseError.
  GramCheckpoint(std::filesystem::path path, Eigen::Index n, const KernelMatrix& meta);

  // Number of leading rows already recovered into `upper`.
  Eigen::Index completed_rows() const { return completed_; }
  void restore(Eigen::MatrixXd& upper) const;
  void append_row(Eigen::Index i, const Eigen::MatrixXd& upper);

 private:
  std::filesystem::path path_;
  Eigen::Index n_;
  Eigen::Index completed_ = 0;
  Eigen::MatrixXd recovered_;
};

}  // namespace qsvm
