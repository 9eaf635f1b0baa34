#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace qsvm {

// Fraction of equal entries. Throws std::invalid_argument on empty or
// mismatched inputs.
double accuracy(std::span<const int> predicted, std::span<const int> truth);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

// Labels > 0 are positives. Thresholds sweep the distinct scores from high to
// low; tied scores move together. Starts at (0,0) and ends at (1,1). Throws
// std::invalid_argument unless both classes are present.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

// Trapezoidal area under the curve.
double auc(std::span<const RocPoint> roc);
double auc(std::span<const double> scores, std::span<const int> labels);

// "fpr,tpr" header followed by one point per line.
void write_roc_csv(std::span<const RocPoint> roc, const std::filesystem::path& path);

}  // namespace qsvm
