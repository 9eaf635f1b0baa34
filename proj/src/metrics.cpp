#include "qsvm/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace qsvm {

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.empty()) throw std::invalid_argument("accuracy of an empty prediction");
  if (predicted.size() != truth.size()) throw std::invalid_argument("accuracy: length mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_curve: length mismatch");
  std::size_t pos = 0;
  for (int l : labels) pos += l > 0;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw std::invalid_argument("roc_curve needs both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> roc{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    for (; k < order.size() && scores[order[k]] == s; ++k) {
      if (labels[order[k]] > 0) ++tp;
      else ++fp;
    }
    roc.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                   static_cast<double>(tp) / static_cast<double>(pos)});
  }
  return roc;
}

double auc(std::span<const RocPoint> roc) {
  double area = 0.0;
  for (std::size_t k = 1; k < roc.size(); ++k)
    area += (roc[k].fpr - roc[k - 1].fpr) * (roc[k].tpr + roc[k - 1].tpr);
  return 0.5 * area;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  return auc(roc_curve(scores, labels));
}

void write_roc_csv(std::span<const RocPoint> roc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "fpr,tpr\n";
  char buf[64];
  for (const auto& p : roc) {
    auto r = std::to_chars(buf, buf + sizeof(buf), p.fpr);
    out.write(buf, r.ptr - buf);
    out << ',';
    r = std::to_chars(buf, buf + sizeof(buf), p.tpr);
    out.write(buf, r.ptr - buf);
    out << '\n';
  }
}

}  // namespace qsvm
