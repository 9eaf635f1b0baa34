#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "qsvm/metrics.hpp"
#include "qsvm/rng.hpp"

using namespace qsvm;

TEST_CASE("accuracy") {
  const std::vector<int> a{1, 1, 0, 0};
  const std::vector<int> inv{0, 0, 1, 1};
  CHECK(accuracy(a, a) == 1.0);
  CHECK(accuracy(a, inv) == 0.0);
  CHECK(accuracy(a, std::vector<int>{1, 0, 0, 0}) == 0.75);
  CHECK_THROWS_AS(accuracy(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
  CHECK_THROWS_AS(accuracy(a, std::vector<int>{1}), std::invalid_argument);
}

TEST_CASE("roc curve shapes") {
  SUBCASE("perfect separation passes through (0,1)") {
    const std::vector<double> s{0.9, 0.8, 0.2, 0.1};
    const std::vector<int> y{1, 1, 0, 0};
    const auto roc = roc_curve(s, y);
    bool corner = false;
    for (const auto& p : roc) corner = corner || (p.fpr == 0.0 && p.tpr == 1.0);
    CHECK(corner);
    CHECK(auc(roc) == 1.0);
  }
  SUBCASE("single tie group") {
    const std::vector<double> s(6, 0.3);
    const std::vector<int> y{1, 0, 1, 0, 0, 1};
    const auto roc = roc_curve(s, y);
    REQUIRE(roc.size() == 2);
    CHECK(roc[0].fpr == 0.0);
    CHECK(roc[0].tpr == 0.0);
    CHECK(roc[1].fpr == 1.0);
    CHECK(roc[1].tpr == 1.0);
    CHECK(auc(roc) == 0.5);
  }
  SUBCASE("hand-enumerated thresholds") {
    const std::vector<double> s{0.9, 0.8, 0.7, 0.6};
    const std::vector<int> y{1, 1, 0, 1};
    const auto roc = roc_curve(s, y);
    const std::vector<std::pair<double, double>> expected{{0, 0}, {0, 1.0 / 3}, {0, 2.0 / 3}, {1, 2.0 / 3}, {1, 1}};
    REQUIRE(roc.size() == expected.size());
    for (std::size_t i = 0; i < roc.size(); ++i) {
      CHECK(roc[i].fpr == doctest::Approx(expected[i].first));
      CHECK(roc[i].tpr == doctest::Approx(expected[i].second));
    }
  }
  CHECK_THROWS_AS(roc_curve(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), std::invalid_argument);
}

TEST_CASE("trapezoidal AUC equals the pairwise statistic") {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 200; ++i) {
      // Coarse grid forces ties.
      s.push_back(std::round(rng.uniform() * 20) / 20);
      y.push_back(static_cast<int>(rng.below(2)));
    }
    y[0] = 1;
    y[1] = 0;
    CHECK(std::abs(auc(s, y) - oracle::auc_pairwise(s, y)) < 1e-12);
  }
}

TEST_CASE("AUC invariants") {
  Rng rng(4);
  std::vector<double> s, affine, expo, neg;
  std::vector<int> y;
  for (int i = 0; i < 100; ++i) {
    s.push_back(rng.normal());
    y.push_back(i % 3 == 0 ? 1 : 0);
  }
  for (double v : s) {
    affine.push_back(3.0 * v - 7.0);
    expo.push_back(std::exp(v));
    neg.push_back(-v);
  }
  const double a = auc(s, y);
  CHECK(auc(affine, y) == a);
  CHECK(auc(expo, y) == a);
  CHECK(std::abs(a + auc(neg, y) - 1.0) < 1e-12);
  const auto roc = roc_curve(s, y);
  for (std::size_t i = 1; i < roc.size(); ++i) {
    CHECK(roc[i].fpr >= roc[i - 1].fpr);
    CHECK(roc[i].tpr >= roc[i - 1].tpr);
  }
}

TEST_CASE("roc csv") {
  const auto p = std::filesystem::temp_directory_path() / "qsvm_test_roc.csv";
  const std::vector<double> s{0.9, 0.1};
  const std::vector<int> y{1, 0};
  write_roc_csv(roc_curve(s, y), p);
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  CHECK(line == "fpr,tpr");
  std::getline(in, line);
  CHECK(line == "0,0");
  std::filesystem::remove(p);
}
