#include <doctest.h>

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "lec/noise.hpp"

using namespace lec;

namespace {

LabeledDataset balanced(int classes, int per_class, std::uint64_t seed = 1, int dim = 0) {
  return synth_clusters({classes, per_class, dim > 0 ? dim : classes, 1.0, 4.0, 0, seed});
}

void check_row_stochastic(const CorruptionMatrix& m) {
  CHECK((m.array() >= 0.0).all());
  for (Eigen::Index j = 0; j < m.rows(); ++j) CHECK(std::abs(m.row(j).sum() - 1.0) <= 1e-9);
}

}  // namespace

TEST_CASE("noise kind names") {
  for (auto k : {NoiseKind::Sym, NoiseKind::Asym, NoiseKind::OpenSet, NoiseKind::Semantic})
    CHECK(parse_noise_kind(noise_kind_name(k)) == k);
  CHECK(parse_noise_kind("Open-Set") == NoiseKind::OpenSet);
  CHECK_FALSE(parse_noise_kind("pair").has_value());
}

TEST_CASE("noisy count") {
  CHECK(noisy_count(10000, 60) == 6000);
  CHECK(noisy_count(7, 50) == 3);
  CHECK(noisy_count(10, 0) == 0);
  CHECK_THROWS_AS(noisy_count(10, 100), std::invalid_argument);
}

TEST_CASE("zero noise is the identity") {
  const auto d = balanced(4, 20);
  for (const auto& n : {apply_sym(d, 0, 1), apply_asym(d, 0, 1), apply_openset(d, d.features(), 0, 1),
                        apply_semantic_from(d, {}, 0)}) {
    CHECK(n.observed() == d.observed());
    CHECK(n.features() == d.features());
    CHECK(n.is_clean());
  }
}

TEST_CASE("symmetric noise") {
  const auto d = balanced(10, 1000);
  const auto n = apply_sym(d, 60, 5);
  CHECK(n.noisy_count() == 6000);
  std::map<int, int> per_class;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n.is_noisy(i)) {
      CHECK(n.observed(i) != n.truth(i));
      ++per_class[n.truth(i)];
    }
  }
  for (const auto& [k, c] : per_class) CHECK(c == 600);
  const auto m = corruption_matrix(n);
  check_row_stochastic(m);
  for (int j = 0; j < 10; ++j)
    for (int i = 0; i < 10; ++i) CHECK(std::abs(m(j, i) - (i == j ? 0.4 : 0.6 / 9)) <= 0.02);

  const auto again = apply_sym(d, 60, 5);
  CHECK(again.observed() == n.observed());
  CHECK(apply_sym(d, 60, 6).observed() != n.observed());
  CHECK_THROWS_AS(apply_sym(n, 20, 1), std::invalid_argument);
}

TEST_CASE("asymmetric noise") {
  const auto d = balanced(10, 1000);
  const auto n = apply_asym(d, 40, 6);
  CHECK(n.noisy_count() == 4000);
  for (std::size_t i = 0; i < n.size(); ++i)
    if (n.is_noisy(i)) CHECK(n.observed(i) == (n.truth(i) + 1) % 10);
  const auto m = corruption_matrix(n);
  check_row_stochastic(m);
  for (int j = 0; j < 10; ++j)
    for (int i = 0; i < 10; ++i) {
      const double ideal = i == j ? 0.6 : (i == (j + 1) % 10 ? 0.4 : 0.0);
      CHECK(std::abs(m(j, i) - ideal) <= 0.02);
    }
  const auto almost_all = apply_asym(balanced(3, 10), 99.9, 1);
  for (std::size_t i = 0; i < almost_all.size(); ++i)
    if (almost_all.truth(i) == 2 && almost_all.is_noisy(i)) CHECK(almost_all.observed(i) == 0);
}

TEST_CASE("corruption matrix of a clean dataset is the identity") {
  const auto m = corruption_matrix(balanced(5, 10));
  CHECK(m.isIdentity());
  const auto missing = LabeledDataset::clean({1, 2}, FeatureMatrix::Zero(2, 1), {0, 0}, 3);
  CHECK(corruption_matrix(missing).isIdentity());
}

TEST_CASE("open-set noise substitutes features without replacement") {
  const auto d = balanced(4, 50, 2, 8);
  const auto source = synth_clusters({4, 40, 8, 1.0, 4.0, 4, 9}).features();
  const auto n = apply_openset(d, source, 30, 3);
  CHECK(n.noisy_count() == 60);
  CHECK(n.observed() == d.observed());
  std::set<Eigen::Index> used;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto row = n.features().row(static_cast<Eigen::Index>(i));
    if (!n.is_substituted(i)) {
      CHECK(row == d.features().row(static_cast<Eigen::Index>(i)));
      continue;
    }
    CHECK(n.is_noisy(i));
    Eigen::Index match = -1;
    for (Eigen::Index s = 0; s < source.rows(); ++s)
      if (source.row(s) == row) match = s;
    REQUIRE(match >= 0);
    CHECK(used.insert(match).second);
  }
  CHECK(used.size() == 60);

  CHECK_THROWS_AS(apply_openset(d, source.leftCols(7), 30, 3), std::invalid_argument);
  CHECK_THROWS_AS(apply_openset(d, source.topRows(10), 30, 3), std::invalid_argument);
}

TEST_CASE("ensemble disagreement oracle") {
  Eigen::MatrixXd p1(1, 2), p2(1, 2);
  p1 << 0.9, 0.1;
  p2 << 0.5, 0.5;
  const std::vector<Eigen::MatrixXd> two{p1, p2};
  const double expected = (0.9 * std::log(0.9 / 0.7) + 0.1 * std::log(0.1 / 0.3)) +
                          (0.5 * std::log(0.5 / 0.7) + 0.5 * std::log(0.5 / 0.3));
  const double u = ensemble_disagreement(two)(0);
  CHECK(u == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(u - 0.2035) <= 1e-3);

  Eigen::MatrixXd q(3, 4);
  q << 0.1, 0.2, 0.3, 0.4, 0.7, 0.1, 0.1, 0.1, 1.0 / 3, 1.0 / 3, 1.0 / 6, 1.0 / 6;
  const std::vector<Eigen::MatrixXd> same(5, q);
  CHECK(ensemble_disagreement(same).isZero(0.0));

  Eigen::MatrixXd r = q.rowwise().reverse();
  const std::vector<Eigen::MatrixXd> abc{q, r, same.front() * 0.5 + r * 0.5}, cab{abc[2], abc[0], abc[1]};
  const auto x = ensemble_disagreement(abc), y = ensemble_disagreement(cab);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(x(i) == doctest::Approx(y(i)).epsilon(1e-12));
  CHECK((x.array() >= 0.0).all());

  const std::vector<Eigen::MatrixXd> mismatched{p1, q};
  CHECK_THROWS_AS(ensemble_disagreement(mismatched), std::invalid_argument);
}

TEST_CASE("semantic flips use the most confusable wrong class") {
  const auto d = balanced(3, 2);  // 6 rows, truth 0,1,2,0,1,2
  SemanticEnsemble e;
  e.uncertainty = Eigen::VectorXd(6);
  e.uncertainty << 0.5, 0.9, 0.1, 0.9, 0.0, 0.3;
  e.mean_probability = Eigen::MatrixXd(6, 3);
  e.mean_probability << 0.6, 0.3, 0.1,  //
      0.2, 0.5, 0.3,                    //
      0.3, 0.3, 0.4,                    //
      0.5, 0.25, 0.25,                  //
      0.1, 0.8, 0.1,                    //
      0.1, 0.2, 0.7;
  const auto n = apply_semantic_from(d, e, 50);  // 3 rows: ids 1 and 3 (tie -> lower id first), then 0
  CHECK(n.noisy_count() == 3);
  CHECK(n.observed(1) == 2);
  CHECK(n.observed(3) == 1);  // tie between classes 1 and 2 -> lower index
  CHECK(n.observed(0) == 1);
  CHECK_FALSE(n.is_noisy(5));
  for (std::size_t i = 0; i < n.size(); ++i)
    if (n.is_noisy(i)) CHECK(n.observed(i) != n.truth(i));
}

TEST_CASE("semantic noise with two classes flips to the other class") {
  const auto d = balanced(2, 20, 3, 4);
  TrainConfig t;
  t.total_epochs = 3;
  t.warmup_epochs = 1;
  t.hidden = {8};
  const auto n = apply_semantic(d, 25, 3, 4, t);
  CHECK(n.noisy_count() == 10);
  for (std::size_t i = 0; i < n.size(); ++i)
    if (n.is_noisy(i)) CHECK(n.observed(i) == 1 - n.truth(i));
  CHECK_THROWS_AS(apply_semantic(d, 25, 1, 4, t), std::invalid_argument);
}

TEST_CASE("semantic uncertainty of independently seeded members") {
  const auto d = balanced(3, 10, 4, 4);
  TrainConfig t;
  t.total_epochs = 2;
  t.warmup_epochs = 1;
  t.hidden = {6};
  const auto u = semantic_uncertainty(d, 3, t, 11);
  CHECK(u.size() == 30);
  CHECK((u.array() >= 0.0).all());
  CHECK(u.maxCoeff() > 0.0);
}

TEST_CASE("semantic flips concentrate where two classes overlap") {
  // classes 0 and 1 overlap heavily; class 2 is far away
  ClusterSpec spec{3, 200, 6, 1.0, 1.0, 0, 12};
  auto d = synth_clusters(spec);
  FeatureMatrix x = d.features();
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.truth(i) == 2) x(static_cast<Eigen::Index>(i), 2) += 10.0;
  d = LabeledDataset::clean(d.ids(), x, d.truth(), 3);
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(3, 6);
  std::array<int, 3> counts{};
  for (std::size_t i = 0; i < d.size(); ++i) {
    means.row(d.truth(i)) += x.row(static_cast<Eigen::Index>(i));
    ++counts[static_cast<std::size_t>(d.truth(i))];
  }
  for (int k = 0; k < 3; ++k) means.row(k) /= counts[static_cast<std::size_t>(k)];

  TrainConfig t;
  t.total_epochs = 20;
  t.warmup_epochs = 1;
  t.hidden = {32};
  t.learning_rate = 1e-2;
  const auto n = apply_semantic(d, 20, 5, 13, t);
  double flipped = 0.0, kept = 0.0;
  int nf = 0, nk = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const int y = n.truth(i);
    double nearest_other = 1e300;
    for (int k = 0; k < 3; ++k)
      if (k != y) nearest_other = std::min(nearest_other, (x.row(static_cast<Eigen::Index>(i)) - means.row(k)).norm());
    (n.is_noisy(i) ? flipped : kept) += nearest_other;
    ++(n.is_noisy(i) ? nf : nk);
  }
  REQUIRE(nf == 120);
  CHECK(flipped / nf < kept / nk);
}
