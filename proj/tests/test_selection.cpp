#include <doctest.h>

#include <random>

#include "lec/selection.hpp"
#include "oracles.hpp"

using namespace lec;

TEST_CASE("keep_count rounds half up") {
  CHECK(keep_count(10, 0) == 10);
  CHECK(keep_count(10, 50) == 5);
  CHECK(keep_count(5, 50) == 3);  // 2.5 -> 3
  CHECK(keep_count(7, 60) == 3);  // 2.8
  CHECK(keep_count(3, 80) == 1);  // 0.6
  CHECK(keep_count(0, 40) == 0);
  CHECK_THROWS_AS(keep_count(10, 100), std::invalid_argument);
  CHECK_THROWS_AS(keep_count(10, -1), std::invalid_argument);
}

TEST_CASE("small_loss_select examples") {
  const std::vector<double> losses{0.1, 0.9, 0.2, 0.5};
  const std::vector<ExampleId> ids{10, 11, 12, 13};
  CHECK(small_loss_select(losses, ids, 50).ids == std::vector<ExampleId>{10, 12});
  CHECK(small_loss_select(losses, ids, 0).ids == std::vector<ExampleId>{10, 11, 12, 13});

  const std::vector<double> flat(6, 1.0);
  const std::vector<ExampleId> shuffled{7, 3, 9, 1, 5, 2};
  CHECK(small_loss_select(flat, shuffled, 50).ids == std::vector<ExampleId>{1, 2, 3});

  const auto s = small_loss_select(losses, ids, 50, Scope::FullBatch, 4);
  CHECK(s.scope == Scope::FullBatch);
  CHECK(s.epoch == 4);
}

TEST_CASE("small_loss_select rejects bad input") {
  const std::vector<double> losses{0.1, 0.2};
  const std::vector<ExampleId> one{1};
  CHECK_THROWS_AS(small_loss_select(losses, one, 0), std::invalid_argument);
  const std::vector<double> nan{0.1, std::nan("")};
  const std::vector<ExampleId> two{1, 2};
  CHECK_THROWS_AS(small_loss_select(nan, two, 0), std::invalid_argument);
}

TEST_CASE("small_loss_select matches full sort on random instances") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 60)(rng);
    const double eps = std::uniform_int_distribution<int>(0, 99)(rng);
    std::vector<double> losses(n);
    std::vector<ExampleId> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
      losses[i] = std::uniform_int_distribution<int>(0, 8)(rng) * 0.25;  // frequent ties
      ids[i] = static_cast<ExampleId>(i * 3 + 1);
    }
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto got = small_loss_select(losses, ids, eps);
    REQUIRE(got.ids == oracle::small_loss(losses, ids, eps));
    CHECK(got.size() == keep_count(n, eps));
  }
}

TEST_CASE("consensus") {
  const SelectionSet a{{1, 2, 3}, Scope::MiniBatch, 1};
  const SelectionSet b{{2, 3, 4}, Scope::MiniBatch, 1};
  const std::vector<SelectionSet> ab{a, b};
  CHECK(consensus(ab, EnsembleSize(2)).ids == std::vector<ExampleId>{2, 3});

  const std::vector<SelectionSet> only{a};
  CHECK(consensus(only, EnsembleSize(1)) == a);

  const std::vector<SelectionSet> same{a, a, a};
  CHECK(consensus(same, EnsembleSize(3)).ids == a.ids);

  CHECK_THROWS_AS(consensus(ab, EnsembleSize(1)), std::invalid_argument);
  const std::vector<SelectionSet> mixed{a, SelectionSet{{2}, Scope::FullBatch, 1}};
  CHECK_THROWS_AS(consensus(mixed, EnsembleSize(2)), std::invalid_argument);
  CHECK_THROWS_AS(EnsembleSize(0), std::invalid_argument);
}

TEST_CASE("consensus matches nested-loop intersection") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    std::vector<SelectionSet> sets;
    std::vector<std::vector<ExampleId>> raw;
    for (std::size_t k = 0; k < m; ++k) {
      raw.push_back(oracle::random_subset(rng, 40, 0.7));
      sets.push_back({raw.back(), Scope::MiniBatch, 0});
    }
    const auto got = consensus(sets, EnsembleSize(m));
    REQUIRE(got.ids == oracle::intersect_all(raw));
    for (const auto& s : sets) CHECK(got.size() <= s.size());
  }
}

TEST_CASE("set_union and intersect") {
  const SelectionSet a{{1, 4, 6}, Scope::MiniBatch, 2};
  const SelectionSet b{{2, 4, 7}, Scope::MiniBatch, 2};
  CHECK(set_union(a, b).ids == std::vector<ExampleId>{1, 2, 4, 6, 7});
  CHECK(intersect(a, b).ids == std::vector<ExampleId>{4});
  CHECK(a.contains(6));
  CHECK_FALSE(a.contains(5));
}

TEST_CASE("temporal pool evicts oldest") {
  TemporalPool pool(EnsembleSize(3));
  for (int e = 1; e <= 4; ++e) pool.push({{e}, Scope::MiniBatch, e});
  REQUIRE(pool.size() == 2);
  CHECK(pool.entries().front().epoch == 3);
  CHECK(pool.entries().back().epoch == 4);
  CHECK_THROWS_AS(pool.push({{}, Scope::MiniBatch, 4}), std::invalid_argument);

  TemporalPool single(EnsembleSize(1));
  single.push({{1}, Scope::MiniBatch, 1});
  CHECK(single.empty());

  TemporalPool all(EnsembleSize::unbounded());
  for (int e = 1; e <= 50; ++e) all.push({{}, Scope::MiniBatch, e});
  CHECK(all.size() == 50);
}

TEST_CASE("temporal_consensus examples") {
  TemporalPool pool(EnsembleSize(3));
  pool.push({{1, 2}, Scope::MiniBatch, 1});
  pool.push({{2, 3}, Scope::MiniBatch, 2});
  const SelectionSet current{{2, 4}, Scope::MiniBatch, 3};
  CHECK(temporal_consensus(pool, current, EnsembleSize(3), 3).ids == std::vector<ExampleId>{2});

  const SelectionSet wide{{1, 2, 3, 4}, Scope::MiniBatch, 3};
  CHECK(temporal_consensus(pool, wide, EnsembleSize(2), 3).ids == std::vector<ExampleId>{2, 3});
  CHECK(temporal_consensus(TemporalPool(EnsembleSize(3)), current, EnsembleSize(3), 3) == current);

  SelectionSet stale = current;
  CHECK_THROWS_AS(temporal_consensus(pool, stale, EnsembleSize(3), 2), std::invalid_argument);
}

TEST_CASE("temporal_consensus with unbounded M uses every entry") {
  TemporalPool pool(EnsembleSize::unbounded());
  pool.push({{1, 2, 3, 4, 5}, Scope::MiniBatch, 1});
  pool.push({{2, 3, 4, 5}, Scope::MiniBatch, 2});
  pool.push({{3, 4, 5}, Scope::MiniBatch, 3});
  pool.push({{1, 2, 3, 4, 5}, Scope::MiniBatch, 4});
  const SelectionSet current{{1, 2, 3, 4}, Scope::MiniBatch, 5};
  CHECK(temporal_consensus(pool, current, EnsembleSize::unbounded(), 5).ids == std::vector<ExampleId>{3, 4});
}

TEST_CASE("temporal_consensus matches brute force") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = std::uniform_int_distribution<std::size_t>(0, 6)(rng);  // 0 = unbounded
    const EnsembleSize size = m == 0 ? EnsembleSize::unbounded() : EnsembleSize(m);
    const int t = std::uniform_int_distribution<int>(1, 12)(rng);
    TemporalPool pool(size);
    std::vector<std::vector<ExampleId>> history;
    for (int e = 1; e < t; ++e) {
      history.push_back(oracle::random_subset(rng, 30, 0.85));
      pool.push({history.back(), Scope::MiniBatch, e});
    }
    const auto current = oracle::random_subset(rng, 30, 0.85);
    const auto got = temporal_consensus(pool, {current, Scope::MiniBatch, t}, size, t);
    REQUIRE(got.ids == oracle::temporal(history, current, m, t));
  }
}
