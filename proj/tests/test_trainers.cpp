#include <doctest.h>

#include <cmath>

#include "lec/noise.hpp"
#include "lec/trainers.hpp"

using namespace lec;

namespace {

struct Fixture {
  LabeledDataset train, test;
  Fixture(double eps = 40) {
    auto s = split(synth_clusters({4, 30, 8, 1.0, 3.0, 0, 17}), {0.5, 0.5, 18});
    train = apply_sym(s.train, eps, 19);
    test = s.test;
  }
};

TrainConfig tiny(Method m, double eps = 40) {
  TrainConfig c;
  c.method = m;
  c.total_epochs = 6;
  c.warmup_epochs = 2;
  c.batch_size = 16;
  c.hidden = {16};
  c.assumed_noise = eps;
  c.learning_rate = 5e-3;
  c.ensemble = EnsembleSize(3);
  return c;
}

// Multi-network logs average identical values, so compare with a rounding tolerance.
void check_same(const RunLog& a, const RunLog& b, double tol = 0.0) {
  REQUIRE(a.epochs.size() == b.epochs.size());
  for (std::size_t e = 0; e < a.epochs.size(); ++e) {
    CAPTURE(e);
    CHECK(std::abs(a.epochs[e].test_accuracy - b.epochs[e].test_accuracy) <= tol);
    REQUIRE(a.epochs[e].label_precision.has_value() == b.epochs[e].label_precision.has_value());
    if (a.epochs[e].label_precision)
      CHECK(std::abs(*a.epochs[e].label_precision - *b.epochs[e].label_precision) <= tol);
    CHECK(std::abs(a.epochs[e].recall - b.epochs[e].recall) <= tol);
    CHECK(a.epochs[e].used_count == b.epochs[e].used_count);
    CHECK(a.epochs[e].skipped_updates == b.epochs[e].skipped_updates);
  }
}

}  // namespace

TEST_CASE("method names round trip") {
  for (auto m : {Method::Standard, Method::SelfTraining, Method::LNEC, Method::LSEC, Method::LTEC, Method::LTECFull,
                 Method::CoTeaching})
    CHECK(parse_method(method_name(m)) == m);
  CHECK(parse_method("self") == Method::SelfTraining);
  CHECK(parse_method("ltec-full") == Method::LTECFull);
  CHECK(parse_method("Co_Teaching") == Method::CoTeaching);
  CHECK_FALSE(parse_method("mentornet").has_value());
}

TEST_CASE("config validation") {
  TrainConfig c = tiny(Method::LTEC);
  CHECK_NOTHROW(c.validate());
  c.warmup_epochs = 6;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = tiny(Method::LTEC, 100);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = tiny(Method::LTEC);
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = tiny(Method::LTEC);
  c.dropout = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("co-teaching keep schedule") {
  CHECK(coteaching_keep_percent(60, 5) == doctest::Approx(70));
  CHECK(coteaching_keep_percent(60, 1) == doctest::Approx(94));
  CHECK(coteaching_keep_percent(60, 10) == doctest::Approx(40));
  CHECK(coteaching_keep_percent(60, 40) == doctest::Approx(40));
  CHECK(coteaching_keep_percent(0, 7) == 100.0);
}

TEST_CASE("every method is deterministic and reports sane metrics") {
  const Fixture f;
  for (auto m : {Method::Standard, Method::SelfTraining, Method::LNEC, Method::LSEC, Method::LTEC, Method::LTECFull,
                 Method::CoTeaching}) {
    CAPTURE(method_name(m));
    const auto cfg = tiny(m);
    std::vector<SelectionSet> used;
    TrainHooks hooks;
    hooks.on_epoch_used = [&](const SelectionSet& s) { used.push_back(s); };
    const auto a = train(f.train, f.test, cfg, hooks);
    const auto b = train(f.train, f.test, cfg);
    check_same(a, b);
    REQUIRE(a.epochs.size() == 6);
    CHECK(used.size() == (m == Method::CoTeaching ? 12u : 6u));
    for (std::size_t e = 0; e < a.epochs.size(); ++e) {
      const auto& ep = a.epochs[e];
      CHECK(ep.epoch == static_cast<int>(e) + 1);
      CHECK(ep.test_accuracy >= 0.0);
      CHECK(ep.test_accuracy <= 1.0);
      CHECK(ep.recall >= 0.0);
      CHECK(ep.recall <= 1.0);
      CHECK(ep.used_count <= f.train.size());
      if (ep.label_precision) {
        CHECK(*ep.label_precision >= 0.0);
        CHECK(*ep.label_precision <= 1.0);
      }
    }
    for (const auto& s : used)
      for (ExampleId id : s.ids) CHECK(f.train.row_of(id).has_value());
    CHECK(a.peak_accuracy() >= a.final_accuracy());
  }
}

TEST_CASE("standard training uses everything") {
  const Fixture f;
  const auto log = train_standard(f.train, f.test, tiny(Method::Standard));
  for (const auto& e : log.epochs) {
    CHECK(*e.label_precision == 0.6);
    CHECK(e.recall == 1.0);
    CHECK(e.used_count == f.train.size());
    CHECK_FALSE(e.small_loss_precision.has_value());
  }
}

TEST_CASE("clean data is learned") {
  auto s = split(synth_clusters({4, 100, 8, 1.0, 8.0, 0, 3}), {0.5, 0.5, 4});
  TrainConfig c = tiny(Method::Standard, 0);
  c.total_epochs = 30;
  CHECK(train_standard(s.train, s.test, c).final_accuracy() > 0.99);
}

TEST_CASE("consensus methods with one member reduce to self-training") {
  const Fixture f;
  TrainConfig c = tiny(Method::SelfTraining);
  c.ensemble = EnsembleSize(1);
  const auto self = train_self(f.train, f.test, c);
  SUBCASE("LNEC") { check_same(self, train_lnec(f.train, f.test, c)); }
  SUBCASE("LTEC") { check_same(self, train_ltec(f.train, f.test, c)); }
}

TEST_CASE("LSEC without dropout equals self-training") {
  const Fixture f;
  TrainConfig c = tiny(Method::LSEC);
  c.dropout = 0.0;
  const auto lsec = train_lsec(f.train, f.test, c);
  check_same(lsec, train_self(f.train, f.test, c));
  CHECK(lsec.warnings.size() == 1);
}

TEST_CASE("LNEC with shared seeds equals self-training") {
  const Fixture f;
  TrainConfig c = tiny(Method::LNEC);
  c.independent_members = false;
  check_same(train_lnec(f.train, f.test, c), train_self(f.train, f.test, c), 1e-12);
}

TEST_CASE("zero assumed noise keeps every example") {
  const Fixture f;
  for (auto m : {Method::SelfTraining, Method::LNEC, Method::LSEC, Method::LTEC, Method::LTECFull,
                 Method::CoTeaching}) {
    CAPTURE(method_name(m));
    const auto log = train(f.train, f.test, tiny(m, 0));
    for (const auto& e : log.epochs) {
      CHECK(e.used_count == f.train.size());
      CHECK(*e.label_precision == 0.6);
      CHECK(e.skipped_updates == 0);
    }
  }
}

TEST_CASE("filtering starts after warm-up") {
  const Fixture f;
  TrainConfig c = tiny(Method::LTEC);
  c.warmup_epochs = 5;
  const auto log = train_ltec(f.train, f.test, c);
  for (int e = 0; e < 5; ++e) {
    CHECK(log.epochs[static_cast<std::size_t>(e)].used_count == f.train.size());
    CHECK_FALSE(log.epochs[static_cast<std::size_t>(e)].small_loss_precision.has_value());
  }
  CHECK(log.epochs.back().small_loss_precision.has_value());
  CHECK(log.epochs.back().used_count < f.train.size());
}

TEST_CASE("filtered updates stay within the small-loss budget") {
  const Fixture f;
  const std::size_t n = f.train.size();
  std::size_t budget = 0;
  for (std::size_t s = 0; s < n; s += 16) budget += keep_count(std::min<std::size_t>(16, n - s), 40);
  for (auto m : {Method::SelfTraining, Method::LNEC, Method::LSEC, Method::LTEC}) {
    CAPTURE(method_name(m));
    const auto log = train(f.train, f.test, tiny(m));
    for (std::size_t e = 2; e < log.epochs.size(); ++e) CHECK(log.epochs[e].used_count <= budget);
  }
  const auto full = train_ltec_full(f.train, f.test, tiny(Method::LTECFull));
  for (std::size_t e = 2; e < full.epochs.size(); ++e) CHECK(full.epochs[e].used_count <= keep_count(n, 40));
}

TEST_CASE("LTEC-full consensus over the full set") {
  const Fixture f;
  TrainConfig c = tiny(Method::LTECFull);
  c.ensemble = EnsembleSize(1);
  std::vector<SelectionSet> sets;
  TrainHooks hooks;
  hooks.on_epoch_used = [&](const SelectionSet& s) { sets.push_back(s); };
  const auto log = train_ltec_full(f.train, f.test, c, hooks);
  for (std::size_t e = 2; e < log.epochs.size(); ++e) {
    // M = 1: every full-set small-loss example is trained on
    CHECK(log.epochs[e].used_count == keep_count(f.train.size(), 40));
    CHECK(log.epochs[e].label_precision == log.epochs[e].small_loss_precision);
  }
}

TEST_CASE("unbounded ensembles need a temporal method") {
  const Fixture f;
  TrainConfig c = tiny(Method::LNEC);
  c.ensemble = EnsembleSize::unbounded();
  CHECK_THROWS_AS(train_lnec(f.train, f.test, c), std::invalid_argument);
  CHECK_THROWS_AS(train_lsec(f.train, f.test, c), std::invalid_argument);
  CHECK_NOTHROW(train_ltec(f.train, f.test, c));
  CHECK_NOTHROW(train_ltec_full(f.train, f.test, c));
}
