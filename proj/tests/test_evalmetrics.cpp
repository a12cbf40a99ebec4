#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sdncmv/evalmetrics.hpp"
#include "sdncmv/rng.hpp"

#include <algorithm>
#include <numeric>

using namespace sdncmv;

TEST_CASE("misclassification rate") {
  CHECK(misclassification_rate({1, 0, 1}, {1, 0, 1}) == 0.0);
  CHECK(misclassification_rate({0, 1, 0}, {1, 0, 1}) == 1.0);
  CHECK(misclassification_rate({1, 1, 0, 0}, {1, 0, 0, 0}) == doctest::Approx(0.25));
  CHECK_THROWS_AS(misclassification_rate({1}, {1, 0}), std::domain_error);
  CHECK_THROWS_AS(misclassification_rate({}, {}), std::domain_error);
}

TEST_CASE("support metrics on exact and degenerate cases") {
  SUBCASE("perfect recovery") {
    const SupportMetrics m = support_metrics({{1, 4, 7}, {1, 4, 7}, 10});
    CHECK(m.tpr == 1.0);
    CHECK(m.tnr == 1.0);
    CHECK(m.tdr == 1.0);
  }
  SUBCASE("empty estimate with nonempty truth") {
    const SupportMetrics m = support_metrics({{1, 4}, {}, 10});
    CHECK(m.tpr == 0.0);
    CHECK(m.tnr == 1.0);
    CHECK(m.tdr == 0.0);
  }
  SUBCASE("both empty") {
    const SupportMetrics m = support_metrics({{}, {}, 10});
    CHECK(m.tdr == 1.0);
    CHECK(m.tpr == 1.0);
  }
  SUBCASE("partial overlap by hand") {
    // truth {0,1,2}, estimate {1,2,3,4}: tp=2, fp=2, universe 10
    const SupportMetrics m = support_metrics({{0, 1, 2}, {1, 2, 3, 4}, 10});
    CHECK(m.tpr == doctest::Approx(2.0 / 3.0));
    CHECK(m.tdr == doctest::Approx(0.5));
    CHECK(m.tnr == doctest::Approx(5.0 / 7.0));
  }
  SUBCASE("indices outside the universe are rejected") {
    CHECK_THROWS_AS(support_metrics({{12}, {}, 10}), std::domain_error);
    CHECK_THROWS_AS(support_metrics({{}, {10}, 10}), std::domain_error);
  }
}

TEST_CASE("support metrics are invariant under relabeling the universe") {
  Rng rng(44);
  const std::size_t universe = 30;
  std::vector<std::size_t> permutation(universe);
  std::iota(permutation.begin(), permutation.end(), 0);
  for (std::size_t i = universe; i > 1; --i)
    std::swap(permutation[i - 1], permutation[static_cast<std::size_t>(rng.uniform_int(i))]);

  const std::vector<std::size_t> truth = {2, 5, 9, 16};
  const std::vector<std::size_t> estimate = {5, 9, 11};
  auto relabel = [&](const std::vector<std::size_t>& v) {
    std::vector<std::size_t> out;
    for (auto k : v) out.push_back(permutation[k]);
    std::sort(out.begin(), out.end());
    return out;
  };
  const SupportMetrics a = support_metrics({truth, estimate, universe});
  const SupportMetrics b = support_metrics({relabel(truth), relabel(estimate), universe});
  CHECK(a.tpr == b.tpr);
  CHECK(a.tnr == b.tnr);
  CHECK(a.tdr == b.tdr);
}

TEST_CASE("pr_curve sweeps tau with empty supports skipped") {
  const std::vector<int> counts = {5, 3, 0, 2, 5};
  const std::vector<std::size_t> truth = {0, 4};
  const auto curve = pr_curve(counts, truth, 5);

  REQUIRE(!curve.empty());
  // tau=5 yields an empty support and must be absent
  for (const auto& pt : curve) CHECK(pt.tau < 5);
  // recall is monotone non-decreasing as tau falls
  for (std::size_t k = 1; k < curve.size(); ++k)
    CHECK(curve[k].recall >= curve[k - 1].recall);
  // tau=0 point exists and has maximal recall (all truth edges have count > 0)
  CHECK(curve.back().tau == 0);
  CHECK(curve.back().recall == 1.0);
  // at tau=4 the estimate is exactly the truth
  CHECK(curve.front().tau == 4);
  CHECK(curve.front().precision == 1.0);
  CHECK(curve.front().recall == 1.0);
}

TEST_CASE("pr_curve precision is one when truth covers every selection") {
  const std::vector<int> counts = {4, 2, 0, 1};
  const std::vector<std::size_t> truth = {0, 1, 3};
  for (const auto& pt : pr_curve(counts, truth, 4)) CHECK(pt.precision == 1.0);
}

TEST_CASE("pr_auc integrates a step curve from recall zero") {
  CHECK(pr_auc({}) == 0.0);
  CHECK(pr_auc({{0, 0.5, 0.8}}) == doctest::Approx(0.4));
  CHECK(pr_auc({{1, 0.5, 1.0}, {0, 1.0, 0.6}}) == doctest::Approx(0.5 + 0.5 * 0.6));
}
