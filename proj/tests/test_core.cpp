#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sdncmv/core.hpp"
#include "sdncmv/rng.hpp"

#include <algorithm>
#include <set>

using namespace sdncmv;

TEST_CASE("edge_index matches the p=4 column-stacked enumeration") {
  // (b12, b13, b23, b14, b24, b34)
  CHECK(edge_index(1, 2, 4) == 0);
  CHECK(edge_index(1, 3, 4) == 1);
  CHECK(edge_index(2, 3, 4) == 2);
  CHECK(edge_index(1, 4, 4) == 3);
  CHECK(edge_index(2, 4, 4) == 4);
  CHECK(edge_index(3, 4, 4) == 5);
}

TEST_CASE("edge_index rejects out-of-range pairs") {
  CHECK_THROWS_AS(edge_index(0, 2, 4), std::domain_error);
  CHECK_THROWS_AS(edge_index(2, 2, 4), std::domain_error);
  CHECK_THROWS_AS(edge_index(3, 2, 4), std::domain_error);
  CHECK_THROWS_AS(edge_index(1, 5, 4), std::domain_error);
  CHECK_THROWS_AS(edge_from_index(6, 4), std::domain_error);
}

TEST_CASE("edge_index round-trips and enumerates a permutation") {
  for (int p : {2, 3, 5, 12, 40}) {
    std::set<std::size_t> seen;
    for (int j = 2; j <= p; ++j) {
      for (int i = 1; i < j; ++i) {
        const std::size_t k = edge_index(i, j, p);
        CHECK(k < edge_count(p));
        seen.insert(k);
        const auto [ri, rj] = edge_from_index(k, p);
        CHECK(ri == i);
        CHECK(rj == j);
      }
    }
    CHECK(seen.size() == edge_count(p));  // bijection onto 0..p(p-1)/2-1
  }
}

TEST_CASE("EdgeIndexMap::pairs yields the canonical order") {
  const EdgeIndexMap map(4);
  const auto pairs = map.pairs();
  REQUIRE(pairs.size() == 6);
  CHECK(pairs[0] == std::pair<int, int>{1, 2});
  CHECK(pairs[2] == std::pair<int, int>{2, 3});
  CHECK(pairs[3] == std::pair<int, int>{1, 4});
  for (std::size_t k = 0; k < pairs.size(); ++k)
    CHECK(map.flat(pairs[k].first, pairs[k].second) == k);
}

TEST_CASE("SubjectMatrix validation enforces shape and finiteness") {
  SubjectMatrix s{"a", 1, Matrix::Zero(3, 4)};
  CHECK_NOTHROW(s.validate());

  SubjectMatrix tiny{"b", 0, Matrix::Zero(1, 4)};
  CHECK_THROWS_AS(tiny.validate(), std::domain_error);

  SubjectMatrix short_series{"c", 0, Matrix::Zero(3, 2)};
  CHECK_THROWS_AS(short_series.validate(), std::domain_error);

  SubjectMatrix inf{"d", 1, Matrix::Zero(3, 4)};
  inf.data(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(inf.validate(), std::domain_error);

  SubjectMatrix bad_label{"e", 2, Matrix::Zero(3, 4)};
  CHECK_THROWS_AS(bad_label.validate(), std::domain_error);
}

TEST_CASE("CohortDataset validation") {
  CohortDataset d;
  d.subjects.push_back({"a", 1, Matrix::Zero(3, 4)});
  d.subjects.push_back({"b", 0, Matrix::Zero(3, 4)});
  CHECK_NOTHROW(d.validate_for_training());
  CHECK(d.n1() == 1);
  CHECK(d.n2() == 1);

  CohortDataset one_class = d;
  one_class.subjects[1].label = 1;
  CHECK_NOTHROW(one_class.validate());
  CHECK_THROWS_AS(one_class.validate_for_training(), std::domain_error);

  CohortDataset ragged = d;
  ragged.subjects.push_back({"c", 1, Matrix::Zero(4, 4)});
  CHECK_THROWS_AS(ragged.validate(), std::domain_error);

  CohortDataset bad_conf = d;
  bad_conf.confounders = {Vector::Zero(2), Vector::Zero(3)};
  CHECK_THROWS_AS(bad_conf.validate(), std::domain_error);
}

TEST_CASE("rng streams are independent of each other and reproducible") {
  Rng a = Rng::stream(7, rng_domain::subject, 0);
  Rng a2 = Rng::stream(7, rng_domain::subject, 0);
  Rng b = Rng::stream(7, rng_domain::subject, 1);
  CHECK(a.next_u64() == a2.next_u64());
  CHECK(a.next_u64() == a2.next_u64());

  bool differs = false;
  for (int k = 0; k < 4; ++k) differs |= (a.next_u64() != b.next_u64());
  CHECK(differs);
}

TEST_CASE("rng normal moments are sane") {
  Rng rng(123);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int k = 0; k < n; ++k) {
    const double v = rng.normal();
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("rng uniform_int covers its range without bias") {
  Rng rng(9);
  std::vector<int> counts(5, 0);
  for (int k = 0; k < 50000; ++k) ++counts[static_cast<std::size_t>(rng.uniform_int(5))];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}
