#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sdncmv/netstrength.hpp"
#include "sdncmv/rng.hpp"
#include "sdncmv/synthgen.hpp"
#include "support/test_oracles.hpp"

#include <Eigen/Dense>

using namespace sdncmv;

TEST_CASE("sample covariance on hand-computable inputs") {
  SUBCASE("identical columns vanish") {
    Matrix x(3, 4);
    x.colwise() = Vector::LinSpaced(3, 1.0, 3.0);
    CHECK(sample_cov(x).lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("variance of {1,2,3} is 1") {
    Matrix x(1, 3);
    x << 1, 2, 3;
    const Matrix s = sample_cov(x);
    CHECK(s(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("2x3 case") {
    Matrix x(2, 3);
    x << 1, 2, 3, 2, 4, 3;
    const Matrix s = sample_cov(x);
    CHECK(s(0, 0) == doctest::Approx(1.0));
    CHECK(s(1, 1) == doctest::Approx(1.0));
    CHECK(s(0, 1) == doctest::Approx(0.5));
    CHECK(s(1, 0) == doctest::Approx(0.5));
  }
  SUBCASE("gram construction is PSD") {
    Rng rng(11);
    Matrix x(6, 9);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 9; ++j) x(i, j) = rng.normal();
    const Matrix s = sample_cov(x);
    CHECK((s - s.transpose()).lpNorm<Eigen::Infinity>() < 1e-14);
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
  SUBCASE("needs two time points") {
    CHECK_THROWS_AS(sample_cov(Matrix::Zero(3, 1)), std::domain_error);
  }
}

TEST_CASE("clime_column closed forms") {
  const Matrix eye = Matrix::Identity(4, 4);
  SUBCASE("identity at lambda 0 returns the unit column") {
    const Vector beta = clime_column(eye, 0, 0.0);
    CHECK((beta - Vector::Unit(4, 0)).lpNorm<Eigen::Infinity>() < 1e-9);
  }
  SUBCASE("identity at lambda 0.3 shrinks to 0.7") {
    const Vector beta = clime_column(eye, 0, 0.3);
    CHECK(beta(0) == doctest::Approx(0.7).epsilon(1e-7));
    CHECK(beta.tail(3).lpNorm<Eigen::Infinity>() < 1e-9);
  }
  SUBCASE("scaled identity inverts the diagonal") {
    const Vector beta = clime_column(2.0 * eye, 2, 0.0);
    CHECK(beta(2) == doctest::Approx(0.5).epsilon(1e-9));
  }
  SUBCASE("argument validation") {
    CHECK_THROWS_AS(clime_column(eye, -1, 0.1), std::domain_error);
    CHECK_THROWS_AS(clime_column(eye, 0, -0.1), std::domain_error);
  }
}

TEST_CASE("clime_column matches the enumeration oracle on random problems") {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix s = oracle::random_pd_matrix(5, rng, 0.4);
    for (double lam : {0.0, 0.05, 0.2}) {
      const int i = static_cast<int>(rng.uniform_int(5));
      const Vector beta = clime_column(s, i, lam);
      const auto expected = oracle::l1_inf_oracle(s, Vector::Unit(5, i), lam);
      REQUIRE(expected.has_value());
      CHECK(beta.lpNorm<1>() ==
            doctest::Approx(*expected).epsilon(1e-6).scale(std::max(1.0, *expected)));
      CHECK((s * beta - Vector::Unit(5, i)).lpNorm<Eigen::Infinity>() <= lam + 2e-7);
    }
  }
}

TEST_CASE("clime_column signals infeasibility with a lambda estimate") {
  // rank-1 covariance: e_2 is far from the range, so tiny lambda fails
  Matrix s(3, 3);
  const Vector v = Vector::LinSpaced(3, 1.0, 3.0);
  s = v * v.transpose();
  CHECK_THROWS_AS(clime_column(s, 0, 1e-9), ClimeInfeasibleError);
  try {
    clime_column(s, 0, 1e-9);
  } catch (const ClimeInfeasibleError& e) {
    CHECK(e.min_feasible_lambda > 1e-6);
    CHECK(e.column == 0);
    // the estimate itself must be feasible
    CHECK_NOTHROW(clime_column(s, 0, e.min_feasible_lambda * 1.01 + 1e-12));
  }
}

TEST_CASE("symmetrization keeps the smaller-magnitude entry") {
  Matrix m(3, 3);
  m << 1.0, 0.5, -0.7, -0.2, 1.0, 0.3, 0.1, 0.9, 1.0;
  const Matrix s = symmetrize_min_magnitude(m);
  CHECK(s(0, 1) == -0.2);  // |-0.2| < |0.5|
  CHECK(s(1, 0) == -0.2);
  CHECK(s(0, 2) == 0.1);
  CHECK(s(2, 0) == 0.1);
  CHECK(s(1, 2) == 0.3);
  CHECK(s == s.transpose().eval());

  SUBCASE("equal magnitudes keep the upper entry") {
    Matrix t(2, 2);
    t << 1.0, 0.4, -0.4, 1.0;
    const Matrix r = symmetrize_min_magnitude(t);
    CHECK(r(0, 1) == 0.4);
    CHECK(r(1, 0) == 0.4);
  }
  SUBCASE("magnitudes never grow") {
    Rng rng(13);
    Matrix big(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) big(i, j) = rng.normal();
    const Matrix r = symmetrize_min_magnitude(big);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        CHECK(std::abs(r(i, j)) <= std::abs(big(i, j)) + 1e-15);
  }
}

TEST_CASE("clime on the identity returns the identity with zero density") {
  const auto est = clime(Matrix::Identity(5, 5), 0.0);
  CHECK((est.omega - Matrix::Identity(5, 5)).lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK(est.density == 0.0);
  CHECK(est.lambda == 0.0);
}

TEST_CASE("clime recovers a known sparse precision from its exact covariance") {
  Matrix omega = Matrix::Identity(5, 5) * 2.0;
  omega(0, 1) = omega(1, 0) = 0.8;
  omega(2, 3) = omega(3, 2) = -0.6;
  omega(1, 4) = omega(4, 1) = 0.5;
  const Matrix sigma = omega.inverse();

  const double lambda = 1e-4;
  const auto est = clime(sigma, lambda);
  double omega_l1 = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) omega_l1 += std::abs(omega(i, j));
  CHECK((est.omega - omega).lpNorm<Eigen::Infinity>() <= 10.0 * lambda * omega_l1);
}

TEST_CASE("density tuning") {
  SUBCASE("identity covariance is flagged unattainable") {
    const auto tuned = tune_lambda_dens(Matrix::Identity(6, 6));
    CHECK(tuned.estimate.density == 0.0);
    CHECK_FALSE(tuned.attainable);
    // largest visited lambda whose estimate keeps a positive diagonal;
    // at the upper bound itself the whole estimate collapses to zero
    CHECK(tuned.estimate.lambda > 0.0);
    CHECK(tuned.estimate.lambda < 1.0);
    CHECK((tuned.estimate.omega.diagonal().array() > 0.0).all());
  }
  SUBCASE("estimates at the feasibility edge never expose a zero diagonal") {
    // rank-deficient covariance: q - 1 < p, the regime where the target
    // density can be out of reach
    Rng rng(140);
    Matrix x(12, 8);
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 8; ++j) x(i, j) = rng.normal();
    const auto tuned = tune_lambda_dens(sample_cov(x));
    CHECK((tuned.estimate.omega.diagonal().array() > 0.0).all());
  }
  SUBCASE("wishart covariance reaches the target band") {
    Rng rng(14);
    const Matrix s = oracle::random_wishart(10, 40, rng);
    const auto tuned = tune_lambda_dens(s);
    CHECK(tuned.attainable);
    CHECK(std::abs(tuned.estimate.density - 0.5) <= 0.05);
    // re-running clime at the tuned lambda reproduces the estimate
    const auto again = clime(s, tuned.estimate.lambda);
    CHECK(again.density == tuned.estimate.density);
    CHECK((again.omega - tuned.estimate.omega).lpNorm<Eigen::Infinity>() < 1e-12);
  }
  SUBCASE("explicit lambda grid is honored") {
    Rng rng(15);
    const Matrix s = oracle::random_wishart(8, 32, rng);
    ClimeSettings settings;
    settings.lambda_grid = {0.5, 0.2, 0.1, 0.05, 0.02, 0.01};
    const auto tuned = tune_lambda_dens(s, settings);
    CHECK(std::find(settings.lambda_grid.begin(), settings.lambda_grid.end(),
                    tuned.estimate.lambda) != settings.lambda_grid.end());
  }
}

TEST_CASE("density is monotone non-increasing in lambda on most draws") {
  Rng rng(16);
  int ok = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    const int p = 6 + static_cast<int>(rng.uniform_int(6));
    const Matrix s = oracle::random_wishart(p, 3 * p, rng);
    const double lam = 0.02 + 0.2 * rng.uniform();
    const double dense_small = clime(s, lam / 2.0).density;
    const double dense_large = clime(s, lam).density;
    ok += (dense_small >= dense_large);
  }
  CHECK(ok >= 19);  // statistical 95% check
}

TEST_CASE("partial correlations") {
  SUBCASE("diagonal precision gives the identity") {
    Matrix d = Vector::LinSpaced(4, 1.0, 4.0).asDiagonal();
    CHECK((partial_corr(d) - Matrix::Identity(4, 4)).lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("hand value") {
    Matrix o(2, 2);
    o << 4.0, 1.0, 1.0, 1.0;
    const Matrix r = partial_corr(o);
    CHECK(r(0, 1) == doctest::Approx(0.5));
    CHECK(r(0, 0) == 1.0);
  }
  SUBCASE("scale invariance") {
    Matrix o(3, 3);
    o << 2.0, 0.3, 0.0, 0.3, 1.5, -0.4, 0.0, -0.4, 1.0;
    CHECK((partial_corr(o) - partial_corr(5.0 * o)).lpNorm<Eigen::Infinity>() < 1e-14);
  }
  SUBCASE("nonpositive diagonal is rejected") {
    Matrix o = Matrix::Identity(3, 3);
    o(1, 1) = 0.0;
    CHECK_THROWS_AS(partial_corr(o), std::runtime_error);
  }
}

TEST_CASE("fisher transform") {
  const EdgeIndexMap map(3);
  Matrix r = Matrix::Identity(3, 3);
  r(0, 1) = r(1, 0) = 0.0;
  r(0, 2) = r(2, 0) = 0.5;
  r(1, 2) = r(2, 1) = -0.5;
  const auto f = fisher_features(r, map);
  CHECK(f.values(map.flat(1, 2)) == 0.0);
  CHECK(f.values(map.flat(1, 3)) == doctest::Approx(0.5493061443340548));  // log(3)/2
  CHECK(f.values(map.flat(2, 3)) == doctest::Approx(-0.5493061443340548));  // odd

  SUBCASE("clamped at the boundary, still finite") {
    Matrix b = Matrix::Identity(3, 3);
    b(0, 1) = b(1, 0) = 1.0;
    b(0, 2) = b(2, 0) = -1.0;
    const auto g = fisher_features(b, map);
    CHECK(std::isfinite(g.values(map.flat(1, 2))));
    CHECK(g.values(map.flat(1, 2)) > 6.0);
    CHECK(g.values(map.flat(1, 3)) == -g.values(map.flat(1, 2)));
  }
  SUBCASE("strictly increasing") {
    double prev = -std::numeric_limits<double>::infinity();
    for (double v = -0.9; v <= 0.9; v += 0.1) {
      Matrix m = Matrix::Identity(3, 3);
      m(0, 1) = m(1, 0) = v;
      const double w = fisher_features(m, map).values(map.flat(1, 2));
      CHECK(w > prev);
      prev = w;
    }
  }
}

TEST_CASE("subject_features pipeline") {
  Rng rng(17);
  const int p = 8, q = 40;
  Matrix data(p, q);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < q; ++j) data(i, j) = rng.normal();
  const SubjectMatrix subject{"s", 1, data};

  SUBCASE("deterministic") {
    const auto a = subject_features(subject);
    const auto b = subject_features(subject);
    CHECK(a.features.values == b.features.values);
    CHECK(a.estimate.lambda == b.estimate.lambda);
  }
  SUBCASE("invariant to permuting time columns") {
    const auto a = subject_features(subject);
    Matrix permuted(p, q);
    for (int j = 0; j < q; ++j) permuted.col(j) = data.col((j * 7 + 3) % q);
    const auto b = subject_features({"s", 1, permuted});
    CHECK((a.features.values - b.features.values).lpNorm<Eigen::Infinity>() < 1e-9);
  }
}

TEST_CASE("null subjects produce small features at large q") {
  // independent regions: partial correlations hover near zero
  const int p = 10, q = 500;
  int passed = 0;
  for (int s = 0; s < 10; ++s) {
    Rng rng = Rng::stream(99, rng_domain::subject, static_cast<std::uint64_t>(s));
    Matrix data(p, q);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < q; ++j) data(i, j) = rng.normal();
    const auto f = subject_features({"null", 0, data});
    passed += (f.features.values.lpNorm<Eigen::Infinity>() <= 0.2);
  }
  CHECK(passed >= 9);
}
