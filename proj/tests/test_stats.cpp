#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/normal.hpp>

#include "flatproc/errors.hpp"
#include "flatproc/moments.hpp"
#include "flatproc/simulator.hpp"
#include "flatproc/stats.hpp"

using namespace flatproc;

namespace {

SampleAccumulator accumulate(const std::vector<double>& xs, int max_order = 8, double shift = 0.0) {
  SampleAccumulator acc(1, max_order, {shift});
  for (double x : xs) acc.add(std::span<const double>(&x, 1));
  return acc;
}

std::vector<double> normal_quantiles(int n) {
  boost::math::normal_distribution<double> nd;
  std::vector<double> q(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) q[static_cast<std::size_t>(i)] = boost::math::quantile(nd, (i + 0.5) / n);
  return q;
}

}  // namespace

TEST_CASE("sample central moments: worked examples") {
  const auto pm = sample_central_moments(accumulate({-1.0, 1.0, -1.0, 1.0}), 0, 4);
  CHECK(pm.mean == 0.0);
  CHECK(pm.values[2] == 1.0);
  CHECK(pm.values[3] == 0.0);
  CHECK(pm.values[4] == 1.0);

  const auto c = sample_central_moments(accumulate({2.5, 2.5, 2.5}, 8, 2.5), 0, 4);
  for (int m = 1; m <= 4; ++m) CHECK(c.values[m] == 0.0);
  for (int m = 2; m <= 4; ++m) CHECK(c.standard_errors[static_cast<std::size_t>(m)] == 0.0);
  CHECK(c.mean == 2.5);

  std::mt19937_64 rng(123);
  std::normal_distribution<double> normal;
  SampleAccumulator acc(1, 8);
  for (int i = 0; i < 1000000; ++i) {
    const double x = normal(rng);
    acc.add(std::span<const double>(&x, 1));
  }
  const auto g = sample_central_moments(acc, 0, 4);
  CHECK(std::abs(g.values[4] - 3.0) <= 4.0 * g.standard_errors[4]);
  CHECK(std::abs(g.values[2] - 1.0) <= 4.0 * g.standard_errors[2]);
  // Gaussian delta-method SEs: Var(m2) = 2/n, Var(m4) = 96/n
  CHECK(g.standard_errors[2] == doctest::Approx(std::sqrt(2.0 / 1e6)).epsilon(0.02));
  CHECK(g.standard_errors[4] == doctest::Approx(std::sqrt(96.0 / 1e6)).epsilon(0.05));
  const auto k = sample_cumulants(acc, 0, 4);
  for (int m = 3; m <= 4; ++m) CHECK(std::abs(k.values[m]) <= 4.0 * k.standard_errors[static_cast<std::size_t>(m)]);
}

TEST_CASE("moment estimators do not depend on the accumulator shift beyond rounding") {
  std::mt19937_64 rng(8);
  std::gamma_distribution<double> gamma(3.0, 2.0);
  std::vector<double> xs(5000);
  for (double& x : xs) x = gamma(rng);
  const auto a = sample_central_moments(accumulate(xs, 8, 0.0), 0, 4);
  const auto b = sample_central_moments(accumulate(xs, 8, 6.0), 0, 4);
  CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-12));
  for (int m = 2; m <= 4; ++m) {
    CHECK(a.values[m] == doctest::Approx(b.values[m]).epsilon(1e-9));
    CHECK(a.standard_errors[static_cast<std::size_t>(m)] ==
          doctest::Approx(b.standard_errors[static_cast<std::size_t>(m)]).epsilon(1e-7));
  }
}

TEST_CASE("cumulant and central-moment SEs coincide where the estimators coincide") {
  // gamma_2 = mu_2 and gamma_3 = mu_3, so both delta methods must agree.
  std::mt19937_64 rng(31);
  std::exponential_distribution<double> expo(0.7);
  std::vector<double> xs(20000);
  for (double& x : xs) x = expo(rng);
  const auto acc = accumulate(xs, 8, 1.0 / 0.7);
  const auto mom = sample_central_moments(acc, 0, 4);
  const auto cum = sample_cumulants(acc, 0, 4);
  for (int m = 2; m <= 3; ++m) {
    CAPTURE(m);
    CHECK(cum.values[m] == doctest::Approx(mom.values[m]).epsilon(1e-12));
    CHECK(cum.standard_errors[static_cast<std::size_t>(m)] ==
          doctest::Approx(mom.standard_errors[static_cast<std::size_t>(m)]).epsilon(1e-9));
  }
  CHECK(cum.values[4] == doctest::Approx(mom.values[4] - 3.0 * mom.values[2] * mom.values[2]).epsilon(1e-12));
}

TEST_CASE("moment estimator preconditions") {
  CHECK_THROWS_AS(sample_central_moments(accumulate({1.0}), 0, 2), InsufficientData);
  CHECK_THROWS_AS(sample_central_moments(accumulate({1.0, 2.0}, 6), 0, 4), InsufficientData);
  CHECK_THROWS_AS(sample_cumulants(accumulate({1.0}), 0, 2), InsufficientData);
}

TEST_CASE("validation rows") {
  const auto r = make_validation_row("x", 1.0, 1.5, 0.25);
  CHECK(r.z == 2.0);
  CHECK(make_validation_row("x", 1.0, 1.0, 0.0).z == 0.0);
  CHECK(make_validation_row("x", 1.0, 0.5, 0.0).z == -std::numeric_limits<double>::infinity());
}

TEST_CASE("normal cdf") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-14));
  CHECK(normal_cdf(-40.0) >= 0.0);
}

TEST_CASE("Kolmogorov distance: worked examples") {
  CHECK(kolmogorov_distance_to_normal(std::vector<double>(10, 0.0), false) == 0.5);
  for (int n : {100, 1000, 10000}) {
    CAPTURE(n);
    const auto q = normal_quantiles(n);
    const double d = kolmogorov_distance_to_normal(q, false);
    CHECK(d <= 1.0 / n);
    CHECK(d == doctest::Approx(0.5 / n).epsilon(1e-6));
  }
  CHECK_THROWS_AS(kolmogorov_distance_to_normal(std::vector<double>{1.0}, false), InsufficientData);
  CHECK_THROWS_AS(kolmogorov_distance_to_normal(std::vector<double>(5, 1.0), true), DegenerateVariance);
  // brute-force sup over a fine grid never exceeds the order-statistic value
  std::mt19937_64 rng(4);
  std::student_t_distribution<double> t(3.0);
  std::vector<double> xs(200);
  for (double& x : xs) x = t(rng);
  const double d = kolmogorov_distance_to_normal(xs, false);
  double grid_sup = 0.0;
  for (double s = -8.0; s <= 8.0; s += 1e-4) {
    double below = 0.0;
    for (double x : xs) below += x <= s;
    grid_sup = std::max(grid_sup, std::abs(below / xs.size() - normal_cdf(s)));
  }
  CHECK(grid_sup <= d + 1e-12);
  CHECK(grid_sup >= d - 1e-3);
}

TEST_CASE("standardized Poisson counts follow the Poisson CLT rate") {
  for (double mean : {10.0, 100.0}) {
    CAPTURE(mean);
    std::mt19937_64 rng(static_cast<std::uint64_t>(mean));
    std::poisson_distribution<int> poisson(mean);
    std::vector<double> xs(100000);
    for (double& x : xs) x = poisson(rng);
    CHECK(kolmogorov_distance_to_normal(xs, mean, std::sqrt(mean)) <= 0.8 / std::sqrt(mean));
  }
}

TEST_CASE("Kolmogorov distance of the line process at rho = 16") {
  ProcessParams p{2, 1, 1.0, 16.0};
  MonteCarloOptions o;
  const auto rows = simulate_intrinsic_volumes(p, 100000, 16, o);
  std::vector<double> v1(100000);
  for (std::size_t r = 0; r < v1.size(); ++r) v1[r] = rows[r * 2 + 1];
  CHECK(kolmogorov_distance_to_normal(v1, true) <= 0.02);
  CHECK(kolmogorov_distance_to_normal(v1, mean_exact(p, 1), std::sqrt(cumulant_exact(p, 1, 2))) <= 0.02);
}

TEST_CASE("log-log fit") {
  const std::vector<double> rhos{1, 2, 4, 8};
  std::vector<double> d;
  for (double r : rhos) d.push_back(0.3 * std::pow(r, -0.5));
  const auto fit = fit_log_log(rhos, d);
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(std::exp(fit.intercept) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK_THROWS_AS(fit_log_log(std::vector<double>{1, 2}, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST_CASE("CLT rate fit preconditions and bounds") {
  ProcessParams p{2, 1, 1.0, 1.0};
  CHECK_THROWS_AS(clt_rate_fit(p, 1, std::vector<double>{1, 2}, 100, 0), std::invalid_argument);
  CHECK_THROWS_AS(clt_rate_fit(p, 1, std::vector<double>{1, 2, 2}, 100, 0), std::invalid_argument);
  CHECK_THROWS_AS(clt_rate_fit(p, 1, std::vector<double>{0.5, 2, 4}, 100, 0), std::invalid_argument);
  CHECK_THROWS_AS(clt_rate_fit(p, 2, std::vector<double>{1, 2, 4}, 100, 0), DimensionError);
  const std::vector<double> rhos{1, 2, 4};
  const auto fit = clt_rate_fit(p, 1, rhos, 20000, 3);
  REQUIRE(fit.distances.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    ProcessParams at = p;
    at.radius = rhos[i];
    CHECK(fit.bounds[i] == berry_esseen_bound(at, 1));
    CHECK(fit.distances[i] <= fit.bounds[i]);
  }
  CHECK(fit.slope < 0.0);
}

TEST_CASE("sample correlation: worked examples") {
  SampleAccumulator lin(3, 4, {0.0, 0.0, 0.0});
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 1000; ++i) {
    const double x = normal(rng);
    lin.add(std::vector<double>{x, 3.0 * x + 1.0, -0.5 * x});
  }
  const auto e = sample_covariance_matrix(lin);
  for (int i = 0; i < 3; ++i) CHECK(e.correlation(i, i) == 1.0);
  CHECK(e.correlation(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.correlation(0, 2) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(e.correlation(1, 2) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(e.standard_errors(0, 1) == doctest::Approx(0.0).epsilon(1e-6));

  SampleAccumulator flat(2, 4);
  flat.add(std::vector<double>{1.0, 2.0});
  flat.add(std::vector<double>{1.0, 3.0});
  CHECK_THROWS_AS(sample_covariance_matrix(flat), DegenerateVariance);
  SampleAccumulator one(2, 4);
  one.add(std::vector<double>{1.0, 2.0});
  CHECK_THROWS_AS(sample_covariance_matrix(one), InsufficientData);
}

TEST_CASE("sample correlation SE matches the bivariate-normal formula") {
  // for Gaussian data Var(r) ~ (1 - r^2)^2 / n
  std::mt19937_64 rng(19);
  std::normal_distribution<double> normal;
  const double rho = 0.6;
  SampleAccumulator acc(2, 4);
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = normal(rng);
    const double y = rho * x + std::sqrt(1 - rho * rho) * normal(rng);
    acc.add(std::vector<double>{x, y});
  }
  const auto e = sample_covariance_matrix(acc);
  CHECK(std::abs(e.correlation(0, 1) - rho) <= 4.0 * e.standard_errors(0, 1));
  CHECK(e.standard_errors(0, 1) == doctest::Approx((1 - rho * rho) / std::sqrt(n)).epsilon(0.03));
}

TEST_CASE("sample correlation of simulated intrinsic volumes") {
  for (auto conv : {MeasureConvention::invariant, MeasureConvention::signed_distance}) {
    ProcessParams p{3, 2, 1.0, 1.0, conv};
    const auto acc = run_monte_carlo(p, 2, 100000, 4, 6);
    const auto e = sample_covariance_matrix(acc);
    const auto exact = covariance_matrix(p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.correlation);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    CHECK((e.correlation - e.correlation.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        CAPTURE(a);
        CAPTURE(b);
        CHECK(std::abs(e.correlation(a, b) - exact(a, b)) <= 4.0 * e.standard_errors(a, b));
      }
    }
  }
  const auto line = sample_covariance_matrix(run_monte_carlo(ProcessParams{2, 1, 1.0, 1.0}, 1, 100000, 4, 8));
  CHECK(std::abs(line.correlation(0, 1) - 0.96191) <= 3.0 * line.standard_errors(0, 1));
}
