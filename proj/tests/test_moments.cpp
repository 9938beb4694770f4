#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "flatproc/combinatorics.hpp"
#include "flatproc/errors.hpp"
#include "flatproc/geometry.hpp"
#include "flatproc/moments.hpp"
#include "oracles.hpp"

using namespace flatproc;
using flatproc::testing::relative_error;

namespace {

constexpr double kPi = std::numbers::pi;
using Big = boost::multiprecision::cpp_bin_float_50;

ProcessParams params(int d, int k, double tau, double rho, MeasureConvention c = MeasureConvention::invariant) {
  return ProcessParams{d, k, tau, rho, c};
}

ProcessParams line_params(double rho = 1.0, double tau = 1.0) { return params(2, 1, tau, rho); }

template <typename F>
void for_each_grid_point(F&& f) {
  for (double tau : {0.5, 1.0, 2.0}) {
    for (double rho : {0.5, 1.0, 3.0}) {
      for (int d = 1; d <= 4; ++d) {
        for (int k = 0; k < d; ++k) {
          for (int j = 0; j <= k; ++j) f(params(d, k, tau, rho), j);
        }
      }
    }
  }
}

}  // namespace

TEST_CASE("central moments: worked examples") {
  CHECK(central_moment_exact(line_params(), 1, 2) == doctest::Approx(16.0 / 3.0).epsilon(1e-14));
  CHECK(central_moment_exact(line_params(), 1, 1) == 0.0);
  CHECK(central_moment_exact(params(3, 0, 2.0, 1.5), 0, 1) == 0.0);
  CHECK(central_moment_exact(line_params(), 1, 4) == doctest::Approx(102.4).epsilon(1e-13));
  CHECK(central_moment_exact(line_params(), 1, 3) == doctest::Approx(3.0 * kPi).epsilon(1e-14));
  CHECK_THROWS_AS(central_moment_exact(line_params(), 1, 25), OrderOutOfRange);
  CHECK_THROWS_AS(central_moment_exact(line_params(), 1, 0), OrderOutOfRange);
}

TEST_CASE("cumulants: worked examples") {
  CHECK(cumulant_exact(line_params(), 1, 3) == doctest::Approx(3.0 * kPi).epsilon(1e-14));
  CHECK(cumulant_exact(line_params(), 1, 1) == 0.0);
  CHECK(cumulant_exact(line_params(3.0, 2.0), 0, 5) == doctest::Approx(12.0).epsilon(1e-14));
  CHECK(cumulant_exact(line_params(), 1, 4) == doctest::Approx(256.0 / 15.0).epsilon(1e-14));
}

TEST_CASE("mean and report") {
  CHECK(mean_exact(line_params(), 1) == doctest::Approx(kPi).epsilon(1e-14));
  CHECK(mean_exact(line_params(3.0, 2.0), 0) == doctest::Approx(12.0).epsilon(1e-14));
  const auto r = moment_report(params(3, 2, 0.7, 2.0), 1, 8);
  CHECK(r.variance == r.cumulants[2]);
  CHECK(r.central_moments[2] == r.cumulants[2]);
  for (int m = 2; m <= 8; ++m) {
    CHECK(relative_error(r.cumulants[m], 0.7 * functional_A_ball(r.params, 1, m).value) < 1e-14);
  }
}

TEST_CASE("moment recursion residuals") {
  const auto res = verify_moment_recursion(params(3, 2, 0.7, 2.0), 1, 10);
  REQUIRE(res.size() == 11);
  CHECK(res[2] == 0.0);
  CHECK(res[3] == 0.0);
  for (double r : res) CHECK(r <= 1e-11);
}

TEST_CASE("partition sum and recursion agree on the parameter grid up to m = 12") {
  for_each_grid_point([](const ProcessParams& p, int j) {
    const auto a = functional_table(p, j, 12);
    const auto rec = recursion_moments<double>(p.intensity, a, 12);
    for (int m = 2; m <= 12; ++m) {
      CAPTURE(p.dim);
      CAPTURE(p.k);
      CAPTURE(j);
      CAPTURE(m);
      const double direct = central_moment_exact(p, j, m);
      CHECK(relative_error(direct, rec[static_cast<std::size_t>(m)]) <= 1e-11);
    }
    const auto res = verify_moment_recursion(p, j, 12);
    for (double r : res) CHECK(r <= 1e-11);
  });
}

TEST_CASE("cumulants of the partition-sum moments reproduce tau * A") {
  // The conversion subtracts products of moments that are many orders of
  // magnitude larger than the cumulant once the mean count is large, so the
  // comparison runs in 50-digit arithmetic on the double-precision A values.
  for_each_grid_point([](const ProcessParams& p, int j) {
    const int order = 12;
    const auto a = functional_table(p, j, order);
    std::vector<Big> big_a(a.begin(), a.end());
    const Big tau(p.intensity);
    BasicMomentSequence<Big> mu;
    mu.values.assign(static_cast<std::size_t>(order) + 1, Big(0));
    mu.values[0] = Big(1);
    for (int m = 2; m <= order; ++m) {
      mu.values[static_cast<std::size_t>(m)] = partition_sum_moment<Big>(
          enumerate_singleton_free_partitions(m), tau, std::span<const Big>(big_a));
    }
    const auto gamma = cumulants_from_moments(mu);
    for (int m = 2; m <= order; ++m) {
      CAPTURE(p.dim);
      CAPTURE(p.k);
      CAPTURE(j);
      CAPTURE(m);
      const double got = static_cast<double>(gamma[m]);
      CHECK(relative_error(got, cumulant_exact(p, j, m)) <= 1e-11);
    }
  });
}

TEST_CASE("double-precision conversion is consistent where the moments stay moderate") {
  for (const auto& p : {line_params(), params(3, 2, 0.7, 2.0), params(3, 1, 1.0, 0.5), params(2, 0, 0.5, 1.0)}) {
    for (int j = 0; j <= p.k; ++j) {
      const auto r = moment_report(p, j, 8);
      const auto gamma = cumulants_from_moments(r.central_moments);
      for (int m = 2; m <= 8; ++m) {
        CAPTURE(m);
        CHECK(relative_error(gamma[m], r.cumulants[m]) <= 1e-11);
      }
    }
  }
}

TEST_CASE("j = 0 gives Poisson cumulants") {
  for_each_grid_point([](const ProcessParams& p, int j) {
    if (j != 0) return;
    const double mean_count = p.intensity * hitting_measure(p);
    CHECK(relative_error(mean_exact(p, 0), mean_count) < 1e-13);
    for (int m = 2; m <= 24; ++m) CHECK(relative_error(cumulant_exact(p, 0, m), mean_count) < 1e-13);
  });
}

TEST_CASE("normalized fourth moment") {
  for (double rho : {0.5, 1.0, 2.0, 7.0}) {
    const auto p = line_params(rho);
    const double mu2 = central_moment_exact(p, 1, 2);
    CHECK(relative_error(central_moment_exact(p, 1, 4) / (mu2 * mu2), 3.0 + 0.6 / rho) < 1e-13);
  }
  for (int d = 2; d <= 4; ++d) {
    for (int k = 0; k < d; ++k) {
      for (int j = 0; j <= k; ++j) {
        for (double tau : {0.5, 2.0}) {
          for (double rho : {0.5, 3.0}) {
            const auto p = params(d, k, tau, rho);
            const auto unit = params(d, k, tau, 1.0);
            const double mu2 = central_moment_exact(p, j, 2);
            const double a2 = functional_A_ball(unit, j, 2).value;
            const double a4 = functional_A_ball(unit, j, 4).value;
            const double want = 3.0 + a4 / (tau * a2 * a2 * std::pow(rho, d - k));
            CHECK(relative_error(central_moment_exact(p, j, 4) / (mu2 * mu2), want) < 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("asymptotic cumulants") {
  const auto t = asymptotic_cumulant(line_params(), 1, 2);
  CHECK(t.rho_exponent == 3.0);
  CHECK(t.coefficient == doctest::Approx(16.0 / 3.0).epsilon(1e-14));
  CHECK(asymptotic_cumulant(line_params(), 1, 1).coefficient == 0.0);
  CHECK(asymptotic_cumulant(params(3, 1, 1.0, 1.0, MeasureConvention::signed_distance), 1, 2).rho_exponent == 3.0);
  CHECK(asymptotic_cumulant(params(3, 1, 1.0, 1.0), 1, 2).rho_exponent == 4.0);
  // exact homogeneity, not just a limit
  for (double rho : {0.5, 2.0, 10.0}) {
    for (int m = 2; m <= 6; ++m) {
      const auto p = params(4, 2, 1.5, rho);
      const auto a = asymptotic_cumulant(p, 1, m);
      CHECK(relative_error(cumulant_exact(p, 1, m) / std::pow(rho, a.rho_exponent), a.coefficient) < 1e-13);
    }
  }
}

TEST_CASE("asymptotic moments") {
  const auto m4 = asymptotic_moment(line_params(), 1, 4);
  CHECK(m4.rho_exponent == 6.0);
  CHECK(m4.coefficient == doctest::Approx(256.0 / 3.0).epsilon(1e-14));
  const auto m5 = asymptotic_moment(line_params(), 1, 5);
  CHECK(m5.rho_exponent == 7.0);
  CHECK(m5.coefficient == doctest::Approx(10.0 * 3.0 * kPi * 16.0 / 3.0).epsilon(1e-14));
  // exact finite-rho ratio for m = 4
  for (double rho : {1.0, 4.0, 50.0}) {
    CHECK(relative_error(central_moment_exact(line_params(rho), 1, 4) / std::pow(rho, 6),
                         256.0 / 3.0 + 256.0 / 15.0 / rho) < 1e-13);
  }
  // odd m with even d - k: exponent jm + (m-1)(d-k)/2
  const auto odd = asymptotic_moment(params(3, 1, 1.0, 1.0), 1, 5);
  CHECK(odd.rho_exponent == 5.0 + 4.0);
  // the ratio converges to the coefficient as rho grows
  for (const auto& p : {params(2, 1, 1.0, 1.0), params(3, 1, 1.0, 1.0), params(4, 1, 0.5, 1.0)}) {
    for (int m = 3; m <= 8; ++m) {
      CAPTURE(p.dim);
      CAPTURE(m);
      const auto t = asymptotic_moment(p, 1, m);
      auto ratio_error = [&](double rho) {
        auto q = p;
        q.radius = rho;
        return relative_error(central_moment_exact(q, 1, m) / std::pow(rho, t.rho_exponent), t.coefficient);
      };
      const double e1 = ratio_error(1e2);
      const double e2 = ratio_error(1e4);
      CHECK(e2 <= e1);
      CHECK(e2 < 1e-3);
    }
  }
}

TEST_CASE("normalized moment limits") {
  CHECK(normalized_moment_limit(4) == 3.0);
  CHECK(normalized_moment_limit(5) == 0.0);
  CHECK(normalized_moment_limit(2) == 1.0);
  CHECK(normalized_moment_limit(1) == 0.0);
  CHECK(normalized_moment_limit(6) == 15.0);
  CHECK(normalized_moment_limit(12) == 10395.0);
  // exact normalized moments approach the limits
  // odd orders vanish like rho^{-1/2} times C(m,3)(m-4)!! and the skewness
  for (int m = 2; m <= 10; ++m) {
    CAPTURE(m);
    const auto p = params(3, 2, 1.0, 1e8);
    const double mu2 = central_moment_exact(p, 2, 2);
    const double z = central_moment_exact(p, 2, m) / std::pow(mu2, m / 2.0);
    const double scale = m % 2 == 0 ? static_cast<double>(double_factorial(m - 1))
                                    : static_cast<double>(binomial(m, 3) * double_factorial(m - 4));
    CHECK(std::abs(z - normalized_moment_limit(m)) < 1e-2 * scale);
  }
}

TEST_CASE("Berry-Esseen bound") {
  const double want = 42.0 * 3.0 * kPi / std::pow(16.0 / 3.0, 1.5);
  CHECK(berry_esseen_bound(line_params(), 1) == doctest::Approx(want).epsilon(1e-14));
  CHECK(berry_esseen_bound(line_params(), 1) == doctest::Approx(32.14).epsilon(1e-3));
  CHECK(berry_esseen_bound(line_params(4.0), 1) / berry_esseen_bound(line_params(1.0), 1) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(berry_esseen_bound(line_params(1.0, 4.0), 1) / berry_esseen_bound(line_params(1.0, 1.0), 1) ==
        doctest::Approx(0.5).epsilon(1e-14));
  // rho^{-(d-k)/2} in general
  const auto p1 = params(4, 1, 1.0, 1.0);
  const auto p2 = params(4, 1, 1.0, 2.0);
  CHECK(berry_esseen_bound(p2, 1) / berry_esseen_bound(p1, 1) == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-13));
}

TEST_CASE("covariance matrix") {
  const auto c = covariance_matrix(params(3, 2, 1.0, 1.0, MeasureConvention::signed_distance));
  REQUIRE(c.rows() == 3);
  for (int i = 0; i < 3; ++i) CHECK(c(i, i) == 1.0);
  const double g = std::tgamma(1.5) / std::tgamma(2.0) * std::sqrt(std::tgamma(1.5) * std::tgamma(2.5));
  CHECK(c(0, 1) == doctest::Approx(g).epsilon(1e-14));
  CHECK(c(0, 1) == doctest::Approx(0.96191).epsilon(1e-5));
  CHECK(c(0, 2) == doctest::Approx(0.91287).epsilon(1e-5));

  // Gamma formula for general (i, j) under the signed-distance convention
  for (int k = 1; k <= 4; ++k) {
    const auto m = covariance_matrix(params(k + 2, k, 2.0, 3.0, MeasureConvention::signed_distance));
    for (int i = 0; i <= k; ++i) {
      for (int j = 0; j <= k; ++j) {
        const double s = (i + j) / 2.0;
        const double gamma_form = std::tgamma(1.0 + s) / std::tgamma(1.5 + s) *
                                  std::sqrt(std::tgamma(1.5 + i) * std::tgamma(1.5 + j) / (std::tgamma(1.0 + i) *
                                                                                           std::tgamma(1.0 + j)));
        CHECK(relative_error(m(i, j), gamma_form) < 1e-13);
      }
    }
  }

  for (int d = 2; d <= 5; ++d) {
    for (int k = 1; k < d; ++k) {
      for (auto conv : {MeasureConvention::invariant, MeasureConvention::signed_distance}) {
        const auto a = covariance_matrix(params(d, k, 1.0, 1.0, conv));
        const auto b = covariance_matrix(params(d, k, 3.0, 5.0, conv));
        CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
        for (int i = 0; i <= k; ++i) CHECK(a(i, i) == 1.0);
      }
    }
  }
}
