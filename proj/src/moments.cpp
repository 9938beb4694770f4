#include "flatproc/moments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flatproc/errors.hpp"

namespace flatproc {
namespace {

constexpr double kBerryEsseenConstant = 42.0;

void check_order(int m) {
  if (m < 1 || m > kMaxPartitionOrder) {
    throw OrderOutOfRange("moment order " + std::to_string(m) + " outside [1, " +
                          std::to_string(kMaxPartitionOrder) + "]");
  }
}

ProcessParams unit_radius(ProcessParams p) {
  p.radius = 1.0;
  return p;
}

}  // namespace

std::vector<double> functional_table(const ProcessParams& p, int j, int max_order) {
  std::vector<double> a(static_cast<std::size_t>(std::max(max_order, 0)) + 1, 0.0);
  for (int m = 1; m <= max_order; ++m) a[static_cast<std::size_t>(m)] = functional_A_ball(p, j, m).value;
  return a;
}

double mean_exact(const ProcessParams& p, int j) {
  return p.intensity * functional_A_ball(p, j, 1).value;
}

double central_moment_exact(const ProcessParams& p, int j, int m) {
  check_order(m);
  p.validate();
  if (m == 1) return 0.0;
  const auto table = enumerate_singleton_free_partitions(m);
  const auto a = functional_table(p, j, m);
  return partition_sum_moment<double>(table, p.intensity, a);
}

double cumulant_exact(const ProcessParams& p, int j, int m) {
  check_order(m);
  if (m == 1) {
    p.validate();
    return 0.0;
  }
  return p.intensity * functional_A_ball(p, j, m).value;
}

MomentReport moment_report(const ProcessParams& p, int j, int max_order) {
  check_order(max_order);
  MomentReport r;
  r.params = p;
  r.j = j;
  r.max_order = max_order;
  r.mean = mean_exact(p, j);
  r.central_moments.values.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
  r.cumulants.values.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
  r.central_moments[0] = 1.0;
  for (int m = 1; m <= max_order; ++m) {
    r.central_moments[m] = central_moment_exact(p, j, m);
    r.cumulants[m] = cumulant_exact(p, j, m);
  }
  r.variance = cumulant_exact(p, j, 2);
  return r;
}

std::vector<double> verify_moment_recursion(const ProcessParams& p, int j, int max_order) {
  check_order(max_order);
  const auto a = functional_table(p, j, max_order);
  const auto recursive = recursion_moments<double>(p.intensity, a, max_order);
  std::vector<double> residuals(static_cast<std::size_t>(max_order) + 1, 0.0);
  for (int m = 1; m <= max_order; ++m) {
    const double mu = central_moment_exact(p, j, m);
    residuals[static_cast<std::size_t>(m)] =
        std::abs(mu - recursive[static_cast<std::size_t>(m)]) / std::max(1.0, std::abs(mu));
  }
  return residuals;
}

AsymptoticTerm asymptotic_cumulant(const ProcessParams& p, int j, int m) {
  check_order(m);
  const auto unit = functional_A_ball(unit_radius(p), j, m);
  AsymptoticTerm t;
  t.rho_exponent = unit.rho_exponent;
  t.coefficient = m == 1 ? 0.0 : p.intensity * unit.coefficient;
  return t;
}

AsymptoticTerm asymptotic_moment(const ProcessParams& p, int j, int m) {
  check_order(m);
  p.validate();
  const double n = p.translation_dim();
  AsymptoticTerm t;
  if (m == 1) {
    t.rho_exponent = j;
    return t;
  }
  const ProcessParams unit = unit_radius(p);
  const double tau_a2 = p.intensity * functional_A_ball(unit, j, 2).coefficient;
  if (m % 2 == 0) {
    t.rho_exponent = j * m + m * n / 2.0;
    t.coefficient = static_cast<double>(double_factorial(m - 1)) * std::pow(tau_a2, m / 2.0);
  } else {
    const double tau_a3 = p.intensity * functional_A_ball(unit, j, 3).coefficient;
    t.rho_exponent = j * m + (m - 1) * n / 2.0;
    t.coefficient = static_cast<double>(binomial(m, 3)) * static_cast<double>(double_factorial(m - 4)) *
                    tau_a3 * std::pow(tau_a2, (m - 3) / 2.0);
  }
  return t;
}

double normalized_moment_limit(int m) {
  if (m < 1) throw OrderOutOfRange("moment order must be >= 1");
  if (m % 2 == 1) return 0.0;
  return static_cast<double>(double_factorial(m - 1));
}

double berry_esseen_bound(const ProcessParams& p, int j) {
  const double tau = p.intensity;
  const double a2 = functional_A_ball(p, j, 2).value;
  const double a3 = functional_A_ball(p, j, 3).value;
  return kBerryEsseenConstant * tau * a3 / std::pow(tau * a2, 1.5);
}

Eigen::MatrixXd covariance_matrix(const ProcessParams& p) {
  p.validate();
  const int size = p.k + 1;
  Eigen::MatrixXd c(size, size);
  std::vector<double> second(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) second[static_cast<std::size_t>(i)] = functional_A_ball(p, i, 2).value;
  for (int i = 0; i < size; ++i) {
    c(i, i) = 1.0;
    for (int j = i + 1; j < size; ++j) {
      const double cross = functional_A_cross_ball(p, i, j).value;
      c(i, j) = cross / std::sqrt(second[static_cast<std::size_t>(i)] * second[static_cast<std::size_t>(j)]);
      c(j, i) = c(i, j);
    }
  }
  return c;
}

}  // namespace flatproc
