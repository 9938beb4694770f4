#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "flatproc/combinatorics.hpp"
#include "flatproc/geometry.hpp"

namespace flatproc {

// Exact moment summary of V_{j,k}(B_rho).
struct MomentReport {
  ProcessParams params;
  int j = 0;
  int max_order = 0;
  double mean = 0.0;
  MomentSequence central_moments;
  MomentSequence cumulants;
  double variance = 0.0;
};

// Leading rho-power of a moment or cumulant: value ~ coefficient * rho^rho_exponent.
struct AsymptoticTerm {
  double rho_exponent = 0.0;
  double coefficient = 0.0;
};

// A(B_rho, j, k, m) for m = 0..max_order (index 0 unused, set to 0).
std::vector<double> functional_table(const ProcessParams& p, int j, int max_order);

// mu_m = sum over singleton-free partitions of count * tau^r * prod A(m_i).
// `a` is indexed by order and must reach table.order.
template <typename Real>
Real partition_sum_moment(const BlockPartitionTable& table, const Real& tau, std::span<const Real> a) {
  Real total(0);
  for (const auto& entry : table.entries) {
    Real term(static_cast<double>(entry.count));
    for (int size : entry.sizes) term *= tau * a[static_cast<std::size_t>(size)];
    total += term;
  }
  return total;
}

// mu_m = tau sum_{i=1}^{m-1} C(m-1, i) A(i+1) mu_{m-1-i}, with mu_0 = 1, mu_1 = 0.
template <typename Real>
std::vector<Real> recursion_moments(const Real& tau, std::span<const Real> a, int max_order) {
  std::vector<Real> mu(static_cast<std::size_t>(max_order) + 1, Real(0));
  mu[0] = Real(1);
  for (int m = 2; m <= max_order; ++m) {
    Real acc(0);
    for (int i = 1; i <= m - 1; ++i) {
      acc += Real(static_cast<double>(binomial(m - 1, i))) * a[static_cast<std::size_t>(i + 1)] *
             mu[static_cast<std::size_t>(m - 1 - i)];
    }
    mu[static_cast<std::size_t>(m)] = tau * acc;
  }
  return mu;
}

double mean_exact(const ProcessParams& p, int j);
double central_moment_exact(const ProcessParams& p, int j, int m);
double cumulant_exact(const ProcessParams& p, int j, int m);
MomentReport moment_report(const ProcessParams& p, int j, int max_order);

// Relative residual of the moment recursion at each order 0..max_order.
std::vector<double> verify_moment_recursion(const ProcessParams& p, int j, int max_order);

AsymptoticTerm asymptotic_cumulant(const ProcessParams& p, int j, int m);
// Leading term of the partition sum: all-2 blocks for even m, one 3-block
// plus 2-blocks for odd m.
AsymptoticTerm asymptotic_moment(const ProcessParams& p, int j, int m);

// Limit of the m-th moment of the standardized variable: (m-1)!! or 0.
double normalized_moment_limit(int m);

// 42 * tau A(3) / (tau A(2))^{3/2}: Kolmogorov-distance bound to N(0,1).
double berry_esseen_bound(const ProcessParams& p, int j);

// Correlation matrix of (V_0, ..., V_k); independent of rho and tau.
Eigen::MatrixXd covariance_matrix(const ProcessParams& p);

}  // namespace flatproc
