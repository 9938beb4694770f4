#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "flatproc/combinatorics.hpp"
#include "flatproc/geometry.hpp"
#include "flatproc/simulator.hpp"

namespace flatproc {

struct ValidationRow {
  std::string quantity;
  double exact = 0.0;
  double estimate = 0.0;
  double standard_error = 0.0;
  double z = 0.0;  // (estimate - exact) / SE, 0 when SE == 0 and they agree
};

ValidationRow make_validation_row(std::string quantity, double exact, double estimate, double standard_error);

// Sample moments of one accumulated component with delta-method SEs.
// values[m] estimates the m-th central moment (or cumulant); index 0 holds 1
// (moments) or 0 (cumulants).
struct MomentEstimate {
  double mean = 0.0;
  double mean_standard_error = 0.0;
  MomentSequence values;
  std::vector<double> standard_errors;
};

// Requires acc.count() >= 2 and 2 * max_order <= acc.max_order().
MomentEstimate sample_central_moments(const SampleAccumulator& acc, int component, int max_order);
MomentEstimate sample_cumulants(const SampleAccumulator& acc, int component, int max_order);

double normal_cdf(double x);

// sup_t |F_n(t) - Phi(t)| from order statistics. With `standardize`, samples
// are centred/scaled by their own mean and SD first.
double kolmogorov_distance_to_normal(std::span<const double> samples, bool standardize);
// Standardizes with the given (e.g. exact) mean and standard deviation.
double kolmogorov_distance_to_normal(std::span<const double> samples, double mean, double sd);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> rhos;
  std::vector<double> distances;
  std::vector<double> bounds;  // berry_esseen_bound at each rho
};

// Least squares of log distance on log rho.
RateFit fit_log_log(std::span<const double> rhos, std::span<const double> distances);

// Simulates V_j at each radius (overriding p.radius), standardizes with the
// exact mean and variance, and fits the Kolmogorov-distance decay rate.
RateFit clt_rate_fit(const ProcessParams& p, int j, std::span<const double> rhos, std::int64_t reps_per_rho,
                     std::uint64_t seed, const MonteCarloOptions& options = {}, bool sample_standardize = false);

struct CorrelationEstimate {
  Eigen::MatrixXd correlation;
  Eigen::MatrixXd standard_errors;  // zero on the diagonal
};

// Throws InsufficientData (count < 2) or DegenerateVariance.
CorrelationEstimate sample_covariance_matrix(const SampleAccumulator& acc);

}  // namespace flatproc
