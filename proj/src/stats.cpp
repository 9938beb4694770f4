#include "flatproc/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>

#include "flatproc/errors.hpp"
#include "flatproc/moments.hpp"

namespace flatproc {
namespace {

// Forward-mode dual number, enough arithmetic for the moment conversions.
struct Dual {
  double v = 0.0;
  double d = 0.0;

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  Dual(double value, double deriv) : v(value), d(deriv) {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    d += o.d;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    d -= o.d;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    d = d * o.v + v * o.d;
    v *= o.v;
    return *this;
  }
  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
};

// Central moments 0..max_order from raw moments about an arbitrary origin.
template <typename Real>
BasicMomentSequence<Real> central_from_raw(std::span<const Real> raw, int max_order) {
  BasicMomentSequence<Real> c{std::vector<Real>(static_cast<std::size_t>(max_order) + 1, Real(0))};
  c[0] = Real(1);
  const Real neg_mean = -raw[1];
  for (int r = 2; r <= max_order; ++r) {
    Real acc(0);
    Real power(1);  // (-mean)^{r-i}, built from i = r downwards
    for (int i = r; i >= 0; --i) {
      acc += Real(static_cast<double>(binomial(r, i))) * raw[static_cast<std::size_t>(i)] * power;
      power *= neg_mean;
    }
    c[r] = acc;
  }
  return c;
}

std::vector<double> raw_moments(const SampleAccumulator& acc, int component) {
  const double n = static_cast<double>(acc.count());
  std::vector<double> raw(static_cast<std::size_t>(acc.max_order()) + 1);
  raw[0] = 1.0;
  for (int p = 1; p <= acc.max_order(); ++p) raw[static_cast<std::size_t>(p)] = acc.power_sum(component, p) / n;
  return raw;
}

void check_estimable(const SampleAccumulator& acc, int component, int max_order) {
  if (acc.count() < 2) throw InsufficientData("need at least two samples");
  if (component < 0 || component >= acc.components()) throw std::out_of_range("component index out of range");
  if (max_order < 1) throw OrderOutOfRange("moment order must be >= 1");
  if (2 * max_order > acc.max_order()) {
    throw InsufficientData("standard errors up to order " + std::to_string(max_order) + " need power sums to order " +
                           std::to_string(2 * max_order));
  }
}

double mean_of(const SampleAccumulator& acc, int component) {
  return acc.shift()[static_cast<std::size_t>(component)] +
         acc.power_sum(component, 1) / static_cast<double>(acc.count());
}

}  // namespace

ValidationRow make_validation_row(std::string quantity, double exact, double estimate, double standard_error) {
  ValidationRow row{std::move(quantity), exact, estimate, standard_error, 0.0};
  const double diff = estimate - exact;
  if (standard_error > 0.0) {
    row.z = diff / standard_error;
  } else if (diff != 0.0) {
    row.z = std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  return row;
}

MomentEstimate sample_central_moments(const SampleAccumulator& acc, int component, int max_order) {
  check_estimable(acc, component, max_order);
  const double n = static_cast<double>(acc.count());
  const auto raw = raw_moments(acc, component);
  const int full = 2 * max_order;
  const auto central = central_from_raw<double>(raw, full);

  MomentEstimate est;
  est.mean = mean_of(acc, component);
  est.mean_standard_error = std::sqrt(std::max(central[2], 0.0) / n);
  est.values.values.assign(central.values.begin(), central.values.begin() + max_order + 1);
  est.values[1] = 0.0;
  est.standard_errors.assign(static_cast<std::size_t>(max_order) + 1, 0.0);
  // Var(m_r) ~ (mu_2r - mu_r^2 - 2r mu_{r-1} mu_{r+1} + r^2 mu_2 mu_{r-1}^2) / n
  for (int r = 2; r <= max_order; ++r) {
    const double rr = r;
    const double var = central[2 * r] - central[r] * central[r] - 2.0 * rr * central[r - 1] * central[r + 1] +
                       rr * rr * central[2] * central[r - 1] * central[r - 1];
    est.standard_errors[static_cast<std::size_t>(r)] = std::sqrt(std::max(var, 0.0) / n);
  }
  return est;
}

MomentEstimate sample_cumulants(const SampleAccumulator& acc, int component, int max_order) {
  check_estimable(acc, component, max_order);
  const double n = static_cast<double>(acc.count());
  const auto raw = raw_moments(acc, component);

  MomentEstimate est;
  est.mean = mean_of(acc, component);
  const auto central = central_from_raw<double>(raw, max_order);
  est.mean_standard_error = std::sqrt(std::max(central[2], 0.0) / n);
  est.values = cumulants_from_moments(central);
  est.values[1] = 0.0;
  est.standard_errors.assign(static_cast<std::size_t>(max_order) + 1, 0.0);

  // Gradient of every cumulant w.r.t. each raw moment a_1..a_M.
  const auto m = static_cast<std::size_t>(max_order);
  std::vector<std::vector<double>> grad(m + 1, std::vector<double>(m + 1, 0.0));  // [order][raw index]
  std::vector<Dual> dual_raw(raw.begin(), raw.begin() + max_order + 1);
  for (std::size_t l = 1; l <= m; ++l) {
    dual_raw[l].d = 1.0;
    const auto gamma = cumulants_from_moments(central_from_raw<Dual>(dual_raw, max_order));
    for (std::size_t r = 2; r <= m; ++r) grad[r][l] = gamma.values[r].d;
    dual_raw[l].d = 0.0;
  }
  for (std::size_t r = 2; r <= m; ++r) {
    double var = 0.0;
    for (std::size_t a = 1; a <= m; ++a) {
      for (std::size_t b = 1; b <= m; ++b) {
        var += grad[r][a] * grad[r][b] * (raw[a + b] - raw[a] * raw[b]);
      }
    }
    est.standard_errors[r] = std::sqrt(std::max(var, 0.0) / n);
  }
  return est;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double kolmogorov_distance_to_normal(std::span<const double> samples, double mean, double sd) {
  if (samples.size() < 2) throw InsufficientData("Kolmogorov distance needs at least two samples");
  if (!(sd > 0.0)) throw DegenerateVariance("standardization needs a positive standard deviation");
  std::vector<double> z(samples.begin(), samples.end());
  for (double& v : z) v = (v - mean) / sd;
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double phi = normal_cdf(z[i]);
    const double upper = static_cast<double>(i + 1) / n - phi;
    const double lower = phi - static_cast<double>(i) / n;
    d = std::max({d, upper, lower});
  }
  return d;
}

double kolmogorov_distance_to_normal(std::span<const double> samples, bool standardize) {
  if (samples.size() < 2) throw InsufficientData("Kolmogorov distance needs at least two samples");
  if (!standardize) return kolmogorov_distance_to_normal(samples, 0.0, 1.0);
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));
  return kolmogorov_distance_to_normal(samples, mean, sd);
}

RateFit fit_log_log(std::span<const double> rhos, std::span<const double> distances) {
  if (rhos.size() != distances.size()) throw std::invalid_argument("rho and distance lists differ in length");
  if (rhos.size() < 3) throw std::invalid_argument("rate fit needs at least three points");
  const double n = static_cast<double>(rhos.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    if (!(rhos[i] > 0.0) || !(distances[i] > 0.0)) throw std::invalid_argument("log-log fit needs positive values");
    const double x = std::log(rhos[i]);
    const double y = std::log(distances[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("rate fit needs distinct radii");
  RateFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.rhos.assign(rhos.begin(), rhos.end());
  fit.distances.assign(distances.begin(), distances.end());
  return fit;
}

RateFit clt_rate_fit(const ProcessParams& p, int j, std::span<const double> rhos, std::int64_t reps_per_rho,
                     std::uint64_t seed, const MonteCarloOptions& options, bool sample_standardize) {
  p.validate();
  if (j < 0 || j > p.k) throw DimensionError("j must satisfy 0 <= j <= k");
  const std::set<double> distinct(rhos.begin(), rhos.end());
  if (distinct.size() < 3) throw std::invalid_argument("CLT rate fit needs at least three distinct radii");
  for (double rho : rhos) {
    if (!(rho >= 1.0)) throw std::invalid_argument("CLT rate fit radii must be >= 1");
  }
  const auto width = static_cast<std::size_t>(p.k) + 1;
  std::vector<double> distances;
  std::vector<double> bounds;
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    ProcessParams at = p;
    at.radius = rhos[i];
    const auto all = simulate_intrinsic_volumes(at, reps_per_rho, derive_seed(seed, i), options);
    std::vector<double> column(static_cast<std::size_t>(reps_per_rho));
    for (std::size_t r = 0; r < column.size(); ++r) column[r] = all[r * width + static_cast<std::size_t>(j)];
    const double d = sample_standardize
                         ? kolmogorov_distance_to_normal(column, true)
                         : kolmogorov_distance_to_normal(column, mean_exact(at, j),
                                                         std::sqrt(cumulant_exact(at, j, 2)));
    distances.push_back(d);
    bounds.push_back(berry_esseen_bound(at, j));
  }
  RateFit fit = fit_log_log(rhos, distances);
  fit.bounds = std::move(bounds);
  return fit;
}

CorrelationEstimate sample_covariance_matrix(const SampleAccumulator& acc) {
  if (acc.count() < 2) throw InsufficientData("need at least two samples");
  if (acc.max_order() < SampleAccumulator::kCrossOrder) {
    throw InsufficientData("correlation standard errors need power sums to order 4");
  }
  const int dim = acc.components();
  const double n = static_cast<double>(acc.count());
  std::vector<double> means(static_cast<std::size_t>(dim));
  std::vector<std::array<double, 5>> pure(static_cast<std::size_t>(dim));  // central moments 0..4
  for (int c = 0; c < dim; ++c) {
    const auto raw = raw_moments(acc, c);
    const auto central = central_from_raw<double>(raw, 4);
    means[static_cast<std::size_t>(c)] = raw[1];
    for (int r = 0; r <= 4; ++r) pure[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)] = central[r];
    if (!(central[2] > 0.0)) {
      throw DegenerateVariance("component " + std::to_string(c) + " has zero sample variance");
    }
  }

  // Central mixed moment mu_pq of components (a, b).
  auto mixed = [&](int a, int b, int p, int q) {
    const double na = -means[static_cast<std::size_t>(a)];
    const double nb = -means[static_cast<std::size_t>(b)];
    double total = 0.0;
    for (int s = 0; s <= p; ++s) {
      for (int t = 0; t <= q; ++t) {
        const double raw = acc.cross_sum(a, b, s, t) / n;
        total += static_cast<double>(binomial(p, s) * binomial(q, t)) * raw * std::pow(na, p - s) *
                 std::pow(nb, q - t);
      }
    }
    return total;
  };

  CorrelationEstimate est;
  est.correlation = Eigen::MatrixXd::Identity(dim, dim);
  est.standard_errors = Eigen::MatrixXd::Zero(dim, dim);
  for (int a = 0; a < dim; ++a) {
    for (int b = a + 1; b < dim; ++b) {
      const auto& pa = pure[static_cast<std::size_t>(a)];
      const auto& pb = pure[static_cast<std::size_t>(b)];
      const double s20 = pa[2];
      const double s02 = pb[2];
      const double r = mixed(a, b, 1, 1) / std::sqrt(s20 * s02);
      // Delta method for Pearson correlation without normality, written so
      // that mu_11 never appears in a denominator.
      const double m22 = mixed(a, b, 2, 2);
      const double m31 = mixed(a, b, 3, 1);
      const double m13 = mixed(a, b, 1, 3);
      const double var =
          r * r / 4.0 * (pa[4] / (s20 * s20) + pb[4] / (s02 * s02) + 2.0 * m22 / (s20 * s02)) +
          m22 / (s20 * s02) - r * (m31 / (s20 * std::sqrt(s20 * s02)) + m13 / (s02 * std::sqrt(s20 * s02)));
      est.correlation(a, b) = est.correlation(b, a) = r;
      est.standard_errors(a, b) = est.standard_errors(b, a) = std::sqrt(std::max(var, 0.0) / n);
    }
  }
  return est;
}

}  // namespace flatproc
