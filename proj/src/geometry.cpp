#include "flatproc/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "flatproc/combinatorics.hpp"
#include "flatproc/errors.hpp"

namespace flatproc {
namespace {

constexpr double kQuadratureRelTol = 1e-12;

void check_indices(int k, int j) {
  if (j < 0 || j > k) {
    throw DimensionError("intrinsic volume index j=" + std::to_string(j) +
                         " must satisfy 0 <= j <= k=" + std::to_string(k));
  }
}

// log(C(k,j) kappa_k / kappa_{k-j}), the log of V_j of the unit k-ball.
double log_unit_intrinsic_volume(int k, int j) {
  return std::log(static_cast<double>(binomial(k, j))) + log_unit_ball_volume(k) -
         log_unit_ball_volume(k - j);
}

// Closed form for integral of V_i V_j over hitting flats, general exponent
// pair. `power_i` copies of V_i and `power_j` copies of V_j.
FunctionalValue mixed_functional(const ProcessParams& p, int i, int power_i, int j, int power_j) {
  p.validate();
  check_indices(p.k, i);
  check_indices(p.k, j);
  const int n = p.translation_dim();
  const double radial = static_cast<double>(i * power_i + j * power_j);
  // Slicing the (radial + n)-ball over its n-dimensional coordinates gives
  // n kappa_n int_0^1 r^{n-1} (1 - r^2)^{radial/2} dr = kappa_{radial+n} / kappa_radial.
  const double log_coef = power_i * log_unit_intrinsic_volume(p.k, i) +
                          power_j * log_unit_intrinsic_volume(p.k, j) +
                          log_unit_ball_volume(radial + n) - log_unit_ball_volume(radial);
  FunctionalValue out;
  out.coefficient = std::exp(log_coef);
  out.rho_exponent = radial + n;
  out.value = out.coefficient * std::pow(p.radius, out.rho_exponent);
  return out;
}

template <typename Integrand>
double integrate_radial(const ProcessParams& p, Integrand&& slice_value) {
  p.validate();
  const double rho = p.radius;
  boost::math::quadrature::tanh_sinh<double> integrator(15);
  double error = 0.0;
  double l1 = 0.0;
  double result = 0.0;
  if (p.convention == MeasureConvention::signed_distance) {
    auto f = [&](double x) {
      const double r2 = (rho - x) * (rho + x);
      return slice_value(std::sqrt(std::max(r2, 0.0)));
    };
    result = integrator.integrate(f, -rho, rho, kQuadratureRelTol * 1e-2, &error, &l1);
  } else {
    const int n = p.dim - p.k;
    auto f = [&](double r) {
      const double r2 = (rho - r) * (rho + r);
      return std::pow(r, n - 1) * slice_value(std::sqrt(std::max(r2, 0.0)));
    };
    result = integrator.integrate(f, 0.0, rho, kQuadratureRelTol * 1e-2, &error, &l1);
    result *= n * unit_ball_volume(n);
    error *= n * unit_ball_volume(n);
    l1 *= n * unit_ball_volume(n);
  }
  if (!(error <= kQuadratureRelTol * std::abs(l1))) {
    throw QuadratureNonConvergence("radial quadrature error estimate " + std::to_string(error) +
                                   " exceeds relative tolerance");
  }
  return result;
}

}  // namespace

std::string_view to_string(MeasureConvention c) {
  return c == MeasureConvention::invariant ? "invariant" : "signed-distance";
}

MeasureConvention parse_convention(std::string_view text) {
  if (text == "invariant") return MeasureConvention::invariant;
  if (text == "signed-distance" || text == "signed_distance") return MeasureConvention::signed_distance;
  throw std::invalid_argument("unknown measure convention '" + std::string(text) + "'");
}

void ProcessParams::validate() const {
  if (dim < 1) throw DimensionError("dimension must be >= 1, got " + std::to_string(dim));
  if (k < 0 || k > dim - 1) {
    throw DimensionError("flat dimension k=" + std::to_string(k) + " must satisfy 0 <= k <= d-1=" +
                         std::to_string(dim - 1));
  }
  if (!(intensity > 0.0) || !std::isfinite(intensity)) {
    throw std::invalid_argument("intensity must be positive and finite");
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("radius must be positive and finite");
  }
}

int ProcessParams::translation_dim() const {
  return convention == MeasureConvention::invariant ? dim - k : 1;
}

double log_unit_ball_volume(double n) {
  if (n < 0.0) throw std::invalid_argument("ball dimension must be >= 0");
  return 0.5 * n * std::log(std::numbers::pi) - std::lgamma(1.0 + 0.5 * n);
}

double unit_ball_volume(int n) { return std::exp(log_unit_ball_volume(static_cast<double>(n))); }

double intrinsic_volume_ball(int k, int j, double r) {
  check_indices(k, j);
  if (j == 0) return 1.0;
  return std::exp(log_unit_intrinsic_volume(k, j)) * std::pow(r, j);
}

FunctionalValue functional_A_ball(const ProcessParams& p, int j, int m) {
  if (m < 1) throw OrderOutOfRange("functional order m must be >= 1");
  return mixed_functional(p, j, m, j, 0);
}

double functional_A_quadrature(const ProcessParams& p, int j, int m) {
  if (m < 1) throw OrderOutOfRange("functional order m must be >= 1");
  check_indices(p.k, j);
  return integrate_radial(p, [&](double r) { return std::pow(intrinsic_volume_ball(p.k, j, r), m); });
}

FunctionalValue functional_A_cross_ball(const ProcessParams& p, int i, int j) {
  return mixed_functional(p, i, 1, j, 1);
}

double functional_A_cross_quadrature(const ProcessParams& p, int i, int j) {
  check_indices(p.k, i);
  check_indices(p.k, j);
  return integrate_radial(p, [&](double r) {
    return intrinsic_volume_ball(p.k, i, r) * intrinsic_volume_ball(p.k, j, r);
  });
}

double hitting_measure(const ProcessParams& p) { return functional_A_ball(p, 0, 1).value; }

FunctionalValue homogeneity_scale(const FunctionalValue& a, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("scale factor must be positive");
  FunctionalValue out = a;
  out.value = a.value * std::pow(factor, a.rho_exponent);
  return out;
}

}  // namespace flatproc
