#pragma once

#include <string_view>

namespace flatproc {

// How the flat measure weights translations.
//  - invariant: Lebesgue measure on the (d-k)-dimensional orthogonal
//    complement (the translation-invariant measure on k-flats).
//  - signed_distance: a single signed distance p in [-rho, rho] per
//    direction, i.e. one-dimensional translation parameter.
// The two coincide for hyperplanes (d - k == 1).
enum class MeasureConvention { invariant, signed_distance };

std::string_view to_string(MeasureConvention c);
MeasureConvention parse_convention(std::string_view text);

// Stationary isotropic Poisson k-flat process in R^d observed in the ball
// of radius `radius` centred at the origin.
struct ProcessParams {
  int dim = 2;
  int k = 1;
  double intensity = 1.0;
  double radius = 1.0;
  MeasureConvention convention = MeasureConvention::invariant;

  // Throws DimensionError / std::invalid_argument on a violated constraint.
  void validate() const;

  // Dimension of the translation parameter: d - k (invariant) or 1.
  int translation_dim() const;
};

// A(B_rho, j, k, m) = coefficient * rho^rho_exponent.
struct FunctionalValue {
  double coefficient = 0.0;
  double rho_exponent = 0.0;
  double value = 0.0;
};

// kappa_n = pi^{n/2} / Gamma(1 + n/2), accepting real n >= 0.
double log_unit_ball_volume(double n);
double unit_ball_volume(int n);

// V_j of a k-dimensional ball of radius r: C(k,j) kappa_k / kappa_{k-j} r^j.
double intrinsic_volume_ball(int k, int j, double r);

// Closed form of the m-th power integral of V_j(B_rho ∩ E) over hitting flats.
FunctionalValue functional_A_ball(const ProcessParams& p, int j, int m);

// Same integral evaluated by tanh-sinh quadrature of the radial reduction.
// Throws QuadratureNonConvergence if the 1e-12 relative target is missed.
double functional_A_quadrature(const ProcessParams& p, int j, int m);

// Mixed integral of V_i * V_j over hitting flats, closed form and quadrature.
FunctionalValue functional_A_cross_ball(const ProcessParams& p, int i, int j);
double functional_A_cross_quadrature(const ProcessParams& p, int i, int j);

// Measure of the set of flats hitting B_rho (A with j = 0, m = 1).
double hitting_measure(const ProcessParams& p);

FunctionalValue homogeneity_scale(const FunctionalValue& a, double factor);

}  // namespace flatproc
