#pragma once

// Chebyshev approximation of scalar GLM mapping functions on [-R, R] and
// the analytic error bounds that go with it.

#include <functional>
#include <span>
#include <vector>

namespace passglm {

using ScalarFn = std::function<double(double)>;

inline constexpr int kMaxDegree = 20;
inline constexpr int kSupGridPoints = 10001;

/// Orthonormal Chebyshev basis on [-R, R] with respect to
/// varsigma(ds) = (2/pi) (1 - (s/R)^2)^{-1/2} ds / R.
///
/// psi_0 = 1/sqrt(2) and psi_m(s) = T_m(s/R) for m >= 1, so that
/// int psi_m psi_m' dvarsigma = delta_mm'. alpha(m, j) is the coefficient of
/// (s/R)^j in psi_m.
class ChebBasis {
 public:
  ChebBasis(int degree, double radius);

  int degree() const { return degree_; }
  double radius() const { return radius_; }

  double alpha(int m, int j) const { return alpha_[index(m, j)]; }

  /// psi_m evaluated at s by the three-term recurrence.
  double eval(int m, double s) const;

  /// Gauss-Chebyshev estimate of int f dvarsigma using `nodes` points.
  static double integrate(const ScalarFn& f, double radius, int nodes);

  /// Number of quadrature nodes used for coefficient integrals.
  static int quadrature_nodes(int degree);

 private:
  std::size_t index(int m, int j) const {
    return static_cast<std::size_t>(m) * (m + 1) / 2 + j;
  }

  int degree_;
  double radius_;
  std::vector<double> alpha_;  // packed lower triangle
};

struct PolyApprox {
  int degree = 0;
  double radius = 1.0;
  std::vector<double> b;  // monomial coefficients on the unscaled s
  std::vector<double> c;  // basis coefficients int phi psi_m dvarsigma
  double sup_err_est = 0.0;
};

/// Fits an order-`degree` Chebyshev approximation of phi on [-radius, radius].
/// Throws InvalidArgument for degree outside [0, 20], radius <= 0, or a
/// non-finite phi value at a quadrature node.
PolyApprox fit_chebyshev(const ScalarFn& phi, int degree, double radius);

/// Horner evaluation of sum_m b_m s^m.
double eval_poly(std::span<const double> b, double s);
inline double eval_poly(const PolyApprox& p, double s) { return eval_poly(p.b, s); }

double eval_poly_derivative(std::span<const double> b, double s);
double eval_poly_second_derivative(std::span<const double> b, double s);

/// max |phi - f| on a uniform grid over [-R, R].
double grid_sup_error(const ScalarFn& phi, const PolyApprox& p,
                      int points = kSupGridPoints);

/// max |phi' - f'| on a uniform grid, measured on the scaled variable s/R
/// (i.e. R times the error in s units), which is the quantity the
/// derivative bound controls.
double grid_sup_derivative_error(const ScalarFn& dphi, const PolyApprox& p,
                                 int points = kSupGridPoints);

/// min over a uniform grid of f''(s) on [-R, R].
double grid_min_second_derivative(const PolyApprox& p,
                                  int points = kSupGridPoints);

struct BoundReport {
  double r = 0.0;
  double C = 0.0;
  double sup_bound = 0.0;
  double deriv_bound = 0.0;
};

/// C r^{-M} (r+1)/(r-1)^4 [M^2 r(r+1) + M(2r^2 + r + 1) + r(r+1)].
double deriv_bound(double C, double r, int degree);

/// C / ((r - 1) r^M).
double sup_bound_at(double C, double r, int degree);

// Sup of |phi| on the Bernstein ellipse E_r for the scaled maps phi(R u).
double logit_ellipse_sup(double r, double radius);
double exp_ellipse_sup(double r, double radius);
double shuber_ellipse_sup(double r, double radius, double b_scale);

/// Minimizes C(r)/((r-1) r^M) over the admissible r interval by
/// golden-section search (relative tolerance 1e-8, ties toward smaller r).
BoundReport sup_bound_logit(double radius, int degree);
BoundReport sup_bound_exp(double radius, int degree);
BoundReport sup_bound_shuber(double radius, int degree, double b_scale);

/// Golden-section minimizer on (lo, hi); returns the argmin.
double golden_section_minimize(const ScalarFn& f, double lo, double hi,
                               double rel_tol = 1e-8);

}  // namespace passglm
