#include "passglm/poly_approx.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "passglm/errors.hpp"

namespace passglm {

namespace {

void check_degree_radius(int degree, double radius) {
  if (degree < 0 || degree > kMaxDegree) {
    throw InvalidArgument("degree must lie in [0, " + std::to_string(kMaxDegree) +
                          "], got " + std::to_string(degree));
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidArgument("radius must be positive and finite");
  }
}

BoundReport minimize_bound(const ScalarFn& ellipse_sup, double hi, int degree) {
  if (!(hi > 1.0)) {
    throw NumericError("internal error: degenerate r search interval");
  }
  auto objective = [&](double r) { return sup_bound_at(ellipse_sup(r), r, degree); };
  BoundReport out;
  out.r = golden_section_minimize(objective, 1.0, hi);
  out.C = ellipse_sup(out.r);
  out.sup_bound = sup_bound_at(out.C, out.r, degree);
  out.deriv_bound = deriv_bound(out.C, out.r, degree);
  return out;
}

}  // namespace

ChebBasis::ChebBasis(int degree, double radius) : degree_(degree), radius_(radius) {
  check_degree_radius(degree, radius);
  // Integer Chebyshev recurrence T_{m+1} = 2u T_m - T_{m-1}, built on T
  // then psi_0 rescaled.
  const auto n = static_cast<std::size_t>(degree + 1);
  std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
  t[0][0] = 1.0;
  if (degree >= 1) t[1][1] = 1.0;
  for (int m = 1; m < degree; ++m) {
    for (int j = 0; j <= m + 1; ++j) {
      double v = (j >= 1 ? 2.0 * t[m][j - 1] : 0.0);
      if (j <= m - 1) v -= t[m - 1][j];
      t[m + 1][j] = v;
    }
  }
  alpha_.assign(n * (n + 1) / 2, 0.0);
  for (int m = 0; m <= degree; ++m) {
    for (int j = 0; j <= m; ++j) alpha_[index(m, j)] = t[m][j];
  }
  alpha_[index(0, 0)] = 1.0 / std::numbers::sqrt2;
}

double ChebBasis::eval(int m, double s) const {
  const double u = s / radius_;
  if (m == 0) return 1.0 / std::numbers::sqrt2;
  double prev = 1.0;
  double cur = u;
  for (int k = 1; k < m; ++k) {
    const double next = 2.0 * u * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double ChebBasis::integrate(const ScalarFn& f, double radius, int nodes) {
  double acc = 0.0;
  for (int j = 0; j < nodes; ++j) {
    const double u = std::cos((j + 0.5) * std::numbers::pi / nodes);
    acc += f(radius * u);
  }
  return 2.0 * acc / nodes;
}

int ChebBasis::quadrature_nodes(int degree) { return std::max(64, 4 * degree + 1); }

PolyApprox fit_chebyshev(const ScalarFn& phi, int degree, double radius) {
  const ChebBasis basis(degree, radius);
  const int nodes = ChebBasis::quadrature_nodes(degree);

  std::vector<double> u(nodes);
  std::vector<double> fu(nodes);
  for (int j = 0; j < nodes; ++j) {
    u[j] = std::cos((j + 0.5) * std::numbers::pi / nodes);
    fu[j] = phi(radius * u[j]);
    if (!std::isfinite(fu[j])) {
      throw InvalidArgument("mapping function is not finite at quadrature node s = " +
                            std::to_string(radius * u[j]));
    }
  }

  PolyApprox out;
  out.degree = degree;
  out.radius = radius;
  out.c.assign(degree + 1, 0.0);
  for (int j = 0; j < nodes; ++j) {
    // psi_m(u_j) = cos(m theta_j) for m >= 1
    const double theta = (j + 0.5) * std::numbers::pi / nodes;
    out.c[0] += fu[j] / std::numbers::sqrt2;
    for (int m = 1; m <= degree; ++m) out.c[m] += fu[j] * std::cos(m * theta);
  }
  for (double& cm : out.c) cm *= 2.0 / nodes;

  out.b.assign(degree + 1, 0.0);
  double scale = 1.0;
  for (int m = 0; m <= degree; ++m) {
    double bm = 0.0;
    for (int k = m; k <= degree; ++k) bm += basis.alpha(k, m) * out.c[k];
    out.b[m] = bm / scale;
    scale *= radius;
  }
  out.sup_err_est = grid_sup_error(phi, out);
  return out;
}

double eval_poly(std::span<const double> b, double s) {
  double acc = 0.0;
  for (auto it = b.rbegin(); it != b.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double eval_poly_derivative(std::span<const double> b, double s) {
  double acc = 0.0;
  for (std::size_t m = b.size(); m-- > 1;) acc = acc * s + static_cast<double>(m) * b[m];
  return acc;
}

double eval_poly_second_derivative(std::span<const double> b, double s) {
  double acc = 0.0;
  for (std::size_t m = b.size(); m-- > 2;) {
    acc = acc * s + static_cast<double>(m * (m - 1)) * b[m];
  }
  return acc;
}

double grid_sup_error(const ScalarFn& phi, const PolyApprox& p, int points) {
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double s = -p.radius + 2.0 * p.radius * i / (points - 1);
    worst = std::max(worst, std::abs(phi(s) - eval_poly(p.b, s)));
  }
  return worst;
}

double grid_sup_derivative_error(const ScalarFn& dphi, const PolyApprox& p, int points) {
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double s = -p.radius + 2.0 * p.radius * i / (points - 1);
    worst = std::max(worst, std::abs(dphi(s) - eval_poly_derivative(p.b, s)));
  }
  return worst * p.radius;
}

double grid_min_second_derivative(const PolyApprox& p, int points) {
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double s = -p.radius + 2.0 * p.radius * i / (points - 1);
    lo = std::min(lo, eval_poly_second_derivative(p.b, s));
  }
  return lo;
}

double deriv_bound(double C, double r, int degree) {
  if (!(r > 1.0)) throw InvalidArgument("deriv_bound requires r > 1");
  const double M = degree;
  const double bracket = M * M * r * (r + 1.0) + M * (2.0 * r * r + r + 1.0) + r * (r + 1.0);
  return C * std::pow(r, -M) * (r + 1.0) / std::pow(r - 1.0, 4) * bracket;
}

double sup_bound_at(double C, double r, int degree) {
  return C / ((r - 1.0) * std::pow(r, degree));
}

double logit_ellipse_sup(double r, double radius) {
  // |phi| peaks on E_r at z = i (r - 1/r)/2.
  const std::complex<double> w(0.0, -0.5 * radius * (r - 1.0 / r));
  return std::abs(std::log(1.0 + std::exp(w)));
}

double exp_ellipse_sup(double r, double radius) {
  return std::exp(0.5 * radius * (r + 1.0 / r));
}

double shuber_ellipse_sup(double r, double radius, double b_scale) {
  const double z = radius * (r * r + 1.0) / (2.0 * r * b_scale);
  return b_scale * b_scale * std::sqrt(1.0 + z * z) - b_scale * b_scale;
}

BoundReport sup_bound_logit(double radius, int degree) {
  check_degree_radius(degree, radius);
  const double q = std::numbers::pi / radius;
  const double hi = q + std::sqrt(q * q + 1.0);
  return minimize_bound([radius](double r) { return logit_ellipse_sup(r, radius); }, hi,
                        degree);
}

BoundReport sup_bound_exp(double radius, int degree) {
  check_degree_radius(degree, radius);
  // The objective grows without bound as r -> infinity; its minimizer sits
  // near 2M/R, well inside this cap.
  const double hi = 4.0 * (degree + 1) / radius + 4.0;
  return minimize_bound([radius](double r) { return exp_ellipse_sup(r, radius); }, hi,
                        degree);
}

BoundReport sup_bound_shuber(double radius, int degree, double b_scale) {
  check_degree_radius(degree, radius);
  if (!(b_scale > 0.0)) throw InvalidArgument("smoothed Huber scale must be positive");
  const double q = b_scale / radius;
  const double hi = q + std::sqrt(q * q + 1.0);
  return minimize_bound(
      [radius, b_scale](double r) { return shuber_ellipse_sup(r, radius, b_scale); }, hi,
      degree);
}

double golden_section_minimize(const ScalarFn& f, double lo, double hi, double rel_tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while ((b - a) > rel_tol * std::max(std::abs(c), std::abs(d))) {
    if (!(fd < fc)) {  // ties (and NaN at the right) keep the left bracket
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

}  // namespace passglm
