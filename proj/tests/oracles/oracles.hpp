#pragma once

// Test-only reference computations. Nothing here calls into the library's
// solver paths: Bessel functions come from Boost.Math, the grating oracle
// integrates the coupled-mode equations directly, and the glass index is a
// separate hand evaluation of the Malitson formula.

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>

namespace oracle {

inline constexpr double c0 = 299792458.0;
inline constexpr double pi = 3.14159265358979323846;

/// Fused silica, lambda in metres.
inline double silica_index(double lambda) {
  const double l2 = lambda * 1e6 * lambda * 1e6;
  const double n2 = 1.0 + 0.6961663 * l2 / (l2 - 0.0684043 * 0.0684043) +
                    0.4079426 * l2 / (l2 - 0.1162414 * 0.1162414) +
                    0.8974794 * l2 / (l2 - 9.896161 * 9.896161);
  return std::sqrt(n2);
}

/// Material dispersion -(lambda/c) n'' in ps/(km nm), n'' by a 5-point stencil
/// on the index itself.
inline double silica_material_dispersion(double lambda, double h = 1e-9) {
  const double n2 = (-silica_index(lambda + 2 * h) + 16 * silica_index(lambda + h) - 30 * silica_index(lambda) +
                     16 * silica_index(lambda - h) - silica_index(lambda - 2 * h)) /
                    (12 * h * h);
  return -lambda / c0 * n2 * 1e6;
}

template <class F>
double bisect(F f, double lo, double hi, double tol = 1e-16) {
  double flo = f(lo);
  for (int i = 0; i < 400 && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Fundamental root of the two-layer LP01 equation
///   u J1(u) K0(w) - w K1(w) J0(u) = 0,  u = V sqrt(1-b), w = V sqrt(b),
/// returned as n_eff. Core index n_clad (1 + delta).
inline double two_layer_neff(double core_radius, double delta, double lambda) {
  using boost::math::cyl_bessel_j;
  using boost::math::cyl_bessel_k;
  const double n2 = silica_index(lambda);
  const double n1 = n2 * (1.0 + delta);
  const double v = 2.0 * pi / lambda * core_radius * std::sqrt(n1 * n1 - n2 * n2);
  auto f = [&](double b) {
    const double u = v * std::sqrt(1.0 - b), w = v * std::sqrt(b);
    return u * cyl_bessel_j(1, u) * cyl_bessel_k(0, w) - w * cyl_bessel_k(1, w) * cyl_bessel_j(0, u);
  };
  // Largest root in b: scan down from 1.
  const double step = 1e-4;
  double hi = 1.0 - 1e-12;
  double fhi = f(hi);
  for (double lo = hi - step; lo > 1e-12; lo -= step) {
    const double flo = f(lo);
    if ((flo > 0) != (fhi > 0)) {
      const double b = bisect(f, lo, hi, 1e-17);
      return std::sqrt(n2 * n2 + b * (n1 * n1 - n2 * n2));
    }
    hi = lo;
    fhi = flo;
  }
  throw std::runtime_error("two-layer oracle: no guided root");
}

/// Integrates dA/dz = i d A + i k B, dB/dz = -i k A - i d B from z = L
/// (A = 1, B = 0) back to z = 0 with classical RK4; returns |B(0)/A(0)|^2.
inline double coupled_mode_reflectivity(double kappa, double detuning, double length, int steps = 4000) {
  using cd = std::complex<double>;
  const cd i(0.0, 1.0);
  auto rhs = [&](cd a, cd b, cd& da, cd& db) {
    da = i * detuning * a + i * kappa * b;
    db = -i * kappa * a - i * detuning * b;
  };
  cd a = 1.0, b = 0.0;
  const double h = -length / steps;
  for (int s = 0; s < steps; ++s) {
    cd k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
    rhs(a, b, k1a, k1b);
    rhs(a + 0.5 * h * k1a, b + 0.5 * h * k1b, k2a, k2b);
    rhs(a + 0.5 * h * k2a, b + 0.5 * h * k2b, k3a, k3b);
    rhs(a + h * k3a, b + h * k3b, k4a, k4b);
    a += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    b += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
  }
  return std::norm(b / a);
}

/// Least-squares polynomial fit y(x) of the given degree (normal equations,
/// Gaussian elimination). Returns coefficients c0..cdeg.
inline std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
  const int m = degree + 1;
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t k = 0; k < x.size(); ++k) {
    std::vector<double> p(2 * m, 1.0);
    for (int j = 1; j < 2 * m; ++j) p[j] = p[j - 1] * x[k];
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) a[r][c] += p[r + c];
      a[r][m] += p[r] * y[k];
    }
  }
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> coef(m);
  for (int r = 0; r < m; ++r) coef[r] = a[r][m] / a[r][r];
  return coef;
}

}  // namespace oracle
