// Independent reference implementations used only by tests. Each oracle
// deliberately takes a different algorithmic route than the library code it
// checks: quadrature instead of continued fractions, normal equations
// instead of QR, Durand-Kerner instead of companion-matrix eigenvalues.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature
// ---------------------------------------------------------------------------

inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb, double whole,
                          double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-13) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

// Two-sided t tail probability by quadrature of the density over
// (|t|, inf), mapped to (0,1) via x = t + u/(1-u).
inline double t_tail_two_sided(double t, double df) {
  const double at = std::fabs(t);
  if (at == 0.0) return 1.0;
  const double log_norm = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                          0.5 * std::log(df * 3.14159265358979323846);
  auto pdf = [&](double x) {
    return std::exp(log_norm - (df + 1.0) / 2.0 * std::log1p(x * x / df));
  };
  auto mapped = [&](double u) {
    if (u >= 1.0) return 0.0;
    const double x = at + u / (1.0 - u);
    const double jac = 1.0 / ((1.0 - u) * (1.0 - u));
    return pdf(x) * jac;
  };
  return 2.0 * integrate(mapped, 0.0, 1.0);
}

// Upper F tail probability by quadrature over (f, inf).
inline double f_tail_upper(double f, double d1, double d2) {
  if (f <= 0.0) return 1.0;
  const double log_norm = std::lgamma((d1 + d2) / 2.0) - std::lgamma(d1 / 2.0) -
                          std::lgamma(d2 / 2.0) + (d1 / 2.0) * std::log(d1 / d2);
  auto pdf = [&](double x) {
    if (x <= 0.0) return 0.0;
    return std::exp(log_norm + (d1 / 2.0 - 1.0) * std::log(x) -
                    (d1 + d2) / 2.0 * std::log1p(d1 * x / d2));
  };
  auto mapped = [&](double u) {
    if (u >= 1.0) return 0.0;
    const double x = f + u / (1.0 - u);
    const double jac = 1.0 / ((1.0 - u) * (1.0 - u));
    return pdf(x) * jac;
  };
  return integrate(mapped, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// OLS by normal equations (LDLT on X'X)
// ---------------------------------------------------------------------------

inline Eigen::VectorXd ols_normal_equations(const Eigen::MatrixXd& x,
                                            const Eigen::VectorXd& y) {
  return (x.transpose() * x).ldlt().solve(x.transpose() * y);
}

// ---------------------------------------------------------------------------
// Durand-Kerner root finding for monic polynomials
// coeffs: c0 z^n + c1 z^(n-1) + ... + cn with c0 == 1.
// ---------------------------------------------------------------------------

inline std::vector<std::complex<double>> durand_kerner(std::vector<double> coeffs) {
  if (coeffs.empty() || coeffs[0] != 1.0)
    throw std::invalid_argument("durand_kerner: polynomial must be monic");
  const std::size_t n = coeffs.size() - 1;
  auto eval = [&](std::complex<double> z) {
    std::complex<double> v = 0.0;
    for (double c : coeffs) v = v * z + c;
    return v;
  };
  std::vector<std::complex<double>> roots(n);
  const std::complex<double> seed(0.4, 0.9);  // conventional non-real start
  std::complex<double> acc = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc *= seed;
    roots[i] = acc;
  }
  for (int iter = 0; iter < 500; ++iter) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::complex<double> denom = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) denom *= roots[i] - roots[j];
      const std::complex<double> delta = eval(roots[i]) / denom;
      roots[i] -= delta;
      worst = std::max(worst, std::abs(delta));
    }
    if (worst < 1e-14) break;
  }
  return roots;
}

// ---------------------------------------------------------------------------
// Shoelace triangle area over (quantity, price) vertices
// ---------------------------------------------------------------------------

inline double shoelace(double qa, double pa, double qb, double pb, double qc,
                       double pc) {
  return 0.5 * std::fabs(qa * (pb - pc) + qb * (pc - pa) + qc * (pa - pb));
}

// ---------------------------------------------------------------------------
// Direct-summation central moments (population convention)
// ---------------------------------------------------------------------------

struct Moments {
  double mean, var, skew, kurt;
};

inline Moments brute_moments(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  return {mean, m2, m3 / std::pow(m2, 1.5), m4 / (m2 * m2)};
}

}  // namespace oracle
