#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace rfob {

using cdouble = std::complex<double>;

/// Roots of a*x + b.
inline std::vector<cdouble> solve_linear(double a, double b) {
  if (a == 0.0) throw std::invalid_argument("solve_linear: leading coefficient is zero");
  return {cdouble(-b / a, 0.0)};
}

/// Roots of a*x^2 + b*x + c, using the cancellation-free form for real roots.
inline std::vector<cdouble> solve_quadratic(double a, double b, double c) {
  if (a == 0.0) throw std::invalid_argument("solve_quadratic: leading coefficient is zero");
  const double disc = b * b - 4.0 * a * c;
  if (disc >= 0.0) {
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    if (q == 0.0) return {cdouble(0.0), cdouble(0.0)};
    std::vector<cdouble> r{cdouble(q / a), cdouble(c / q)};
    std::sort(r.begin(), r.end(), [](cdouble x, cdouble y) { return x.real() < y.real(); });
    return r;
  }
  const double re = -b / (2.0 * a);
  const double im = std::sqrt(-disc) / (2.0 * std::abs(a));
  return {cdouble(re, -im), cdouble(re, im)};
}

struct CubicSolution {
  std::array<cdouble, 3> roots{};
  double discriminant = 0.0;  // 18abcd - 4b^3 d + b^2 c^2 - 4 a c^3 - 27 a^2 d^2
  bool three_real = false;    // discriminant >= 0
};

namespace detail {

inline cdouble cubic_eval(double a3, double a2, double a1, double a0, cdouble x) {
  return ((a3 * x + a2) * x + a1) * x + a0;
}

inline cdouble cubic_polish(double a3, double a2, double a1, double a0, cdouble x) {
  for (int it = 0; it < 4; ++it) {
    const cdouble f = cubic_eval(a3, a2, a1, a0, x);
    const cdouble df = (3.0 * a3 * x + 2.0 * a2) * x + a1;
    if (f == 0.0 || df == 0.0) break;
    const cdouble next = x - f / df;
    if (!(std::abs(cubic_eval(a3, a2, a1, a0, next)) < std::abs(f))) break;
    x = next;
  }
  return x;
}

}  // namespace detail

/// Closed-form cubic roots:
///   D0 = a2^2 - 3 a3 a1,  D1 = 2 a2^3 - 9 a3 a2 a1 + 27 a3^2 a0,
///   G  = cbrt((D1 + sqrt(D1^2 - 4 D0^3)) / 2),
///   x_k = -(a2 + u^k G + D0 / (u^k G)) / (3 a3),  u = (-1 + i sqrt 3) / 2,
/// followed by a guarded Newton polish. Real roots come back with zero
/// imaginary part and complex roots as an exact conjugate pair. Roots are
/// sorted by real part, then imaginary part.
inline CubicSolution solve_cubic(double a3, double a2, double a1, double a0) {
  if (a3 == 0.0) throw std::invalid_argument("solve_cubic: a3 is zero, use the quadratic path");

  CubicSolution out;
  out.discriminant = 18.0 * a3 * a2 * a1 * a0 - 4.0 * a2 * a2 * a2 * a0 + a2 * a2 * a1 * a1 -
                     4.0 * a3 * a1 * a1 * a1 - 27.0 * a3 * a3 * a0 * a0;
  out.three_real = out.discriminant >= 0.0;

  const double d0 = a2 * a2 - 3.0 * a3 * a1;
  const double d1 = 2.0 * a2 * a2 * a2 - 9.0 * a3 * a2 * a1 + 27.0 * a3 * a3 * a0;
  const cdouble root_term = std::sqrt(cdouble(d1 * d1 - 4.0 * d0 * d0 * d0));

  // Pick the sign that avoids cancellation; the other choice gives the
  // conjugate expression and the same root set.
  cdouble inner = 0.5 * (d1 + root_term);
  const cdouble alt = 0.5 * (d1 - root_term);
  if (std::abs(alt) > std::abs(inner)) inner = alt;

  const cdouble unit(-0.5, std::sqrt(3.0) / 2.0);
  if (std::abs(inner) == 0.0) {
    // D0 = D1 = 0: triple root.
    const double r = -a2 / (3.0 * a3);
    out.roots = {cdouble(r), cdouble(r), cdouble(r)};
    return out;
  }
  if (out.discriminant == 0.0 && d0 != 0.0) {
    // Double root and simple root in closed form; Cardano keeps only half the
    // digits of a double root.
    const double dbl = (9.0 * a3 * a0 - a2 * a1) / (2.0 * d0);
    const double single = (4.0 * a3 * a2 * a1 - 9.0 * a3 * a3 * a0 - a2 * a2 * a2) / (a3 * d0);
    out.roots = {cdouble(dbl), cdouble(dbl), cdouble(single)};
    std::sort(out.roots.begin(), out.roots.end(),
              [](cdouble x, cdouble y) { return x.real() < y.real(); });
    return out;
  }
  const cdouble gamma = std::pow(inner, 1.0 / 3.0);
  std::array<cdouble, 3> cardano{};
  cdouble rot(1.0, 0.0);
  for (auto& root : cardano) {
    const cdouble g = rot * gamma;
    root = detail::cubic_polish(a3, a2, a1, a0, -(a2 + g + d0 / g) / (3.0 * a3));
    rot *= unit;
  }

  // Cardano is accurate only for the largest roots when magnitudes are far
  // apart. Keep one real root and recover the other two from the deflated
  // quadratic: backward deflation for the largest root, forward otherwise.
  std::size_t pick = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    const bool better = out.three_real ? std::abs(cardano[i]) > std::abs(cardano[pick])
                                       : std::abs(cardano[i].imag()) < std::abs(cardano[pick].imag());
    if (better) pick = i;
  }
  const double r = cardano[pick].real();
  double largest = 0.0;
  for (const auto& c : cardano) largest = std::max(largest, std::abs(c));
  double b2, b1, b0;
  if (r != 0.0 && std::abs(r) >= largest) {
    b0 = -a0 / r;
    b1 = (b0 - a1) / r;
    b2 = (b1 - a2) / r;
  } else {
    b2 = a3;
    b1 = a2 + r * b2;
    b0 = a1 + r * b1;
  }
  out.roots[0] = cdouble(r, 0.0);
  if (b2 != 0.0) {
    const auto q = solve_quadratic(b2, b1, b0);
    out.roots[1] = detail::cubic_polish(a3, a2, a1, a0, q[0]);
    out.roots[2] = detail::cubic_polish(a3, a2, a1, a0, q[1]);
  } else {
    out.roots[1] = cardano[(pick + 1) % 3];
    out.roots[2] = cardano[(pick + 2) % 3];
  }

  if (out.three_real) {
    for (auto& r : out.roots) r = cdouble(r.real(), 0.0);
  } else {
    // One real root (smallest |imag|) and a conjugate pair.
    std::sort(out.roots.begin(), out.roots.end(),
              [](cdouble x, cdouble y) { return std::abs(x.imag()) < std::abs(y.imag()); });
    out.roots[0] = cdouble(out.roots[0].real(), 0.0);
    const double re = 0.5 * (out.roots[1].real() + out.roots[2].real());
    const double im = 0.5 * (std::abs(out.roots[1].imag()) + std::abs(out.roots[2].imag()));
    out.roots[1] = cdouble(re, -im);
    out.roots[2] = cdouble(re, im);
  }
  std::sort(out.roots.begin(), out.roots.end(), [](cdouble x, cdouble y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return out;
}

/// Real roots of a cubic, ascending.
inline std::vector<double> real_roots(const CubicSolution& sol) {
  std::vector<double> out;
  for (const auto& r : sol.roots)
    if (r.imag() == 0.0) out.push_back(r.real());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rfob
