#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace rfob {

/// Real polynomial, coefficients in descending powers of s. Exact leading
/// zeros are stripped on construction; the zero polynomial has degree -1.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::initializer_list<double> descending) : c_(descending) { strip(); }
  explicit Polynomial(std::vector<double> descending) : c_(std::move(descending)) { strip(); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<double>& coeffs() const { return c_; }
  double leading() const { return c_.empty() ? 0.0 : c_.front(); }

  /// Coefficient of s^power (zero outside the stored range).
  double coeff(int power) const {
    const int idx = degree() - power;
    return (power < 0 || idx < 0) ? 0.0 : c_[static_cast<std::size_t>(idx)];
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  template <typename T>
  T operator()(T s) const {
    T acc{0};
    for (double v : c_) acc = acc * s + v;
    return acc;
  }

  Polynomial derivative() const {
    std::vector<double> d;
    for (int i = 0; i < degree(); ++i) d.push_back(c_[static_cast<std::size_t>(i)] * (degree() - i));
    return Polynomial(std::move(d));
  }

  Polynomial monic() const {
    if (c_.empty()) throw std::domain_error("Polynomial: zero polynomial has no monic form");
    std::vector<double> out(c_);
    const double lead = c_.front();
    for (double& v : out) v /= lead;
    out.front() = 1.0;
    return Polynomial(std::move(out));
  }

  /// Drop leading coefficients that are negligible relative to the largest one.
  Polynomial trimmed(double rel_tol) const {
    const double scale = max_abs();
    std::size_t first = 0;
    while (first < c_.size() && std::abs(c_[first]) <= rel_tol * scale) ++first;
    return Polynomial(std::vector<double>(c_.begin() + static_cast<std::ptrdiff_t>(first), c_.end()));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    const int n = std::max(a.degree(), b.degree());
    std::vector<double> out(static_cast<std::size_t>(n + 1), 0.0);
    for (int p = 0; p <= n; ++p) out[static_cast<std::size_t>(n - p)] = a.coeff(p) + b.coeff(p);
    return Polynomial(std::move(out));
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<double> out(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(out));
  }

  friend Polynomial operator*(double k, const Polynomial& a) {
    std::vector<double> out(a.c_);
    for (double& v : out) v *= k;
    return Polynomial(std::move(out));
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void strip() {
    auto it = std::find_if(c_.begin(), c_.end(), [](double v) { return v != 0.0; });
    c_.erase(c_.begin(), it);
  }

  std::vector<double> c_;
};

/// Largest coefficientwise relative difference, scaled by the larger magnitude
/// of each coefficient pair (floored at `floor` to keep zero entries meaningful).
inline double max_relative_coeff_error(const Polynomial& a, const Polynomial& b,
                                       double floor = 1e-300) {
  const int n = std::max(a.degree(), b.degree());
  double worst = 0.0;
  for (int p = 0; p <= n; ++p) {
    const double x = a.coeff(p), y = b.coeff(p);
    const double scale = std::max({std::abs(x), std::abs(y), floor});
    worst = std::max(worst, std::abs(x - y) / scale);
  }
  return worst;
}

struct RationalTf {
  Polynomial num;
  Polynomial den;

  int relative_degree() const { return den.degree() - num.degree(); }

  std::complex<double> operator()(std::complex<double> s) const { return num(s) / den(s); }

  /// Unity-feedback closed loop L / (1 + L).
  RationalTf closed_loop() const { return {num, den + num}; }
};

}  // namespace rfob
