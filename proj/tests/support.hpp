#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "flatbez/flatbez.hpp"

namespace flatbez::test {

inline std::string source_path(const std::string& rel) { return std::string(FLATBEZ_SOURCE_DIR) + "/" + rel; }

/// Direct Bernstein sum, independent of de Casteljau.
inline double bernstein_sum(const std::vector<double>& c, double tau) {
  const int n = static_cast<int>(c.size()) - 1;
  double s = 0.0;
  for (int j = 0; j <= n; ++j)
    s += static_cast<double>(binomial(n, j)) * std::pow(1.0 - tau, n - j) * std::pow(tau, j) * c[static_cast<std::size_t>(j)];
  return s;
}

inline Rational bernstein_sum(const std::vector<Rational>& c, const Rational& tau) {
  const int n = static_cast<int>(c.size()) - 1;
  Rational s = 0;
  for (int j = 0; j <= n; ++j) {
    Rational term = Rational(binomial(n, j)) * c[static_cast<std::size_t>(j)];
    for (int k = 0; k < n - j; ++k) term *= Rational(1 - tau);
    for (int k = 0; k < j; ++k) term *= tau;
    s += term;
  }
  return s;
}

inline std::vector<double> random_points(std::mt19937_64& rng, int degree, double lo = -5.0, double hi = 5.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> c(static_cast<std::size_t>(degree + 1));
  for (auto& x : c) x = d(rng);
  return c;
}

inline std::vector<Rational> random_rationals(std::mt19937_64& rng, int degree) {
  std::uniform_int_distribution<int> num(-50, 50), den(1, 12);
  std::vector<Rational> c;
  for (int j = 0; j <= degree; ++j) c.emplace_back(num(rng), den(rng));
  for (auto& q : c) q.canonicalize();
  return c;
}

inline std::vector<double> grid(std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  return t;
}

}  // namespace flatbez::test
