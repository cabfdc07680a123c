#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "flatbez/errors.hpp"

namespace flatbez {

inline constexpr int kMaxDegree = 64;

namespace detail {

using PascalTable = std::array<std::array<std::uint64_t, kMaxDegree + 1>, kMaxDegree + 1>;

constexpr PascalTable make_pascal() {
  PascalTable t{};
  for (int n = 0; n <= kMaxDegree; ++n) {
    t[n][0] = 1;
    for (int k = 1; k <= n; ++k) t[n][k] = t[n - 1][k - 1] + (k <= n - 1 ? t[n - 1][k] : 0);
  }
  return t;
}

inline constexpr PascalTable kPascal = make_pascal();

}  // namespace detail

/// C(n,k) from Pascal's triangle, exact for n ≤ 64 (C(64,32) < 2^64).
inline std::uint64_t binomial(int n, int k) {
  if (n < 0 || n > kMaxDegree)
    throw DomainError("binomial: degree " + std::to_string(n) + " exceeds cap " +
                      std::to_string(kMaxDegree));
  if (k < 0 || k > n) return 0;
  return detail::kPascal[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

}  // namespace flatbez
