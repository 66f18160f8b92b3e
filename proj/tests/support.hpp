#pragma once

#include <random>

#include "spincat/spin_algebra.hpp"

namespace spincat::testing {

inline Operator random_hermitian(int d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Operator a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = Complex(n(rng), n(rng));
  }
  return 0.5 * (a + a.adjoint());
}

inline Ket random_ket(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Ket k(d);
  for (int i = 0; i < d; ++i) k(i) = Complex(n(rng), n(rng));
  return k.normalized();
}

inline Operator random_density(int d, int rank, std::mt19937_64& rng) {
  Operator rho = Operator::Zero(d, d);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  double total = 0.0;
  for (int r = 0; r < rank; ++r) {
    const Ket k = random_ket(d, rng);
    const double w = u(rng);
    rho += w * k * k.adjoint();
    total += w;
  }
  return rho / total;
}

inline double variance(const SpinState& s, const Operator& g) {
  const double mean = s.expectation(g);
  return s.expectation(g * g) - mean * mean;
}

}  // namespace spincat::testing
