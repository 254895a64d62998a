#pragma once

#include <random>

#include "pfsi/discretization.hpp"

namespace pfsi::fixtures {

inline Discretization disc(int m, int n_beam, int n_fluid, DomainSpec dom = {}) {
  DiscretizationSpec s;
  s.m = m;
  s.n_beam = n_beam;
  s.n_fluid = n_fluid;
  return make_discretization(dom, s);
}

template <class Field>
void randomize(Field& f, unsigned seed, double amp = 1.0) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> U(-amp, amp);
  for (Eigen::Index k = 0; k < f.coef.size(); ++k) f.coef.data()[k] = U(gen);
}

}  // namespace pfsi::fixtures
