#pragma once

#include <ostream>
#include <stdexcept>
#include <cstdint>

#include "patchsim/metrics.hpp"
#include "patchsim/model.hpp"
#include "patchsim/rng.hpp"

namespace testing {

using namespace patchsim;

inline SystemState blank_state(std::size_t n) {
  SystemState s;
  s.population.assign(n, 0);
  s.base_age.assign(n, 0.0);
  s.patch_age = SquareMatrix<double>(n, 0.0);
  return s;
}

/// Ages uniform on [0, max_age), populations uniform on [0, max_count].
inline SystemState random_state(std::size_t n, Rng& rng, double max_age = 10.0, Count max_count = 8) {
  SystemState s = blank_state(n);
  s.t = uniform_real(rng, 0.0, 100.0);
  for (std::size_t i = 0; i < n; ++i) {
    s.population[i] = static_cast<Count>(uniform_index(rng, static_cast<std::uint64_t>(max_count) + 1));
    s.base_age[i] = uniform_real(rng, 0.0, max_age);
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) s.patch_age(i, j) = uniform_real(rng, 0.0, max_age);
    }
  }
  return s;
}

inline RateParameters random_rates(std::size_t n, Rng& rng, double scale = 1.0) {
  RateParameters r = RateParameters::zeros(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.alpha[i] = scale * uniform01(rng);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      r.gamma(i, j) = scale * uniform01(rng);
      if (j > i) r.beta(i, j) = r.beta(j, i) = scale * uniform01(rng);
    }
  }
  return r;
}

inline PatchModel make_model(RateParameters rates, std::vector<Count> population, double initial_age = 0.0) {
  PatchModel m;
  m.n_patches = rates.size();
  m.rates = std::move(rates);
  m.initial_population = std::move(population);
  m.initial_age = initial_age;
  return m;
}

/// n = 1, alpha = 0.1, N = 50: resets at 5 per day.
inline PatchModel single_patch_model() {
  RateParameters r = RateParameters::zeros(1);
  r.alpha[0] = 0.1;
  return make_model(r, {50});
}

/// Every age <= the other's corresponding age.
inline bool ages_not_above(const SystemState& a, const SystemState& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.base_age[i] > b.base_age[i]) return false;
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (a.patch_age(i, j) > b.patch_age(i, j)) return false;
    }
  }
  return true;
}

}  // namespace testing
