#include "patchsim/layout.hpp"

namespace patchsim {

std::vector<std::string> StateLayout::column_names() const {
  std::vector<std::string> names;
  names.reserve(size());
  for (std::size_t i = 0; i < n_; ++i) names.push_back("N_" + std::to_string(i));
  for (std::size_t i = 0; i < n_; ++i) names.push_back("A_" + std::to_string(i));
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (i != j) names.push_back("A_" + std::to_string(i) + "_" + std::to_string(j));
    }
  }
  return names;
}

FlatState flatten(const SystemState& s) {
  const std::size_t n = s.size();
  const StateLayout layout(n);
  FlatState flat(layout.size());
  for (std::size_t i = 0; i < n; ++i) {
    flat[layout.population(i)] = static_cast<double>(s.population[i]);
    flat[layout.base_age(i)] = s.base_age[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) flat[layout.patch_age(i, j)] = s.patch_age(i, j);
    }
  }
  return flat;
}

}  // namespace patchsim
