#pragma once

// Flat real-valued state layout shared by the mean-field integrator, ensemble
// means and the CSV trajectory files:
//   N_0..N_{n-1}, A_0..A_{n-1}, A_i_j for i != j in row-major (source, holder) order.

#include <cstddef>
#include <string>
#include <vector>

#include "patchsim/model.hpp"

namespace patchsim {

class StateLayout {
 public:
  explicit StateLayout(std::size_t n_patches) : n_(n_patches) {}

  std::size_t patches() const { return n_; }
  std::size_t size() const { return 2 * n_ + n_ * (n_ - (n_ > 0 ? 1 : 0)); }

  std::size_t population(PatchIndex i) const { return i; }
  std::size_t base_age(PatchIndex i) const { return n_ + i; }
  /// Index of A_{source,holder}; source != holder.
  std::size_t patch_age(PatchIndex source, PatchIndex holder) const {
    return 2 * n_ + source * (n_ - 1) + (holder < source ? holder : holder - 1);
  }

  /// Column names without the leading "t".
  std::vector<std::string> column_names() const;

 private:
  std::size_t n_;
};

using FlatState = std::vector<double>;

FlatState flatten(const SystemState& state);

/// Real-valued trajectory: one flat state per sample time.
struct RealTrajectory {
  std::size_t n_patches = 0;
  std::vector<double> times;
  std::vector<FlatState> states;

  StateLayout layout() const { return StateLayout(n_patches); }
};

}  // namespace patchsim
