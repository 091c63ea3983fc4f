#pragma once

// Mean-field (fluid) counterpart of the patch model.
//
// Every variable's evolution is described by a list of entries (the
// "evolution matrix"): which event or flow touches it, how, and at what rate.
// Folding the entries with  dx/dt = sum(rate * (post-reset - pre-reset))
// gives the ODE right-hand side. A directly coded right-hand side is kept
// alongside so the two constructions can be checked against each other.

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "patchsim/layout.hpp"
#include "patchsim/model.hpp"

namespace patchsim::meanfield {

enum class VariableKind { population, base_age, patch_age };

struct VariableRef {
  VariableKind kind = VariableKind::population;
  PatchIndex i = 0;  ///< patch, or source for patch_age
  PatchIndex j = 0;  ///< holder for patch_age, 0 otherwise

  std::size_t index(const StateLayout& layout) const;
  std::string name() const;
  bool operator==(const VariableRef&) const = default;
};

enum class InfluenceKind { constant_drift, zero_reset, min_reset, increment, decrement };

/// Symbolic rate: 1 for flows, alpha_i N_i, beta_ij N_i N_j or gamma_ij N_i.
struct RateExpr {
  enum class Kind { unit, base_contact, peer_contact, patch_move } kind = Kind::unit;
  PatchIndex i = 0;
  PatchIndex j = 0;

  double evaluate(std::span<const double> state, const StateLayout& layout,
                  const RateParameters& rates) const;
  std::string describe() const;
};

struct EvolutionEntry {
  VariableRef variable;
  InfluenceKind influence = InfluenceKind::constant_drift;
  double drift = 0.0;         ///< constant_drift only
  VariableRef partner;        ///< min_reset only
  RateExpr rate;
};

/// (|x| + x) / 2.
inline double relu(double x) { return (std::abs(x) + x) / 2.0; }

std::vector<EvolutionEntry> build_evolution_matrices(std::size_t n_patches);
inline std::vector<EvolutionEntry> build_evolution_matrices(const PatchModel& model) {
  return build_evolution_matrices(model.n_patches);
}

/// Entries whose target is `variable`.
std::vector<EvolutionEntry> entries_for(std::span<const EvolutionEntry> entries,
                                        const VariableRef& variable);

/// Directly coded ODE right-hand side.
FlatState rhs(std::span<const double> state, const RateParameters& rates);

/// Right-hand side obtained by folding the evolution entries.
FlatState folded_rhs(std::span<const EvolutionEntry> entries, std::span<const double> state,
                     const RateParameters& rates);

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed-step classical RK4 from the model's initial state (population taken
/// as reals). Output at `sample_times` (sorted, within [0, horizon]); a step
/// is shortened to land on a sample time when the grid is not a multiple of
/// `step`. Throws IntegrationError on a non-finite derivative.
RealTrajectory integrate(const PatchModel& model, double horizon, double step,
                         std::span<const double> sample_times);

/// As above with an explicit real-valued initial population.
RealTrajectory integrate(const PatchModel& model, std::span<const double> initial_population,
                         double horizon, double step, std::span<const double> sample_times);

/// Flat initial state: population as given, ages at model.initial_age.
FlatState initial_state(const PatchModel& model, std::span<const double> initial_population);

/// Largest per-variable decay rate of the reset terms at the given state; the
/// RK4 real-axis stability limit is step * rate < ~2.78.
double stiffness_bound(std::span<const double> state, const RateParameters& rates);

}  // namespace patchsim::meanfield
