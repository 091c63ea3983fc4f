#pragma once

// Patch-model state space and the exact reset semantics of the three event
// families (base contact, peer contact, patch move) plus unit-rate age drift.
//
// Ages are measured in days. Patch ages are stored as an n x n matrix indexed
// [source][holder]: patch_age(i, j) is the age, at patch j, of the freshest
// data originating from patch i. The diagonal is permanently zero.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace patchsim {

using PatchIndex = std::size_t;
using Count = std::int64_t;

/// Dense square matrix, row-major.
template <class T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, T fill = T{}) : n_(n), data_(n * n, fill) {}

  std::size_t size() const { return n_; }
  T& operator()(std::size_t row, std::size_t col) { return data_[row * n_ + col]; }
  const T& operator()(std::size_t row, std::size_t col) const { return data_[row * n_ + col]; }
  std::span<const T> data() const { return data_; }
  std::span<T> data() { return data_; }

  bool operator==(const SquareMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

/// Per-day event rates. alpha[i]: per-zebra base contact rate in patch i.
/// beta(i, j): per-pair peer contact rate (symmetric). gamma(i, j): per-zebra
/// migration rate i -> j. Diagonals of beta and gamma are ignored.
struct RateParameters {
  std::vector<double> alpha;
  SquareMatrix<double> beta;
  SquareMatrix<double> gamma;

  static RateParameters zeros(std::size_t n);

  std::size_t size() const { return alpha.size(); }

  /// Throws std::invalid_argument on negative/non-finite entries, shape
  /// mismatch or asymmetric beta.
  void validate() const;

  bool operator==(const RateParameters&) const = default;
};

struct PatchModel {
  std::size_t n_patches = 0;
  RateParameters rates;
  std::vector<Count> initial_population;
  double initial_age = 0.0;

  Count population() const;
  void validate() const;
};

struct SystemState {
  double t = 0.0;
  std::vector<Count> population;
  std::vector<double> base_age;
  SquareMatrix<double> patch_age;

  /// State at t = 0 with every age set to model.initial_age.
  static SystemState initial(const PatchModel& model);

  std::size_t size() const { return population.size(); }
  Count total_population() const;

  /// Checks shapes, nonnegativity and the zero diagonal.
  void validate() const;

  bool operator==(const SystemState&) const = default;
};

enum class EventKind { base_contact, peer_contact, patch_move };

std::string to_string(EventKind kind);

/// One stochastic event with its rate evaluated at a given population vector.
/// base_contact uses only `i`; peer_contact has i < j; patch_move is i -> j.
struct EventInstance {
  EventKind kind = EventKind::base_contact;
  PatchIndex i = 0;
  PatchIndex j = 0;
  double rate = 0.0;

  bool operator==(const EventInstance&) const = default;
};

std::string describe(const EventInstance& event);

// Value-returning transformations.

SystemState advance_ages(SystemState state, double dt);
SystemState apply_base_contact(SystemState state, PatchIndex i);
SystemState apply_peer_contact(SystemState state, PatchIndex i, PatchIndex j);
SystemState apply_patch_move(SystemState state, PatchIndex from, PatchIndex to);
SystemState apply_event(SystemState state, const EventInstance& event);

// In-place variants used by the simulation loop. Same contracts as above.
namespace inplace {
void advance_ages(SystemState& state, double dt);
void apply_base_contact(SystemState& state, PatchIndex i);
void apply_peer_contact(SystemState& state, PatchIndex i, PatchIndex j);
void apply_patch_move(SystemState& state, PatchIndex from, PatchIndex to);
void apply_event(SystemState& state, const EventInstance& event);
}  // namespace inplace

/// All events with strictly positive rate, in a fixed order: base contacts by
/// i, then peer contacts by (i, j) with i < j, then moves by (i, j), i != j.
/// Rates depend only on the population vector.
std::vector<EventInstance> enumerate_events(std::span<const Count> population,
                                            const RateParameters& rates);
std::vector<EventInstance> enumerate_events(const SystemState& state, const RateParameters& rates);

double total_rate(std::span<const EventInstance> events);

}  // namespace patchsim
