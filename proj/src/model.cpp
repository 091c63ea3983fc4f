#include "patchsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace patchsim {

namespace {

void check_index(PatchIndex i, std::size_t n, const char* what) {
  if (i >= n) {
    throw std::out_of_range(std::string(what) + ": patch index " + std::to_string(i) +
                            " out of range for " + std::to_string(n) + " patches");
  }
}

bool nonnegative_finite(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

RateParameters RateParameters::zeros(std::size_t n) {
  return RateParameters{std::vector<double>(n, 0.0), SquareMatrix<double>(n, 0.0),
                        SquareMatrix<double>(n, 0.0)};
}

void RateParameters::validate() const {
  const std::size_t n = alpha.size();
  if (beta.size() != n || gamma.size() != n) {
    throw std::invalid_argument("rate matrices must be " + std::to_string(n) + "x" +
                                std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!nonnegative_finite(alpha[i])) {
      throw std::invalid_argument("alpha[" + std::to_string(i) + "] must be finite and >= 0");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (!nonnegative_finite(beta(i, j)) || !nonnegative_finite(gamma(i, j))) {
        throw std::invalid_argument("beta/gamma[" + std::to_string(i) + "][" + std::to_string(j) +
                                    "] must be finite and >= 0");
      }
      if (beta(i, j) != beta(j, i)) {
        throw std::invalid_argument("beta must be symmetric (entry " + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      }
    }
  }
}

Count PatchModel::population() const {
  return std::accumulate(initial_population.begin(), initial_population.end(), Count{0});
}

void PatchModel::validate() const {
  if (n_patches < 1) throw std::invalid_argument("model needs at least one patch");
  if (rates.size() != n_patches) {
    throw std::invalid_argument("rate parameters have " + std::to_string(rates.size()) +
                                " patches, model has " + std::to_string(n_patches));
  }
  rates.validate();
  if (initial_population.size() != n_patches) {
    throw std::invalid_argument("initial_population must have one entry per patch");
  }
  for (Count c : initial_population) {
    if (c < 0) throw std::invalid_argument("initial_population entries must be >= 0");
  }
  if (!nonnegative_finite(initial_age)) {
    throw std::invalid_argument("initial_age must be finite and >= 0");
  }
}

SystemState SystemState::initial(const PatchModel& model) {
  model.validate();
  const std::size_t n = model.n_patches;
  SystemState s;
  s.t = 0.0;
  s.population = model.initial_population;
  s.base_age.assign(n, model.initial_age);
  s.patch_age = SquareMatrix<double>(n, model.initial_age);
  for (std::size_t i = 0; i < n; ++i) s.patch_age(i, i) = 0.0;
  return s;
}

Count SystemState::total_population() const {
  return std::accumulate(population.begin(), population.end(), Count{0});
}

void SystemState::validate() const {
  const std::size_t n = population.size();
  if (base_age.size() != n || patch_age.size() != n) {
    throw std::invalid_argument("state vectors have inconsistent sizes");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (population[i] < 0) throw std::invalid_argument("negative population");
    if (!(base_age[i] >= 0.0)) throw std::invalid_argument("negative base age");
    if (patch_age(i, i) != 0.0) throw std::invalid_argument("patch age diagonal must be 0");
    for (std::size_t j = 0; j < n; ++j) {
      if (!(patch_age(i, j) >= 0.0)) throw std::invalid_argument("negative patch age");
    }
  }
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::base_contact: return "BaseContact";
    case EventKind::peer_contact: return "PeerContact";
    case EventKind::patch_move: return "PatchMove";
  }
  return "?";
}

std::string describe(const EventInstance& e) {
  if (e.kind == EventKind::base_contact) return to_string(e.kind) + "(" + std::to_string(e.i) + ")";
  return to_string(e.kind) + "(" + std::to_string(e.i) + "," + std::to_string(e.j) + ")";
}

namespace inplace {

void advance_ages(SystemState& s, double dt) {
  if (!(dt >= 0.0)) throw std::invalid_argument("advance_ages: dt must be >= 0");
  if (dt == 0.0) return;
  const std::size_t n = s.size();
  for (double& a : s.base_age) a += dt;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) s.patch_age(i, j) += dt;
    }
  }
  s.t += dt;
}

void apply_base_contact(SystemState& s, PatchIndex i) {
  const std::size_t n = s.size();
  check_index(i, n, "apply_base_contact");
  s.base_age[i] = 0.0;
  // Patch i relays what it holds about every other patch.
  for (std::size_t src = 0; src < n; ++src) {
    if (src != i) s.base_age[src] = std::min(s.patch_age(src, i), s.base_age[src]);
  }
}

void apply_peer_contact(SystemState& s, PatchIndex i, PatchIndex j) {
  const std::size_t n = s.size();
  check_index(i, n, "apply_peer_contact");
  check_index(j, n, "apply_peer_contact");
  if (i == j) throw std::invalid_argument("apply_peer_contact: i and j must differ");
  s.patch_age(j, i) = 0.0;
  s.patch_age(i, j) = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == i || k == j) continue;
    const double fresher = std::min(s.patch_age(k, i), s.patch_age(k, j));
    s.patch_age(k, i) = fresher;
    s.patch_age(k, j) = fresher;
  }
}

void apply_patch_move(SystemState& s, PatchIndex from, PatchIndex to) {
  const std::size_t n = s.size();
  check_index(from, n, "apply_patch_move");
  check_index(to, n, "apply_patch_move");
  if (from == to) throw std::invalid_argument("apply_patch_move: source and target must differ");
  if (s.population[from] < 1) {
    throw std::logic_error("apply_patch_move: patch " + std::to_string(from) + " is empty");
  }
  --s.population[from];
  ++s.population[to];
  s.patch_age(from, to) = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == from || k == to) continue;
    s.patch_age(k, to) = std::min(s.patch_age(k, to), s.patch_age(k, from));
  }
}

void apply_event(SystemState& s, const EventInstance& e) {
  switch (e.kind) {
    case EventKind::base_contact: inplace::apply_base_contact(s, e.i); return;
    case EventKind::peer_contact: inplace::apply_peer_contact(s, e.i, e.j); return;
    case EventKind::patch_move: inplace::apply_patch_move(s, e.i, e.j); return;
  }
}

}  // namespace inplace

SystemState advance_ages(SystemState s, double dt) {
  inplace::advance_ages(s, dt);
  return s;
}

SystemState apply_base_contact(SystemState s, PatchIndex i) {
  inplace::apply_base_contact(s, i);
  return s;
}

SystemState apply_peer_contact(SystemState s, PatchIndex i, PatchIndex j) {
  inplace::apply_peer_contact(s, i, j);
  return s;
}

SystemState apply_patch_move(SystemState s, PatchIndex from, PatchIndex to) {
  inplace::apply_patch_move(s, from, to);
  return s;
}

SystemState apply_event(SystemState s, const EventInstance& e) {
  inplace::apply_event(s, e);
  return s;
}

std::vector<EventInstance> enumerate_events(std::span<const Count> population,
                                            const RateParameters& rates) {
  const std::size_t n = population.size();
  if (rates.size() != n) throw std::invalid_argument("enumerate_events: size mismatch");
  std::vector<EventInstance> events;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rates.alpha[i] * static_cast<double>(population[i]);
    if (r > 0.0) events.push_back({EventKind::base_contact, i, i, r});
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r = rates.beta(i, j) * static_cast<double>(population[i]) *
                       static_cast<double>(population[j]);
      if (r > 0.0) events.push_back({EventKind::peer_contact, i, j, r});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (population[i] == 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double r = rates.gamma(i, j) * static_cast<double>(population[i]);
      if (r > 0.0) events.push_back({EventKind::patch_move, i, j, r});
    }
  }
  return events;
}

std::vector<EventInstance> enumerate_events(const SystemState& state, const RateParameters& rates) {
  return enumerate_events(std::span<const Count>(state.population), rates);
}

double total_rate(std::span<const EventInstance> events) {
  double sum = 0.0;
  for (const auto& e : events) sum += e.rate;
  return sum;
}

}  // namespace patchsim
