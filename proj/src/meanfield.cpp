#include "patchsim/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace patchsim::meanfield {

std::size_t VariableRef::index(const StateLayout& layout) const {
  switch (kind) {
    case VariableKind::population: return layout.population(i);
    case VariableKind::base_age: return layout.base_age(i);
    case VariableKind::patch_age: return layout.patch_age(i, j);
  }
  return 0;
}

std::string VariableRef::name() const {
  switch (kind) {
    case VariableKind::population: return "N_" + std::to_string(i);
    case VariableKind::base_age: return "A_" + std::to_string(i);
    case VariableKind::patch_age: return "A_" + std::to_string(i) + "_" + std::to_string(j);
  }
  return "?";
}

double RateExpr::evaluate(std::span<const double> x, const StateLayout& layout,
                          const RateParameters& rates) const {
  switch (kind) {
    case Kind::unit: return 1.0;
    case Kind::base_contact: return rates.alpha[i] * x[layout.population(i)];
    case Kind::peer_contact:
      return rates.beta(i, j) * x[layout.population(i)] * x[layout.population(j)];
    case Kind::patch_move: return rates.gamma(i, j) * x[layout.population(i)];
  }
  return 0.0;
}

std::string RateExpr::describe() const {
  const auto si = std::to_string(i);
  const auto sj = std::to_string(j);
  switch (kind) {
    case Kind::unit: return "1";
    case Kind::base_contact: return "alpha_" + si + "*N_" + si;
    case Kind::peer_contact: return "beta_" + si + "_" + sj + "*N_" + si + "*N_" + sj;
    case Kind::patch_move: return "gamma_" + si + "_" + sj + "*N_" + si;
  }
  return "?";
}

namespace {

using Rate = RateExpr::Kind;

VariableRef population_ref(PatchIndex i) { return {VariableKind::population, i, 0}; }
VariableRef base_ref(PatchIndex i) { return {VariableKind::base_age, i, 0}; }
VariableRef patch_ref(PatchIndex source, PatchIndex holder) {
  return {VariableKind::patch_age, source, holder};
}

EvolutionEntry drift_entry(VariableRef v) {
  return {v, InfluenceKind::constant_drift, 1.0, {}, {Rate::unit, 0, 0}};
}

}  // namespace

std::vector<EvolutionEntry> build_evolution_matrices(std::size_t n) {
  std::vector<EvolutionEntry> out;

  for (PatchIndex i = 0; i < n; ++i) {
    for (PatchIndex j = 0; j < n; ++j) {
      if (j == i) continue;
      out.push_back({population_ref(i), InfluenceKind::decrement, 0.0, {}, {Rate::patch_move, i, j}});
      out.push_back({population_ref(i), InfluenceKind::increment, 0.0, {}, {Rate::patch_move, j, i}});
    }
  }

  for (PatchIndex i = 0; i < n; ++i) {
    out.push_back(drift_entry(base_ref(i)));
    out.push_back({base_ref(i), InfluenceKind::zero_reset, 0.0, {}, {Rate::base_contact, i, i}});
    for (PatchIndex j = 0; j < n; ++j) {
      if (j == i) continue;
      out.push_back({base_ref(i), InfluenceKind::min_reset, 0.0, patch_ref(i, j),
                     {Rate::base_contact, j, j}});
    }
  }

  // A_i_j: data from source i held at patch j.
  for (PatchIndex i = 0; i < n; ++i) {
    for (PatchIndex j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto target = patch_ref(i, j);
      out.push_back(drift_entry(target));
      out.push_back({target, InfluenceKind::zero_reset, 0.0, {}, {Rate::peer_contact, i, j}});
      out.push_back({target, InfluenceKind::zero_reset, 0.0, {}, {Rate::patch_move, i, j}});
      for (PatchIndex k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        out.push_back({target, InfluenceKind::min_reset, 0.0, patch_ref(i, k),
                       {Rate::peer_contact, j, k}});
        out.push_back({target, InfluenceKind::min_reset, 0.0, patch_ref(i, k),
                       {Rate::patch_move, k, j}});
      }
    }
  }
  return out;
}

std::vector<EvolutionEntry> entries_for(std::span<const EvolutionEntry> entries,
                                        const VariableRef& variable) {
  std::vector<EvolutionEntry> out;
  for (const auto& e : entries) {
    if (e.variable == variable) out.push_back(e);
  }
  return out;
}

FlatState rhs(std::span<const double> x, const RateParameters& rates) {
  const std::size_t n = rates.size();
  const StateLayout L(n);
  if (x.size() != L.size()) throw std::invalid_argument("meanfield rhs: state size mismatch");
  FlatState dx(L.size(), 0.0);
  const auto N = [&](PatchIndex i) { return x[L.population(i)]; };

  for (PatchIndex i = 0; i < n; ++i) {
    double inflow = 0.0;
    double outflow = 0.0;
    for (PatchIndex j = 0; j < n; ++j) {
      if (j == i) continue;
      inflow += rates.gamma(j, i) * N(j);
      outflow += rates.gamma(i, j) * N(i);
    }
    dx[L.population(i)] = inflow - outflow;
  }

  for (PatchIndex i = 0; i < n; ++i) {
    const double a = x[L.base_age(i)];
    double d = 1.0 - rates.alpha[i] * N(i) * a;
    for (PatchIndex j = 0; j < n; ++j) {
      if (j == i) continue;
      d -= rates.alpha[j] * N(j) * relu(a - x[L.patch_age(i, j)]);
    }
    dx[L.base_age(i)] = d;
  }

  for (PatchIndex i = 0; i < n; ++i) {
    for (PatchIndex j = 0; j < n; ++j) {
      if (j == i) continue;
      const double a = x[L.patch_age(i, j)];
      double d = 1.0 - rates.beta(i, j) * N(i) * N(j) * a - rates.gamma(i, j) * N(i) * a;
      for (PatchIndex k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        const double gap = relu(a - x[L.patch_age(i, k)]);
        d -= rates.beta(j, k) * N(j) * N(k) * gap;
        d -= rates.gamma(k, j) * N(k) * gap;
      }
      dx[L.patch_age(i, j)] = d;
    }
  }
  return dx;
}

FlatState folded_rhs(std::span<const EvolutionEntry> entries, std::span<const double> x,
                     const RateParameters& rates) {
  const StateLayout L(rates.size());
  if (x.size() != L.size()) throw std::invalid_argument("folded_rhs: state size mismatch");
  FlatState dx(L.size(), 0.0);
  for (const auto& e : entries) {
    const std::size_t target = e.variable.index(L);
    const double r = e.rate.evaluate(x, L, rates);
    const double v = x[target];
    // rate * (post-reset value - pre-reset value)
    switch (e.influence) {
      case InfluenceKind::constant_drift: dx[target] += e.drift * r; break;
      case InfluenceKind::zero_reset: dx[target] += r * (0.0 - v); break;
      case InfluenceKind::min_reset:
        dx[target] += r * (-relu(v - x[e.partner.index(L)]));
        break;
      case InfluenceKind::increment: dx[target] += r; break;
      case InfluenceKind::decrement: dx[target] -= r; break;
    }
  }
  return dx;
}

double stiffness_bound(std::span<const double> x, const RateParameters& rates) {
  const std::size_t n = rates.size();
  const StateLayout L(n);
  const auto N = [&](PatchIndex i) { return x[L.population(i)]; };
  double bound = 0.0;
  for (PatchIndex i = 0; i < n; ++i) {
    double move_out = 0.0;
    double base = rates.alpha[i] * N(i);
    for (PatchIndex j = 0; j < n; ++j) {
      if (j == i) continue;
      move_out += rates.gamma(i, j);
      base += rates.alpha[j] * N(j);
    }
    bound = std::max({bound, move_out, base});
    for (PatchIndex j = 0; j < n; ++j) {
      if (j == i) continue;
      double r = rates.beta(i, j) * N(i) * N(j) + rates.gamma(i, j) * N(i);
      for (PatchIndex k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        r += rates.beta(j, k) * N(j) * N(k) + rates.gamma(k, j) * N(k);
      }
      bound = std::max(bound, r);
    }
  }
  return bound;
}

FlatState initial_state(const PatchModel& model, std::span<const double> initial_population) {
  const std::size_t n = model.n_patches;
  if (initial_population.size() != n) {
    throw std::invalid_argument("initial population must have one entry per patch");
  }
  const StateLayout L(n);
  FlatState x(L.size(), model.initial_age);
  for (PatchIndex i = 0; i < n; ++i) x[L.population(i)] = initial_population[i];
  return x;
}

namespace {

void check_finite(const FlatState& v, double t) {
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!std::isfinite(v[k])) {
      throw IntegrationError("mean-field integration diverged at t=" + std::to_string(t) +
                             " (component " + std::to_string(k) +
                             "); reduce the step or check the rates");
    }
  }
}

void rk4_step(FlatState& x, double t, double h, const RateParameters& rates) {
  const std::size_t m = x.size();
  FlatState tmp(m);
  const FlatState k1 = rhs(x, rates);
  check_finite(k1, t);
  for (std::size_t q = 0; q < m; ++q) tmp[q] = x[q] + 0.5 * h * k1[q];
  const FlatState k2 = rhs(tmp, rates);
  check_finite(k2, t);
  for (std::size_t q = 0; q < m; ++q) tmp[q] = x[q] + 0.5 * h * k2[q];
  const FlatState k3 = rhs(tmp, rates);
  check_finite(k3, t);
  for (std::size_t q = 0; q < m; ++q) tmp[q] = x[q] + h * k3[q];
  const FlatState k4 = rhs(tmp, rates);
  check_finite(k4, t);
  for (std::size_t q = 0; q < m; ++q) {
    x[q] += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
  }
  check_finite(x, t + h);
}

}  // namespace

RealTrajectory integrate(const PatchModel& model, std::span<const double> initial_population,
                         double horizon, double step, std::span<const double> sample_times) {
  model.validate();
  if (!(step > 0.0)) throw std::invalid_argument("integrate: step must be > 0");
  if (!(horizon >= step)) throw std::invalid_argument("integrate: horizon must be >= step");
  for (std::size_t k = 0; k < sample_times.size(); ++k) {
    if (!(sample_times[k] >= 0.0 && sample_times[k] <= horizon) ||
        (k > 0 && !(sample_times[k] > sample_times[k - 1]))) {
      throw std::invalid_argument("integrate: sample times must be increasing within [0, horizon]");
    }
  }

  RealTrajectory out;
  out.n_patches = model.n_patches;
  FlatState x = initial_state(model, initial_population);
  double t = 0.0;
  // Step counter keeps the nominal grid k*step free of accumulated rounding.
  std::int64_t steps_taken = 0;
  for (double target : sample_times) {
    const double tol = 1e-9 * std::max(1.0, target);
    while (static_cast<double>(steps_taken + 1) * step <= target + tol) {
      const double next = static_cast<double>(steps_taken + 1) * step;
      rk4_step(x, t, next - t, model.rates);
      t = next;
      ++steps_taken;
    }
    out.times.push_back(target);
    if (std::abs(t - target) <= tol) {
      out.states.push_back(x);
    } else {
      // Off-grid sample: short step to it without disturbing the march.
      FlatState probe = x;
      rk4_step(probe, t, target - t, model.rates);
      out.states.push_back(std::move(probe));
    }
  }
  return out;
}

RealTrajectory integrate(const PatchModel& model, double horizon, double step,
                         std::span<const double> sample_times) {
  std::vector<double> initial(model.initial_population.begin(), model.initial_population.end());
  return integrate(model, initial, horizon, step, sample_times);
}

}  // namespace patchsim::meanfield
