#include <doctest.h>

#include <algorithm>
#include <stdexcept>

#include "patchsim/model.hpp"
#include "support.hpp"

using namespace patchsim;
using testing::blank_state;
using testing::random_state;

TEST_CASE("advance_ages drifts every age at unit rate") {
  SystemState s = blank_state(3);
  const SystemState a = advance_ages(s, 2.5);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.base_age[i] == 2.5);
    for (std::size_t j = 0; j < 3; ++j) CHECK(a.patch_age(i, j) == (i == j ? 0.0 : 2.5));
  }
  CHECK(a.t == 2.5);
}

TEST_CASE("advance_ages with dt = 0 is the identity") {
  Rng rng(3);
  const SystemState s = random_state(4, rng);
  CHECK(advance_ages(s, 0.0) == s);
}

TEST_CASE("advance_ages is additive") {
  SystemState s = blank_state(2);
  s.base_age[0] = 1.0;
  s.patch_age(0, 1) = 4.0;
  const SystemState a = advance_ages(s, 1.0);
  CHECK(a.base_age[0] == 2.0);
  CHECK(a.patch_age(0, 1) == 5.0);
}

TEST_CASE("advance_ages rejects negative or NaN dt") {
  SystemState s = blank_state(2);
  CHECK_THROWS_AS(advance_ages(s, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(advance_ages(s, std::nan("")), std::invalid_argument);
}

TEST_CASE("base contact zeroes own age and relays fresher peer data") {
  SystemState s = blank_state(2);
  s.base_age = {5.0, 7.0};
  s.patch_age(1, 0) = 3.0;
  const SystemState a = apply_base_contact(s, 0);
  CHECK(a.base_age == std::vector<double>{0.0, 3.0});
}

TEST_CASE("base contact ignores stale relay data") {
  SystemState s = blank_state(2);
  s.base_age = {5.0, 2.0};
  s.patch_age(1, 0) = 9.0;
  CHECK(apply_base_contact(s, 0).base_age == std::vector<double>{0.0, 2.0});
}

TEST_CASE("base contact with a single patch") {
  SystemState s = blank_state(1);
  s.base_age = {4.0};
  const SystemState a = apply_base_contact(s, 0);
  CHECK(a.base_age == std::vector<double>{0.0});
  CHECK(a.patch_age(0, 0) == 0.0);
}

TEST_CASE("peer contact exchanges own data and merges third-party data") {
  SystemState s = blank_state(3);
  s.patch_age(1, 0) = 4.0;
  s.patch_age(0, 1) = 5.0;
  s.patch_age(2, 0) = 6.0;
  s.patch_age(2, 1) = 2.0;
  s.patch_age(0, 2) = 8.0;
  const SystemState a = apply_peer_contact(s, 0, 1);
  CHECK(a.patch_age(2, 0) == 2.0);
  CHECK(a.patch_age(2, 1) == 2.0);
  CHECK(a.patch_age(1, 0) == 0.0);
  CHECK(a.patch_age(0, 1) == 0.0);
  CHECK(a.patch_age(0, 2) == 8.0);  // what patch 2 holds is untouched
}

TEST_CASE("peer contact is symmetric in its arguments") {
  Rng rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const SystemState s = random_state(5, rng);
    const auto i = uniform_index(rng, 5);
    auto j = uniform_index(rng, 4);
    if (j >= i) ++j;
    CHECK(apply_peer_contact(s, i, j) == apply_peer_contact(s, j, i));
  }
}

TEST_CASE("peer contact with two patches touches only the own-data ages") {
  SystemState s = blank_state(2);
  s.base_age = {3.0, 4.0};
  s.patch_age(0, 1) = 1.5;
  s.patch_age(1, 0) = 2.5;
  const SystemState a = apply_peer_contact(s, 0, 1);
  CHECK(a.patch_age(0, 1) == 0.0);
  CHECK(a.patch_age(1, 0) == 0.0);
  CHECK(a.base_age == s.base_age);
}

TEST_CASE("patch move transfers one zebra and carries data") {
  SystemState s = blank_state(3);
  s.population = {2, 1, 0};
  s.patch_age(0, 1) = 3.0;
  s.patch_age(2, 1) = 7.0;
  s.patch_age(2, 0) = 1.0;
  const SystemState a = apply_patch_move(s, 0, 1);
  CHECK(a.population == std::vector<Count>{1, 2, 0});
  CHECK(a.patch_age(0, 1) == 0.0);
  CHECK(a.patch_age(2, 1) == 1.0);
}

TEST_CASE("patch move there and back restores the population") {
  SystemState s = blank_state(3);
  s.population = {2, 1, 0};
  const SystemState a = apply_patch_move(apply_patch_move(s, 0, 1), 1, 0);
  CHECK(a.population == s.population);
}

TEST_CASE("patch move from an empty patch is rejected") {
  SystemState s = blank_state(3);
  s.population = {0, 3, 1};
  CHECK_THROWS_AS(apply_patch_move(s, 0, 2), std::logic_error);
}

TEST_CASE("resets reject bad indices") {
  SystemState s = blank_state(2);
  s.population = {1, 1};
  CHECK_THROWS_AS(apply_base_contact(s, 2), std::out_of_range);
  CHECK_THROWS_AS(apply_peer_contact(s, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(apply_peer_contact(s, 0, 5), std::out_of_range);
  CHECK_THROWS_AS(apply_patch_move(s, 1, 1), std::invalid_argument);
}

TEST_CASE("enumerate_events: zero population gives no events") {
  Rng rng(1);
  const auto rates = testing::random_rates(4, rng);
  const std::vector<Count> N(4, 0);
  const auto events = enumerate_events(std::span<const Count>(N), rates);
  CHECK(events.empty());
  CHECK(total_rate(events) == 0.0);
}

TEST_CASE("enumerate_events: single patch base contact") {
  auto rates = RateParameters::zeros(1);
  rates.alpha[0] = 0.1;
  const std::vector<Count> N{50};
  const auto events = enumerate_events(std::span<const Count>(N), rates);
  REQUIRE(events.size() == 1);
  CHECK(events[0].kind == EventKind::base_contact);
  CHECK(events[0].i == 0);
  CHECK(events[0].rate == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("enumerate_events: peer contact rate") {
  auto rates = RateParameters::zeros(2);
  rates.beta(0, 1) = rates.beta(1, 0) = 0.2;
  const std::vector<Count> N{1, 1};
  const auto events = enumerate_events(std::span<const Count>(N), rates);
  REQUIRE(events.size() == 1);
  CHECK(events[0] == EventInstance{EventKind::peer_contact, 0, 1, 0.2});
}

TEST_CASE("enumerate_events rates match an independent recount") {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + uniform_index(rng, 6);
    const auto rates = testing::random_rates(n, rng);
    const SystemState s = random_state(n, rng);
    double expected = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto Ni = static_cast<double>(s.population[i]);
      expected += rates.alpha[i] * Ni;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        expected += rates.gamma(i, j) * Ni;
        if (i < j) expected += rates.beta(i, j) * Ni * static_cast<double>(s.population[j]);
      }
    }
    const auto events = enumerate_events(s, rates);
    CHECK(total_rate(events) == doctest::Approx(expected).epsilon(1e-12));
    for (const auto& e : events) {
      CHECK(e.rate > 0.0);
      if (e.kind == EventKind::peer_contact) CHECK(e.i < e.j);
      if (e.kind == EventKind::patch_move) CHECK(s.population[e.i] > 0);
    }
  }
}

TEST_CASE("event rates depend only on the population") {
  Rng rng(8);
  const auto rates = testing::random_rates(4, rng);
  SystemState a = random_state(4, rng);
  SystemState b = random_state(4, rng);
  b.population = a.population;
  CHECK(enumerate_events(a, rates) == enumerate_events(b, rates));
}

TEST_CASE("random event sequences conserve population and never raise ages") {
  Rng rng(21);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 1 + uniform_index(rng, 5);
    const auto rates = testing::random_rates(n, rng);
    SystemState s = random_state(n, rng);
    const Count total = s.total_population();
    for (int step = 0; step < 20; ++step) {
      const auto events = enumerate_events(s, rates);
      if (events.empty()) break;
      const auto& e = events[uniform_index(rng, events.size())];
      const SystemState next = apply_event(s, e);
      CHECK(testing::ages_not_above(next, s));
      CHECK(next.total_population() == total);
      CHECK_NOTHROW(next.validate());
      s = next;
    }
  }
}

TEST_CASE("contacts are idempotent") {
  Rng rng(4);
  for (int rep = 0; rep < 200; ++rep) {
    const SystemState s = random_state(4, rng);
    const auto i = uniform_index(rng, 4);
    const auto j = (i + 1 + uniform_index(rng, 3)) % 4;
    const SystemState b = apply_base_contact(s, i);
    CHECK(apply_base_contact(b, i) == b);
    const SystemState p = apply_peer_contact(s, i, j);
    CHECK(apply_peer_contact(p, i, j) == p);
  }
}

TEST_CASE("rate parameter validation") {
  auto r = RateParameters::zeros(2);
  CHECK_NOTHROW(r.validate());
  r.beta(0, 1) = 0.3;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r.beta(1, 0) = 0.3;
  CHECK_NOTHROW(r.validate());
  r.alpha[1] = -0.1;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r.alpha[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}

TEST_CASE("initial state honours initial_age and keeps a zero diagonal") {
  auto m = testing::make_model(RateParameters::zeros(3), {1, 2, 3}, 1.5);
  const SystemState s = SystemState::initial(m);
  CHECK(s.total_population() == 6);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(s.base_age[i] == 1.5);
    CHECK(s.patch_age(i, i) == 0.0);
  }
  m.initial_population = {1, -1, 0};
  CHECK_THROWS_AS(SystemState::initial(m), std::invalid_argument);
  m.initial_population = {1, 1};
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}
