#include <doctest.h>

#include <cmath>
#include <limits>

#include "errors.hpp"
#include "rng.hpp"
#include "scenario.hpp"

using namespace risauction;

namespace {

// Frozen from an independent evaluation of c / f_c and (lambda / 4 pi)^2.
constexpr double kLambda = 0.011530479153846154;
constexpr double kFriis1m = 8.419280557904514e-07;
constexpr double kNoiseW = 2.377339788691667e-16;
constexpr double kNoiseDbm = -126.23908740944319;

}  // namespace

TEST_CASE("los_probability examples and monotonicity") {
  CHECK(los_probability(0.0) == 1.0);
  CHECK(los_probability(50.0, 50.0) == doctest::Approx(0.36787944117144233));
  CHECK(los_probability(1e6) < 1e-12);
  double prev = 1.0;
  for (double d = 0.0; d <= 500.0; d += 0.5) {
    const double p = los_probability(d);
    CHECK(p <= prev);
    CHECK(p > 0.0);
    prev = p;
  }
  CHECK_THROWS_AS(los_probability(-1.0), ArgumentError);
}

TEST_CASE("empirical LOS frequency within binomial bounds") {
  Rng rng(21);
  const int n = 20000;
  for (double d : {5.0, 25.0, 60.0}) {
    const double p = los_probability(d);
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += rng.bernoulli(p) ? 1 : 0;
    const double sigma = std::sqrt(n * p * (1 - p));
    CHECK(std::abs(hits - n * p) < 3.0 * sigma);
  }
}

TEST_CASE("path gain anchored at the free-space reference") {
  ScenarioConfig cfg;
  CHECK(cfg.wavelength() == doctest::Approx(kLambda).epsilon(1e-12));
  const double g = path_gain(1.0, true, 0.0, cfg);
  CHECK(g * g == doctest::Approx(kFriis1m).epsilon(1e-12));
  CHECK(10.0 * std::log10(g * g) == doctest::Approx(-60.747250181299734).epsilon(1e-10));

  for (double d : {1.0, 3.0, 17.5}) {
    const double a = path_gain(d, true, 0.0, cfg), b = path_gain(2 * d, true, 0.0, cfg);
    CHECK(b * b / (a * a) == doctest::Approx(0.25).epsilon(1e-12));
  }
  const double n1 = path_gain(1.0, false, 0.0, cfg), n10 = path_gain(10.0, false, 0.0, cfg);
  CHECK(n10 * n10 / (n1 * n1) == doctest::Approx(std::pow(10.0, -4.25)).epsilon(1e-12));

  const double s = path_gain(5.0, true, 3.0, cfg), s0 = path_gain(5.0, true, 0.0, cfg);
  CHECK(s * s / (s0 * s0) == doctest::Approx(std::pow(10.0, 0.3)).epsilon(1e-12));
}

TEST_CASE("path gain clamps below the reference distance") {
  ScenarioConfig cfg;
  const auto before = path_gain_clamp_count();
  CHECK(path_gain(0.2, true, 0.0, cfg) == path_gain(1.0, true, 0.0, cfg));
  CHECK(path_gain_clamp_count() == before + 1);
}

TEST_CASE("noise power from PSD, bandwidth and noise figure") {
  ScenarioConfig cfg;
  CHECK(cfg.noise_power_w() == doctest::Approx(kNoiseW).epsilon(1e-12));
  CHECK(10.0 * std::log10(cfg.noise_power_w()) + 30.0 == doctest::Approx(kNoiseDbm).epsilon(1e-12));
  const Scenario s = generate_scenario(cfg, 1);
  CHECK(s.noise_power == doctest::Approx(kNoiseW).epsilon(1e-12));
}

TEST_CASE("two BSs sit at opposite edge midpoints") {
  const Scenario s = generate_scenario(ScenarioConfig{}, 4);
  REQUIRE(s.n_bs() == 2);
  CHECK(s.bs_pos[0].x == 0.0);
  CHECK(s.bs_pos[0].y == 50.0);
  CHECK(s.bs_pos[1].x == doctest::Approx(100.0));
  CHECK(s.bs_pos[1].y == 50.0);
  CHECK(distance(s.bs_pos[0], s.bs_pos[1]) == doctest::Approx(100.0));
}

TEST_CASE("generation is deterministic per seed") {
  ScenarioConfig cfg;
  const Scenario a = generate_scenario(cfg, 99), b = generate_scenario(cfg, 99), c = generate_scenario(cfg, 100);
  bool same = true, differs = false;
  for (std::size_t u = 0; u < a.n_ue(); ++u) {
    same = same && a.ue_pos[u].x == b.ue_pos[u].x && a.ue_pos[u].y == b.ue_pos[u].y;
    differs = differs || a.ue_pos[u].x != c.ue_pos[u].x;
    for (std::size_t r = 0; r < a.n_ris(); ++r) {
      same = same && a.ue_ris(u, r).gain == b.ue_ris(u, r).gain && a.ue_ris(u, r).los == b.ue_ris(u, r).los;
    }
  }
  CHECK(same);
  CHECK(differs);
  CHECK(a.association == b.association);
}

TEST_CASE("clustered users concentrate near the cell boundary") {
  ScenarioConfig cfg;
  cfg.n_ue = 10000;
  cfg.n_ris = 1;
  const Scenario s = generate_scenario(cfg, 5);
  double to_line = 0.0, to_bs0 = 0.0, to_bs1 = 0.0;
  for (const Point& p : s.ue_pos) {
    to_line += std::abs(p.x - 50.0);
    to_bs0 += distance(p, s.bs_pos[0]);
    to_bs1 += distance(p, s.bs_pos[1]);
  }
  CHECK(to_line < to_bs0);
  CHECK(to_line < to_bs1);
  for (const Point& p : s.ue_pos) {
    REQUIRE(p.x >= 0.0);
    REQUIRE(p.x <= 100.0);
    REQUIRE(p.y >= 0.0);
    REQUIRE(p.y <= 100.0);
  }
}

TEST_CASE("link table invariants") {
  ScenarioConfig cfg;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scenario s = generate_scenario(cfg, seed);
    auto check = [&](const Link& l) {
      REQUIRE(l.gain > 0.0);
      REQUIRE(std::abs(l.departure) <= M_PI);
      REQUIRE(std::abs(l.arrival) <= M_PI);
      REQUIRE(l.distance >= cfg.reference_distance);
    };
    for (std::size_t u = 0; u < s.n_ue(); ++u)
      for (std::size_t b = 0; b < s.n_bs(); ++b) {
        check(s.ue_bs(u, b));
        REQUIRE_FALSE(s.ue_bs(u, b).los);
        REQUIRE(s.ue_bs(u, b).k_factor == 0.0);
      }
    for (std::size_t r = 0; r < s.n_ris(); ++r)
      for (std::size_t b = 0; b < s.n_bs(); ++b) {
        check(s.ris_bs(r, b));
        REQUIRE(s.ris_bs(r, b).los);
        REQUIRE(std::isinf(s.ris_bs(r, b).k_factor));
      }
    for (std::size_t u = 0; u < s.n_ue(); ++u)
      for (std::size_t r = 0; r < s.n_ris(); ++r) {
        const Link& l = s.ue_ris(u, r);
        check(l);
        REQUIRE(l.k_factor == (l.los ? cfg.k_los : cfg.k_nlos));
      }
    REQUIRE(s.association.size() == s.n_ue());
  }
}

TEST_CASE("path gain decreases with distance in expectation") {
  ScenarioConfig cfg;
  Rng rng(8);
  const double sd = std::sqrt(cfg.shadow_var_db);
  double near = 0.0, far = 0.0;
  for (int i = 0; i < 4000; ++i) {
    const double a = path_gain(10.0, false, rng.normal(0.0, sd), cfg);
    const double b = path_gain(40.0, false, rng.normal(0.0, sd), cfg);
    near += a;
    far += b;
  }
  CHECK(far < near);
}

TEST_CASE("association rule") {
  ScenarioConfig cfg;
  cfg.n_ue = 2;
  cfg.n_ris = 1;
  Scenario s;
  s.config = cfg;
  s.bs_pos = {{0.0, 50.0}, {100.0, 50.0}};
  s.ue_pos = {{50.0, 20.0}, {100.0, 50.0}};
  s.ris_pos = {{50.0, 50.0}};
  populate_links(s, [] { return 0.0; }, [](double) { return true; });
  CHECK(s.association[0] == 0);  // equidistant, equal shadowing
  CHECK(s.association[1] == 1);  // at BS 1

  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Scenario r = generate_scenario(ScenarioConfig{}, seed);
    for (std::size_t u = 0; u < r.n_ue(); ++u) {
      std::size_t best = 0;
      for (std::size_t b = 1; b < r.n_bs(); ++b)
        if (r.ue_bs(u, b).gain > r.ue_bs(u, best).gain) best = b;
      REQUIRE(r.association[u] == best);
    }
  }
}

TEST_CASE("config validation") {
  auto bad = [](auto mutate) {
    ScenarioConfig cfg;
    mutate(cfg);
    return cfg;
  };
  CHECK_NOTHROW(ScenarioConfig{}.validate());
  CHECK_THROWS_AS(bad([](ScenarioConfig& c) { c.n_ue = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](ScenarioConfig& c) { c.region_side = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](ScenarioConfig& c) { c.ple_nlos = 1.5; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](ScenarioConfig& c) { c.k_los = 2.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](ScenarioConfig& c) { c.k_nlos = -1.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(generate_scenario(bad([](ScenarioConfig& c) { c.m_ris = 0; }), 1), ConfigError);
}
