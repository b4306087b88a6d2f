#include <doctest.h>

#include <cmath>
#include <memory>

#include "mbrl/tpe.hpp"
#include "test_support.hpp"

using namespace mbrl;
using mbrl_test::StubEnv;

namespace {

// Exact rational rounding oracle for a2 = p/10: count = k * (10 - p) / p,
// rounded to nearest with ties to even, in integer arithmetic.
long rational_scaled_count(long k, int p) {
  long num = k * (10 - p);
  long den = p;
  long q = num / den;
  long r = num % den;
  if (2 * r < den) return q;
  if (2 * r > den) return q + 1;
  return q % 2 == 0 ? q : q + 1;
}

DdpgParams stub_ctrl_params() {
  DdpgParams p;
  p.actor_hidden = {4};
  p.critic_hidden = {4};
  p.batch_size = 8;
  p.warmup_size = 8;
  return p;
}

struct StubRig {
  StubEnv env;
  DdpgController ctrl;
  DynamicsModel model;
  std::shared_ptr<SampleBudget> budget;
  Tpe tpe;

  StubRig(TpeConfig config, long budget_limit, std::uint64_t seed = 5)
      : env(1000),
        ctrl(env.spec(), stub_ctrl_params(), seed),
        model(env.spec(), {{4}, 1e-3, 8}, seed + 1),
        budget(std::make_shared<SampleBudget>(budget_limit)),
        tpe(config, env, ctrl, model, budget, seed + 2) {}
};

TpeConfig small_config() {
  TpeConfig c;
  c.k_real = 10;
  c.t_real = 0;
  c.init_samples = 0;
  c.model_epochs = 0;
  return c;
}

}  // namespace

TEST_SUITE("tpe") {

TEST_CASE("action validation: a2 = 0 is rejected at the type level") {
  CHECK_THROWS_AS((TpeAction{0.5, 0.5, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((TpeAction{-0.1, 0.5, 0.5}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((TpeAction{0.5, 1.1, 0.5}.validate()), std::invalid_argument);
  CHECK_NOTHROW((TpeAction{0.0, 1.0, 1.0}.validate()));
}

TEST_CASE("observation mode names parse") {
  CHECK(obs_mode_from_name("const") == TpeObsMode::Constant);
  CHECK(obs_mode_from_name("v1") == TpeObsMode::LastAvgReward);
  CHECK(obs_mode_from_name("v2") == TpeObsMode::SampleRatio);
  CHECK_THROWS_AS(obs_mode_from_name("v3"), std::invalid_argument);
}

TEST_CASE("compute_kc: tabulated values") {
  CHECK(compute_kc(10, 0.5) == 10);
  CHECK(compute_kc(10, 1.0) == 0);
  CHECK(compute_kc(10, 0.2) == 40);
  CHECK_THROWS_AS(compute_kc(10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(compute_kc(10, -0.5), std::invalid_argument);
}

TEST_CASE("compute_tc: tabulated values") {
  CHECK(compute_tc(4, 0.5) == 4);
  CHECK(compute_tc(4, 1.0) == 0);
  CHECK(compute_tc(4, 0.2) == 16);
}

TEST_CASE("compute_kc/tc: match exact rational rounding over the action grid") {
  const int ps[] = {2, 4, 5, 6, 8, 10};
  for (int p : ps) {
    double a2 = p / 10.0;
    for (long k = 0; k <= 100; ++k) {
      CHECK(compute_kc(k, a2) == rational_scaled_count(k, p));
      CHECK(compute_tc(k, a2) == rational_scaled_count(k, p));
    }
  }
}

TEST_CASE("compute_kc: non-increasing in a2") {
  for (long k : {1L, 7L, 50L}) {
    long prev = compute_kc(k, 0.05);
    for (double a2 = 0.1; a2 <= 1.0001; a2 += 0.05) {
      long cur = compute_kc(k, std::min(a2, 1.0));
      CHECK(cur <= prev);
      prev = cur;
    }
  }
}

TEST_CASE("quality: blends critic value and noise per the endpoints") {
  StubEnv env;
  DdpgController ctrl(env.spec(), stub_ctrl_params(), 1);
  // Constant critic output 2.0: zero every weight, set the output bias.
  std::vector<double> cp(ctrl.critic().parameter_count(), 0.0);
  cp.back() = 2.0;
  ctrl.critic().set_parameters(cp);
  std::vector<double> s{0.3};

  RngStream rng(2);
  SUBCASE("a0 = 1 ignores the noise") {
    double phi = quality(s, 1.0, ctrl, rng);
    CHECK(phi == ctrl.q_value(s, ctrl.act(s, false, rng)));
    CHECK(phi == 2.0);
  }
  SUBCASE("a0 = 0 is pure noise, independent of the critic") {
    double phi = quality(s, 0.0, ctrl, rng);
    CHECK(phi >= 0.0);
    CHECK(phi < 1.0);
  }
  SUBCASE("a0 = 0.5 with forced u = 0.4 gives 1.2") {
    rng.script_uniform({0.4});
    CHECK(quality(s, 0.5, ctrl, rng) == doctest::Approx(1.2).epsilon(1e-12));
  }
}

TEST_CASE("sampling_reset_real: scripted-noise trace breaks on the running max") {
  StubEnv env;
  DdpgController ctrl(env.spec(), stub_ctrl_params(), 3);
  RngStream rng(4);
  // a0 = 0: quality equals the scripted uniform draw. With m2 = 1 the
  // second candidate (0.9, a fresh running max) triggers the break.
  rng.script_uniform({0.1, 0.9, 0.2, 0.3});
  auto start = sampling_reset_real(env, 0.0, ctrl, 50, 1, rng);
  CHECK(env.candidates_drawn() == 2);
  CHECK(start == std::vector<double>{1.0});  // candidates count 0, 1, 2, ...
  CHECK(env.last_reset() == 1.0);
}

TEST_CASE("sampling_reset_real: constant quality breaks right after m2") {
  StubEnv env;
  DdpgController ctrl(env.spec(), stub_ctrl_params(), 5);
  // a0 = 1 with a zero critic: every candidate scores exactly 0.
  ctrl.critic().set_parameters(std::vector<double>(ctrl.critic().parameter_count(), 0.0));
  ctrl.actor().set_parameters(std::vector<double>(ctrl.actor().parameter_count(), 0.0));
  RngStream rng(6);
  auto start = sampling_reset_real(env, 1.0, ctrl, 50, 5, rng);
  CHECK(env.candidates_drawn() == 6);  // breaks at i = m2 + 1
  CHECK(start == std::vector<double>{5.0});
}

TEST_CASE("sampling_reset_real: strictly falling quality runs to m1") {
  StubEnv env;
  DdpgController ctrl(env.spec(), stub_ctrl_params(), 7);
  RngStream rng(8);
  std::initializer_list<double> falling{0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05};
  rng.script_uniform(falling);
  auto start = sampling_reset_real(env, 0.0, ctrl, 10, 3, rng);
  CHECK(env.candidates_drawn() == 10);  // never a new max after i = 1
  CHECK(start == std::vector<double>{9.0});
}

TEST_CASE("sampling_reset_cyber: endpoints and buffer fallback") {
  StubEnv real;
  DynamicsModel model(real.spec(), {{4}, 1e-3, 8}, 9);
  CyberEnv cyber(model, real);
  RngStream rng(10);

  ReplayBuffer buf(8);
  buf.add({{42.0}, {0.0}, 0.0, {43.0}, false});

  SUBCASE("a1 = 1 with one stored state always picks it") {
    for (int i = 0; i < 20; ++i) {
      auto s = sampling_reset_cyber(cyber, 1.0, buf, rng);
      CHECK(s == std::vector<double>{42.0});
    }
  }
  SUBCASE("a1 = 0 draws uniformly from the state box") {
    bool fell_back = true;
    auto s = sampling_reset_cyber(cyber, 0.0, buf, rng, &fell_back);
    CHECK_FALSE(fell_back);
    CHECK(s[0] >= real.spec().state_low[0]);
    CHECK(s[0] <= real.spec().state_high[0]);
  }
  SUBCASE("an empty buffer falls back to the uniform branch") {
    ReplayBuffer empty(8);
    bool fell_back = false;
    sampling_reset_cyber(cyber, 1.0, empty, rng, &fell_back);
    CHECK(fell_back);
  }
}

TEST_CASE("sampling_reset_cyber: buffer-branch frequency tracks a1") {
  StubEnv real;
  DynamicsModel model(real.spec(), {{4}, 1e-3, 8}, 11);
  CyberEnv cyber(model, real);
  ReplayBuffer buf(8);
  buf.add({{42.0}, {0.0}, 0.0, {43.0}, false});
  RngStream rng(12);
  int hits = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    auto s = sampling_reset_cyber(cyber, 0.7, buf, rng);
    if (s[0] == 42.0) ++hits;
  }
  CHECK(std::abs(hits / static_cast<double>(n) - 0.7) < 0.02);
}

TEST_CASE("initialize: seeds the buffer and counts against the budget") {
  TpeConfig c = small_config();
  c.init_samples = 100;
  StubRig rig(c, 1000);
  rig.tpe.initialize();
  CHECK(rig.tpe.real_buffer().size() == 100);
  CHECK(rig.budget->used() == 100);
  CHECK(rig.env.step_count() == 100);
  CHECK_FALSE(rig.tpe.model_fitted());  // model_epochs = 0 in this config
}

TEST_CASE("initialize: empty init leaves n = 0 and the model unfitted") {
  TpeConfig c = small_config();
  StubRig rig(c, 1000);
  rig.tpe.initialize();
  CHECK(rig.tpe.real_buffer().size() == 0);
  CHECK(rig.budget->used() == 0);
  CHECK_FALSE(rig.tpe.model_fitted());
}

TEST_CASE("initialize: oversized init is rejected up front") {
  TpeConfig c = small_config();
  c.init_samples = 2000;
  StubEnv env;
  DdpgController ctrl(env.spec(), stub_ctrl_params(), 20);
  DynamicsModel model(env.spec(), {{4}, 1e-3, 8}, 21);
  auto budget = std::make_shared<SampleBudget>(1000);
  CHECK_THROWS_AS(Tpe(c, env, ctrl, model, budget, 22), std::invalid_argument);
}

TEST_CASE("initialize: fixed seed reproduces the buffer exactly") {
  TpeConfig c = small_config();
  c.init_samples = 50;
  StubRig a(c, 1000, 33), b(c, 1000, 33);
  a.tpe.initialize();
  b.tpe.initialize();
  REQUIRE(a.tpe.real_buffer().size() == b.tpe.real_buffer().size());
  for (std::size_t i = 0; i < a.tpe.real_buffer().size(); ++i) {
    CHECK(a.tpe.real_buffer().at(i).state == b.tpe.real_buffer().at(i).state);
    CHECK(a.tpe.real_buffer().at(i).action == b.tpe.real_buffer().at(i).action);
    CHECK(a.tpe.real_buffer().at(i).reward == b.tpe.real_buffer().at(i).reward);
  }
}

TEST_CASE("step: real-sample accounting adds exactly k_real until the cap") {
  TpeConfig c = small_config();
  c.init_samples = 5;
  StubRig rig(c, 38);  // 5 init + 3 steps of 10 + a final partial 3
  rig.tpe.initialize();
  TpeAction all_real{0.0, 0.0, 1.0};

  for (int s = 0; s < 3; ++s) {
    long before = rig.budget->used();
    auto rep = rig.tpe.step(all_real);
    CHECK(rig.budget->used() - before == 10);
    CHECK(rep.real_samples_used_total == rig.budget->used());
    CHECK_FALSE(rep.done);
  }
  auto rep = rig.tpe.step(all_real);
  CHECK(rep.done);
  CHECK(rig.budget->used() == 38);
  CHECK(rig.env.step_count() == 38);
  CHECK_THROWS_AS(rig.tpe.step(all_real), std::logic_error);
}

TEST_CASE("step: the all-real action touches no cyber machinery") {
  TpeConfig c = small_config();
  c.init_samples = 10;
  StubRig rig(c, 200);
  rig.tpe.initialize();
  auto rep = rig.tpe.step(TpeAction{0.5, 0.5, 1.0});
  CHECK(rep.cyber_samples_this_step == 0);
  CHECK(rig.tpe.cyber_buffer().size() == 0);
}

TEST_CASE("step: cyber sampling is skipped while the model is unfitted") {
  TpeConfig c = small_config();  // model_epochs = 0, so never fitted
  c.init_samples = 10;
  StubRig rig(c, 200);
  rig.tpe.initialize();
  auto rep = rig.tpe.step(TpeAction{0.5, 0.5, 0.5});
  CHECK(rep.cyber_samples_this_step == 0);
  CHECK(rig.tpe.cyber_skipped_unfitted() == 1);
}

TEST_CASE("step: cyber samples land in the cyber buffer once the model is fit") {
  TpeConfig c = small_config();
  c.init_samples = 20;
  c.model_epochs = 1;
  StubRig rig(c, 500);
  rig.tpe.initialize();
  CHECK(rig.tpe.model_fitted());
  auto rep = rig.tpe.step(TpeAction{0.5, 0.5, 0.5});
  CHECK(rep.cyber_samples_this_step == 10);
  CHECK(rig.tpe.cyber_buffer().size() == 10);
  CHECK(rig.env.step_count() == 30);  // cyber stepping never hits the real env
}

TEST_CASE("finalize_step: reward is the sign of the sampling-reward change") {
  TpeConfig c = small_config();
  StubRig rig(c, 1000);
  rig.tpe.initialize();

  Tpe::RealCollection col;
  col.count = 1;
  col.mean_reward = 3.0;
  CHECK(rig.tpe.finalize_step(col, 0).reward == 1);  // 3 > initial 0
  col.mean_reward = 5.0;
  CHECK(rig.tpe.finalize_step(col, 0).reward == 1);  // 5 > 3
  col.mean_reward = 5.0;
  CHECK(rig.tpe.finalize_step(col, 0).reward == 0);  // equal
  col.mean_reward = 2.0;
  auto rep = rig.tpe.finalize_step(col, 0);
  CHECK(rep.reward == -1);  // 2 < 5
  CHECK(rep.raw_avg_reward == 2.0);
}

TEST_CASE("step: mean sampling reward over the collected transitions") {
  TpeConfig c = small_config();
  c.k_real = 2;
  StubRig rig(c, 100);
  rig.env.scripted_rewards = {-1.0, -3.0};
  rig.tpe.initialize();
  auto rep = rig.tpe.step(TpeAction{0.0, 0.0, 1.0});
  CHECK(rep.raw_avg_reward == doctest::Approx(-2.0));
  CHECK(rig.tpe.last_avg_reward() == doctest::Approx(-2.0));
}

TEST_CASE("observation: constant, last-reward, and sample-ratio designs") {
  SUBCASE("constant mode always reads zero") {
    TpeConfig c = small_config();
    c.obs_mode = TpeObsMode::Constant;
    StubRig rig(c, 100);
    rig.tpe.initialize();
    CHECK(rig.tpe.observation() == 0.0);
    rig.tpe.step(TpeAction{0.0, 0.0, 1.0});
    CHECK(rig.tpe.observation() == 0.0);
  }
  SUBCASE("sample-ratio mode reads n / N") {
    TpeConfig c = small_config();
    c.init_samples = 500;
    c.obs_mode = TpeObsMode::SampleRatio;
    StubRig rig(c, 1000);
    rig.tpe.initialize();
    CHECK(rig.tpe.observation() == doctest::Approx(0.5));
  }
  SUBCASE("last-reward mode reads the latest average sampling reward") {
    TpeConfig c = small_config();
    c.k_real = 2;
    c.obs_mode = TpeObsMode::LastAvgReward;
    StubRig rig(c, 100);
    rig.env.scripted_rewards = {-1.0, -3.0};
    rig.tpe.initialize();
    rig.tpe.step(TpeAction{0.0, 0.0, 1.0});
    CHECK(rig.tpe.observation() == doctest::Approx(-2.0));
  }
}

TEST_CASE("budget conservation: random actions never overdraw") {
  TpeConfig c = small_config();
  c.init_samples = 17;
  c.k_real = 7;
  StubRig rig(c, 17 + 7 * 25);
  rig.tpe.initialize();
  RngStream rng(55);
  const double grid[] = {0.2, 0.4, 0.6, 0.8, 1.0};
  long expected = 17;
  while (!rig.tpe.done()) {
    TpeAction a{grid[rng.uniform_int(5)], grid[rng.uniform_int(5)], grid[rng.uniform_int(5)]};
    rig.tpe.step(a);
    expected += 7;
    CHECK(rig.budget->used() <= rig.budget->limit());
    CHECK(rig.env.step_count() == rig.budget->used());
  }
  CHECK(rig.budget->used() == expected);
  CHECK(rig.budget->used() == rig.budget->limit());
}

}  // TEST_SUITE
