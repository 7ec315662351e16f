#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "markovloss/errors.hpp"
#include "markovloss/hmm.hpp"
#include "oracles.hpp"

using namespace markovloss;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

HmmSpec symmetric_two_state() {
  HmmSpec m;
  m.initial = {0.5, 0.5};
  m.transitions = {0.9, 0.1, 0.1, 0.9};
  m.emissions = {EmissionModel{0.0, 1.0}, EmissionModel{0.0, 1.0}};
  return m;
}

// Observation y has likelihood 1 under state y and 0 otherwise.
LogLikelihoods indicator_likelihoods(const std::vector<int>& obs, std::size_t k) {
  LogLikelihoods ll(obs.size(), k);
  for (std::size_t i = 0; i < obs.size(); ++i)
    for (std::size_t j = 0; j < k; ++j) ll(i, j) = static_cast<std::size_t>(obs[i]) == j ? 0.0 : kNegInf;
  return ll;
}

HmmSpec uniform_chain(std::size_t k) {
  HmmSpec m;
  m.initial.assign(k, 1.0 / static_cast<double>(k));
  m.transitions.assign(k * k, 1.0 / static_cast<double>(k));
  m.emissions.assign(k, EmissionModel{0.0, 1.0});
  return m;
}

}  // namespace

TEST_CASE("emission mixture density") {
  EmissionModel plain{1.0, 2.0};
  CHECK(plain.log_density(1.0) == doctest::Approx(-0.5 * std::log(2.0 * M_PI * 2.0)).epsilon(1e-14));

  EmissionModel mix{0.0, 1.0, 0.25, 3.0, 4.0};
  const double y = 0.7;
  const double expect = 0.75 * std::exp(-0.5 * y * y) / std::sqrt(2 * M_PI) +
                        0.25 * std::exp(-0.5 * (y - 3.0) * (y - 3.0) / 4.0) / std::sqrt(2 * M_PI * 4.0);
  CHECK(std::exp(mix.log_density(y)) == doctest::Approx(expect).epsilon(1e-13));
  // Far tail stays finite thanks to the wide component.
  CHECK(std::isfinite(mix.log_density(1e6)));
}

TEST_CASE("model validation") {
  HmmSpec m = symmetric_two_state();
  CHECK_NOTHROW(m.validate());

  auto bad = m;
  bad.initial = {0.6, 0.5};
  CHECK_THROWS_AS(bad.validate(), ModelError);
  bad = m;
  bad.transitions = {0.9, 0.1, 0.2, 0.9};
  CHECK_THROWS_AS(bad.validate(), ModelError);
  bad = m;
  bad.emissions[1].main_var = 0.0;
  CHECK_THROWS_AS(bad.validate(), ModelError);
  bad = m;
  bad.initial = {1.0};
  bad.transitions = {1.0};
  bad.emissions.resize(1);
  CHECK_THROWS_AS(bad.validate(), ModelError);
}

TEST_CASE("forward_backward: single position with identical emissions is uniform") {
  const std::vector<double> y{0.3};
  const auto post = forward_backward(symmetric_two_state(), y);
  CHECK(post.length == 1);
  CHECK(post.pairwise.empty());
  CHECK(post.unary_at(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(post.unary_at(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("forward_backward: deterministic emissions give indicator posteriors") {
  const auto post = forward_backward(symmetric_two_state(), indicator_likelihoods({0, 1, 0}, 2));
  const double expect[3][2] = {{1, 0}, {0, 1}, {1, 0}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) CHECK(post.unary_at(i, j) == expect[i][j]);
}

TEST_CASE("forward_backward: frozen two-state fixture matches path enumeration") {
  // Four observations drawn once from the outlier-contaminated two-state
  // model; expected values from a separate NumPy enumeration of all 16 paths.
  const std::vector<double> y{2.077471, 0.71269, 0.985147, -0.900724};
  const auto post = forward_backward(two_state_cnv_model(0.01), y);

  const double unary[4][2] = {{0.24779581927974212, 0.75220418072025796},
                              {0.30542193703846271, 0.69457806296153746},
                              {0.37397045947161661, 0.62602954052838344},
                              {0.48188866271060837, 0.51811133728939163}};
  const double pair[3][4] = {
      {0.24626211037759024, 0.0015337089021518727, 0.059159826660872453, 0.69304435405938547},
      {0.30397979181176366, 0.0014421452266990663, 0.069990667659852929, 0.62458739530168439},
      {0.37302831836589334, 0.00094214110572324187, 0.10886034434471507, 0.51716919618366841}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) CHECK(post.unary_at(i, j) == doctest::Approx(unary[i][j]).epsilon(1e-12));
  for (int i = 0; i < 3; ++i)
    for (int p = 0; p < 4; ++p) CHECK(post.pair_slab(i)[p] == doctest::Approx(pair[i][p]).epsilon(1e-12));
  CHECK(post.log_evidence == doctest::Approx(-6.2965919712039291).epsilon(1e-13));

  // And the in-tree enumeration oracle agrees on the same fixture.
  const auto model = two_state_cnv_model(0.01);
  const auto e = oracle::enumerate(model, model.log_likelihoods(y));
  for (std::size_t v = 0; v < post.unary.size(); ++v) CHECK(post.unary[v] == doctest::Approx(e.marginals.unary[v]).epsilon(1e-12));
}

TEST_CASE("forward_backward: random models against enumeration") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t k = 2 + trial % 2;
    const std::size_t n = 1 + trial % 7;
    const auto model = oracle::random_model(rng, k);
    const auto y = oracle::random_observations(rng, n);
    const auto ll = model.log_likelihoods(y);
    const auto post = forward_backward(model, ll);
    const auto e = oracle::enumerate(model, ll);
    for (std::size_t v = 0; v < post.unary.size(); ++v) CHECK(std::abs(post.unary[v] - e.marginals.unary[v]) < 1e-10);
    for (std::size_t v = 0; v < post.pairwise.size(); ++v)
      CHECK(std::abs(post.pairwise[v] - e.marginals.pairwise[v]) < 1e-10);
    CHECK(std::abs(std::exp(post.log_evidence) / e.evidence - 1.0) < 1e-8);
  }
}

TEST_CASE("forward_backward: marginalization consistency property") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 2 + static_cast<std::size_t>(trial % 4);
    const std::size_t n = 1 + static_cast<std::size_t>(rng() % 64);
    const auto model = oracle::random_model(rng, k);
    const auto post = forward_backward(model, oracle::random_observations(rng, n));
    REQUIRE(post.max_consistency_error() < 1e-10);
  }
}

TEST_CASE("forward_backward: long sequences do not underflow") {
  std::mt19937_64 rng(13);
  const auto model = two_state_cnv_model(0.01);
  std::normal_distribution<double> d(0.5, 1.0);
  std::vector<double> y(5000);
  for (double& v : y) v = d(rng);
  const auto post = forward_backward(model, y);
  CHECK(std::isfinite(post.log_evidence));
  CHECK(post.log_evidence < -1000.0);
  CHECK(post.max_consistency_error() < 1e-10);
}

TEST_CASE("forward_backward: invariant to per-position likelihood scaling") {
  std::mt19937_64 rng(14);
  const auto model = oracle::random_model(rng, 3);
  const auto ll = model.log_likelihoods(oracle::random_observations(rng, 40));
  auto shifted = ll;
  std::uniform_real_distribution<double> shift(-300.0, 300.0);
  for (std::size_t i = 0; i < shifted.length; ++i) {
    const double c = shift(rng);
    for (std::size_t j = 0; j < shifted.num_states; ++j) shifted(i, j) += c;
  }
  const auto a = forward_backward(model, ll);
  const auto b = forward_backward(model, shifted);
  for (std::size_t v = 0; v < a.unary.size(); ++v) CHECK(std::abs(a.unary[v] - b.unary[v]) < 1e-9);
  for (std::size_t v = 0; v < a.pairwise.size(); ++v) CHECK(std::abs(a.pairwise[v] - b.pairwise[v]) < 1e-9);
}

TEST_CASE("forward_backward: unreachable states get exact zeros") {
  HmmSpec m = symmetric_two_state();
  m.initial = {1.0, 0.0};
  m.transitions = {1.0, 0.0, 0.5, 0.5};
  const auto post = forward_backward(m, std::vector<double>{0.1, 2.0, -1.0});
  for (std::size_t i = 0; i < 3; ++i) CHECK(post.unary_at(i, 1) == 0.0);
  CHECK(post.pair_at(0, 0, 1) == 0.0);
  CHECK(post.pair_at(1, 1, 1) == 0.0);
}

TEST_CASE("forward_backward: error paths") {
  const auto m = symmetric_two_state();
  CHECK_THROWS_AS(forward_backward(m, std::vector<double>{}), InputError);
  CHECK_THROWS_AS(forward_backward(m, std::vector<double>{0.0, std::nan("")}), InputError);
  CHECK_THROWS_AS(forward_backward(m, std::vector<double>{0.0, INFINITY}), InputError);
  auto bad = m;
  bad.emissions[0].main_var = -1.0;
  CHECK_THROWS_AS(forward_backward(bad, std::vector<double>{0.0}), ModelError);
  // Every state impossible at position 2.
  LogLikelihoods ll(2, 2);
  ll(1, 0) = ll(1, 1) = kNegInf;
  CHECK_THROWS_AS(forward_backward(m, ll), ConsistencyError);
}

TEST_CASE("viterbi: deterministic emissions recover the only feasible path") {
  CHECK(viterbi(symmetric_two_state(), indicator_likelihoods({0, 1, 1, 0}, 2)) == StatePath{0, 1, 1, 0});
}

TEST_CASE("viterbi: total tie resolves to all-null path") {
  for (std::size_t k : {2u, 3u, 4u}) {
    CHECK(viterbi(uniform_chain(k), std::vector<double>{0.2, -1.0, 3.0, 0.0, 0.5}) == StatePath(5, 0));
  }
}

TEST_CASE("viterbi: single position is the unary argmax") {
  auto m = symmetric_two_state();
  m.emissions[1].main_mean = 2.0;
  CHECK(viterbi(m, std::vector<double>{1.9}) == StatePath{1});
  CHECK(viterbi(m, std::vector<double>{0.1}) == StatePath{0});
}

TEST_CASE("viterbi: matches brute-force argmax") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = trial == 0 ? 3 : 2 + static_cast<std::size_t>(trial % 2);
    const std::size_t n = trial == 0 ? 6 : 1 + static_cast<std::size_t>(trial % 8);
    const auto model = oracle::random_model(rng, k);
    const auto y = oracle::random_observations(rng, n);
    const auto ll = model.log_likelihoods(y);
    const auto path = viterbi(model, ll);
    const auto e = oracle::enumerate(model, ll);
    CHECK(path == e.argmax);
    // Optimality against every enumerable path.
    const double best = log_joint(model, path, ll);
    oracle::for_each_path(k, n, [&](const StatePath& p) { CHECK(best >= log_joint(model, p, ll) - 1e-12); });
  }
}

TEST_CASE("log_joint") {
  const auto m = symmetric_two_state();
  const double d = std::exp(m.emissions[0].log_density(0.4));
  CHECK(log_joint(m, StatePath{1}, std::vector<double>{0.4}) == doctest::Approx(std::log(0.5 * d)).epsilon(1e-14));

  HmmSpec blocked = m;
  blocked.transitions = {1.0, 0.0, 0.5, 0.5};
  CHECK(log_joint(blocked, StatePath{0, 1}, std::vector<double>{0.0, 0.0}) == kNegInf);

  CHECK_THROWS_AS(log_joint(m, StatePath{0, 1}, std::vector<double>{0.0}), InputError);

  // Independent re-summation of factor logs.
  std::mt19937_64 rng(16);
  const auto model = oracle::random_model(rng, 3);
  const auto y = oracle::random_observations(rng, 9);
  const StatePath path{0, 2, 2, 1, 0, 0, 1, 2, 1};
  double expect = std::log(model.initial[0]) + model.emissions[0].log_density(y[0]);
  for (std::size_t i = 1; i < y.size(); ++i) {
    expect += std::log(model.transition(static_cast<std::size_t>(path[i - 1]), static_cast<std::size_t>(path[i])));
    expect += model.emissions[static_cast<std::size_t>(path[i])].log_density(y[i]);
  }
  CHECK(log_joint(model, path, y) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("evidence equals the sum of path joints") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t k = 2 + static_cast<std::size_t>(trial % 2);
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 8);
    const auto model = oracle::random_model(rng, k);
    const auto ll = model.log_likelihoods(oracle::random_observations(rng, n));
    double z = 0.0;
    oracle::for_each_path(k, n, [&](const StatePath& p) { z += std::exp(log_joint(model, p, ll)); });
    CHECK(std::abs(std::exp(forward_backward(model, ll).log_evidence) / z - 1.0) < 1e-8);
  }
}
