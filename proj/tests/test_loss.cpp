#include <cmath>
#include <random>

#include "doctest.h"
#include "markovloss/errors.hpp"
#include "markovloss/loss.hpp"
#include "oracles.hpp"

using namespace markovloss;

namespace {

// Distinct costs so every cell identifies its terms.
CostSet distinct_costs() {
  CostSet c;
  c.tp = 0.5;
  c.fpc = 2.0;
  c.fnc = 3.0;
  c.fpt = 5.0;
  c.fnt = 7.0;
  c.dft = 11.0;
  return c;
}

}  // namespace

TEST_CASE("binary loss matrix reproduces the six-cost table") {
  const CostSet c = distinct_costs();
  const LossMatrix l = build_binary_loss_matrix(c);
  REQUIRE(l.num_states() == 2);
  // Rows: predicted pair; columns: true pair (0,0) (0,1) (1,0) (1,1).
  const double table[4][4] = {
      {c.tp, c.fnt + c.fnc, c.fnt, c.fnc},
      {c.fpt + c.fpc, c.tp, c.dft + c.fpc, c.fpt},
      {c.fpt, c.dft + c.fnc, c.tp, c.fpt + c.fnc},
      // Call cost is charged on the second element only.
      {c.fpc, c.fnt, c.fnt + c.fpc, c.tp},
  };
  for (std::size_t p = 0; p < 4; ++p)
    for (std::size_t t = 0; t < 4; ++t) {
      CAPTURE(p);
      CAPTURE(t);
      CHECK(l.at(p, t) == table[p][t]);
    }
  CHECK(l.at(0, 1, 1, 0) == c.dft + c.fpc);
  CHECK(l.at(1, 0, 0, 0) == c.fpt);
}

TEST_CASE("multistate loss matrix") {
  CostSet c = distinct_costs();
  c.mc = 13.0;
  const LossMatrix l = build_multistate_loss_matrix(c, 3);
  CHECK(l.at(0, 1, 0, 2) == c.dft + 13.0);
  CHECK(l.at(1, 1, 2, 2) == 13.0);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) CHECK(l.at(a, b, a, b) == c.tp);

  // Restricted to states {0, 1} it is the binary matrix.
  const LossMatrix bin = build_binary_loss_matrix(c);
  for (int pa = 0; pa < 2; ++pa)
    for (int pb = 0; pb < 2; ++pb)
      for (int ta = 0; ta < 2; ++ta)
        for (int tb = 0; tb < 2; ++tb) CHECK(l.at(pa, pb, ta, tb) == bin.at(pa, pb, ta, tb));

  CHECK(build_multistate_loss_matrix(c, 2).entries() == bin.entries());
  CHECK_THROWS_AS(build_multistate_loss_matrix(c, 1), InputError);
}

TEST_CASE("miscall cost defaults to fpc") {
  CostSet c = distinct_costs();
  CHECK(c.miscall() == c.fpc);
  CHECK(build_multistate_loss_matrix(c, 3).at(2, 2, 1, 1) == c.fpc);
}

TEST_CASE("marginal_costs zeroes the transition terms") {
  const CostSet m = marginal_costs(1.0, 1.0);
  CHECK(m.tp == 0.0);
  CHECK(m.fpc == 1.0);
  CHECK(m.fnc == 1.0);
  CHECK(m.fpt == 0.0);
  CHECK(m.fnt == 0.0);
  CHECK(m.dft == 0.0);
  CHECK(m.miscall() == 1.0);
  CHECK(marginal_costs(0.1, 1.0).fpc == 0.1);
  CHECK(marginal_costs(10.0, 1.0).fpc == 10.0);
  CHECK_THROWS_AS(marginal_costs(-1.0, 1.0), InputError);
}

TEST_CASE("cost validation and warnings") {
  CostSet c;
  c.fpt = -1.0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c.fpt = NAN;
  CHECK_THROWS_AS(c.validate(), InputError);
  CostSet w;
  w.fpt = 5.0;
  w.dft = 1.0;
  CHECK(w.warnings().size() == 1);
  w.dft = 1000.0;
  CHECK(w.warnings().empty());
}

TEST_CASE("explicit matrices are validated for shape and sign") {
  CHECK_NOTHROW(LossMatrix::from_entries(2, std::vector<double>(16, 1.0)));
  CHECK_THROWS_AS(LossMatrix::from_entries(2, std::vector<double>(15, 1.0)), InputError);
  auto neg = std::vector<double>(16, 1.0);
  neg[3] = -0.1;
  CHECK_THROWS_AS(LossMatrix::from_entries(2, neg), InputError);
  auto inf = std::vector<double>(16, 1.0);
  inf[0] = INFINITY;
  CHECK_THROWS_AS(LossMatrix::from_entries(2, inf), InputError);
}

TEST_CASE("expected_loss: trivial cases") {
  std::mt19937_64 rng(21);
  const auto post = oracle::random_chain_marginals(rng, 2, 6);
  const auto zero = LossMatrix::from_entries(2, std::vector<double>(16, 0.0));
  CHECK(expected_loss(StatePath{0, 1, 1, 0, 1, 0}, post, zero) == 0.0);

  // Point mass on a path, predicted exactly.
  const StatePath truth{0, 1, 1, 0};
  PosteriorMarginals point(4, 2);
  for (std::size_t i = 0; i < 4; ++i) point.unary_at(i, static_cast<std::size_t>(truth[i])) = 1.0;
  for (std::size_t i = 0; i < 3; ++i)
    point.pair_at(i, static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(truth[i + 1])) = 1.0;
  CHECK(expected_loss(truth, point, build_binary_loss_matrix(CostSet{})) == 0.0);

  PosteriorMarginals single(1, 2);
  single.unary = {0.3, 0.7};
  CHECK(expected_loss(StatePath{1}, single, build_binary_loss_matrix(CostSet{})) == 0.0);
}

TEST_CASE("expected_loss: frozen two-state fixture with unit costs") {
  // Pairwise posteriors of the frozen four-observation fixture; the expected
  // value is an independent NumPy double sum.
  PosteriorMarginals post(4, 2);
  post.pairwise = {0.24626211037759024, 0.0015337089021518727, 0.059159826660872453, 0.69304435405938547,
                   0.30397979181176366, 0.0014421452266990663, 0.069990667659852929, 0.62458739530168439,
                   0.37302831836589334, 0.00094214110572324187, 0.10886034434471507, 0.51716919618366841};
  CHECK(expected_loss(StatePath{0, 1, 1, 0}, post, build_binary_loss_matrix(CostSet{})) ==
        doctest::Approx(3.1585424934391564).epsilon(1e-14));
}

TEST_CASE("expected_loss: equals a sum over whole truth paths") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 2 + static_cast<std::size_t>(trial % 2);
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 5);
    const auto model = oracle::random_model(rng, k);
    const auto ll = model.log_likelihoods(oracle::random_observations(rng, n));
    const auto e = oracle::enumerate(model, ll);
    const LossMatrix loss = build_multistate_loss_matrix(oracle::random_costs(rng), k);
    StatePath pred(n);
    for (int& s : pred) s = static_cast<int>(rng() % k);
    const double by_paths = oracle::expected_loss_by_paths(
        pred, e.marginals, loss, [&](const StatePath& p) { return oracle::joint_probability(model, ll, p) / e.evidence; });
    CHECK(expected_loss(pred, e.marginals, loss) == doctest::Approx(by_paths).epsilon(1e-12));
  }
}

TEST_CASE("expected_loss: additive over concatenated boundaries") {
  std::mt19937_64 rng(23);
  const auto whole = oracle::random_chain_marginals(rng, 3, 9);
  const LossMatrix loss = build_multistate_loss_matrix(oracle::random_costs(rng), 3);
  const StatePath pred{0, 1, 2, 2, 0, 0, 1, 1, 2};

  auto slice = [&](std::size_t from, std::size_t to) {  // positions [from, to)
    PosteriorMarginals part(to - from, 3);
    for (std::size_t i = from; i < to; ++i)
      for (std::size_t j = 0; j < 3; ++j) part.unary_at(i - from, j) = whole.unary_at(i, j);
    for (std::size_t i = from; i + 1 < to; ++i)
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) part.pair_at(i - from, a, b) = whole.pair_at(i, a, b);
    return part;
  };
  const double left = expected_loss(StatePath(pred.begin(), pred.begin() + 5), slice(0, 5), loss);
  const double right = expected_loss(StatePath(pred.begin() + 4, pred.end()), slice(4, 9), loss);
  CHECK(expected_loss(pred, whole, loss) == doctest::Approx(left + right).epsilon(1e-14));
}

TEST_CASE("expected_loss: dimension errors") {
  std::mt19937_64 rng(24);
  const auto post = oracle::random_chain_marginals(rng, 2, 4);
  const auto loss = build_binary_loss_matrix(CostSet{});
  CHECK_THROWS_AS(expected_loss(StatePath{0, 1}, post, loss), InputError);
  CHECK_THROWS_AS(expected_loss(StatePath{0, 1, 2, 0}, post, loss), InputError);
  CHECK_THROWS_AS(expected_loss(StatePath{0, 1, 1, 0}, post, build_multistate_loss_matrix(CostSet{}, 3)), InputError);
}

TEST_CASE("loss scaling scales expected loss") {
  std::mt19937_64 rng(25);
  const auto post = oracle::random_chain_marginals(rng, 3, 7);
  const auto loss = build_multistate_loss_matrix(oracle::random_costs(rng), 3);
  const StatePath pred{0, 0, 1, 1, 2, 0, 0};
  CHECK(expected_loss(pred, post, loss.scaled(4.0)) == doctest::Approx(4.0 * expected_loss(pred, post, loss)));
  CHECK_THROWS_AS(loss.scaled(0.0), InputError);
}
