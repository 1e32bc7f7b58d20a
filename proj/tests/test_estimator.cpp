#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "uwbloc/estimator.hpp"
#include "uwbloc/experiments.hpp"
#include "uwbloc/random.hpp"

using namespace uwbloc;

namespace {

const Environment kRoom;

MeasurementSet noiseless(const Position& p, const AnchorArray& a, PairingScheme scheme = PairingScheme::Reference)
{
  RandomStream rng(0);
  return sample_measurements(p, a, make_pairs(scheme, a.size()), {}, rng);
}

}  // namespace

TEST_CASE("likelihood vanishes at the truth")
{
  const auto a = make_ula(6, 1.0, { 1.5, 0.0 });
  const LikelihoodSpec spec;
  RandomStream rng(3);
  for (int k = 0; k < 50; ++k) {
    const Position p{ rng.uniform(0, 3), rng.uniform(0.1, 3) };
    const auto m = noiseless(p, a);
    CHECK(neg_log_likelihood(p, m, a, spec) < 1e-12);
    CHECK(neg_log_likelihood({ p.x + 0.05, p.y }, m, a, spec) > 0.0);
    const LikelihoodEvaluator eval(m, a, spec);
    CHECK(eval.dimension() == 10);
    const Position q{ rng.uniform(0, 3), rng.uniform(0, 3) };
    CHECK(eval(q) == doctest::Approx(neg_log_likelihood(q, m, a, spec)).epsilon(1e-12));
  }
}

TEST_CASE("likelihood hand oracle")
{
  // One pair, TDoA off by one sigma and PDoA off by two sigmas: 1 + 4.
  const AnchorArray a({ { 0.0, 0.0 }, { 1.0, 0.0 } });
  const Position p{ 0.0, 3.0 };
  LikelihoodSpec spec;
  MeasurementSet m;
  m.pairs = { { 0, 1 } };
  m.tdoa = { expected_tdoa(p, a, 0, 1) + spec.sigma_t };
  m.pdoa = { wrap_phase(expected_pdoa(p, a, 0, 1) - 2.0 * spec.sigma_theta) };
  CHECK(neg_log_likelihood(p, m, a, spec) == doctest::Approx(5.0).epsilon(1e-9));
  spec.modality = Modality::TdoaOnly;
  CHECK(neg_log_likelihood(p, m, a, spec) == doctest::Approx(1.0).epsilon(1e-9));
  spec.modality = Modality::PdoaOnly;
  CHECK(neg_log_likelihood(p, m, a, spec) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(spec.dimension(5) == 5);
}

TEST_CASE("pairing mismatch and bad sigmas throw")
{
  const auto a = make_ula(4, 1.0, { 1.5, 0.0 });
  const auto m = noiseless({ 1.0, 1.0 }, a, PairingScheme::Reference);
  LikelihoodSpec spec;
  spec.pairing = PairingScheme::AllPairs;
  CHECK_THROWS_AS(neg_log_likelihood({ 1.0, 1.0 }, m, a, spec), std::invalid_argument);
  CHECK_THROWS_AS(check_consistent(m, a, spec), std::invalid_argument);
  spec.pairing = PairingScheme::Reference;
  spec.sigma_t = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("grid search recovers grid nodes exactly")
{
  const auto a = make_ula(6, 1.0, { 1.5, 0.0 });
  const LikelihoodSpec spec;
  const LikelihoodGrid grid(kRoom, 0.05, a, spec.pairing, true);
  RandomStream rng(8);
  for (int k = 0; k < 20; ++k) {
    const auto idx = static_cast<std::size_t>(rng.uniform(0.0, static_cast<double>(grid.size())));
    const Position p = grid.point(idx);
    const auto m = noiseless(p, a);
    CHECK(grid.argmin(m, spec) == idx);
    CHECK(distance(grid_search_locate(m, a, kRoom, 0.05, spec), p) < 1e-12);
  }
}

TEST_CASE("off-grid truth: the argmin node scores no worse than the nearest node and stays close")
{
  // The phase lobes are a few mm wide and elongated along range, so the argmin is not always the
  // Euclidean-nearest node; it must still score at most as much and sit inside the truth lobe.
  const auto a = make_ula(6, 1.0, { 1.5, 0.0 });
  const LikelihoodSpec spec;
  const double res = 0.002;
  const LikelihoodGrid grid(kRoom, res, a, spec.pairing, true);
  const auto shape = grid.shape();
  RandomStream rng(12);
  for (int k = 0; k < 10; ++k) {
    const Position p{ rng.uniform(0.2, 2.8), rng.uniform(0.5, 2.8) };
    const auto m = noiseless(p, a);
    const auto nearest = static_cast<std::size_t>(p.y / res) * shape.nx + static_cast<std::size_t>(p.x / res);
    REQUIRE(distance(grid.point(nearest), p) <= res * std::sqrt(2.0) / 2.0 + 1e-12);
    const std::size_t best = grid.argmin(m, spec);
    const auto scores = grid.score_all(m, spec);
    CHECK(scores[best] <= scores[nearest]);
    CHECK(distance(grid.point(best), p) < 0.01);
  }
}

TEST_CASE("refinement from the coarse search closes the gap on noiseless data")
{
  const auto a = make_ula(6, 1.0, { 1.5, 0.0 });
  const LikelihoodSpec spec;
  const LikelihoodGrid grid(kRoom, 0.01, a, spec.pairing, true);
  RandomStream rng(12);
  for (int k = 0; k < 20; ++k) {
    const Position p{ rng.uniform(0.2, 2.8), rng.uniform(0.5, 2.8) };
    CHECK(distance(grid_refined_locate(grid, noiseless(p, a), spec), p) < 1e-6);
  }
}

TEST_CASE("score_all agrees with the direct likelihood")
{
  const auto a = make_ula(4, 1.0, { 1.5, 0.0 });
  const LikelihoodSpec spec;
  const LikelihoodGrid grid(kRoom, 0.25, a, spec.pairing, true);
  RandomStream rng(2);
  const auto m = sample_measurements({ 1.3, 1.1 }, a, make_pairs(spec.pairing, 4),
                                     { 150e-12, deg2rad(5.0), 0, 0 }, rng);
  const auto s = grid.score_all(m, spec);
  REQUIRE(s.size() == grid.size());
  for (std::size_t k = 0; k < s.size(); ++k)
    CHECK(s[k] == doctest::Approx(neg_log_likelihood(grid.point(k), m, a, spec)).epsilon(1e-9));
}

TEST_CASE("fixed-seed estimator regression")
{
  // 6-anchor 1 m ULA, tag at (1.5, 2.0), default noise, stream 1234; frozen output.
  const auto a = make_ula(6, 1.0, { 1.5, 0.0 });
  const LikelihoodSpec spec;
  const LikelihoodGrid grid(kRoom, 0.01, a, spec.pairing, true);
  RandomStream rng(1234);
  const auto m = sample_measurements({ 1.5, 2.0 }, a, make_pairs(spec.pairing, 6),
                                     { spec.sigma_t, spec.sigma_theta, 0, 0 }, rng);
  const Position est = grid_refined_locate(grid, m, spec);
  CHECK(est.x == doctest::Approx(1.499960226234).epsilon(1e-9));
  CHECK(est.y == doctest::Approx(2.012274181988).epsilon(1e-9));
}

TEST_CASE("two-antenna phase surface is ambiguous")
{
  const auto a = make_ula(2, 1.0, { 1.5, 0.0 });
  const Position tag{ 1.5, 1.5 };
  LikelihoodSpec spec;
  spec.modality = Modality::PdoaOnly;
  const auto m = noiseless(tag, a);
  const double res = 0.002;
  const LikelihoodGrid grid(kRoom, res, a, spec.pairing, true);
  const auto minima = sub_threshold_minima(grid.score_all(m, spec), kRoom, grid.shape(), 6.635, 0.10);
  CHECK(minima.size() >= 2);

  spec.modality = Modality::Fused;
  const auto six = make_ula(6, 1.0, { 1.5, 0.0 });
  const LikelihoodGrid fused_grid(kRoom, res, six, spec.pairing, true);
  const auto fused = sub_threshold_minima(fused_grid.score_all(noiseless(tag, six), spec), kRoom,
                                          fused_grid.shape(), 23.21, 0.10);
  REQUIRE(fused.size() == 1);
  CHECK(distance(fused[0].position, tag) < 0.01);
}
