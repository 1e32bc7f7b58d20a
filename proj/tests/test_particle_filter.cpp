#include <doctest.h>

#include <numeric>
#include <stdexcept>

#include "uwbloc/particle_filter.hpp"

using namespace uwbloc;

namespace {

const Environment kRoom;

double weight_sum(const ParticleFilter& pf)
{
  return std::accumulate(pf.weights().begin(), pf.weights().end(), 0.0);
}

}  // namespace

TEST_CASE("pf_init population")
{
  const auto pf = pf_init(kRoom, 500.0, RandomStream(1));
  CHECK(pf.size() == 4500);
  for (double w : pf.weights()) CHECK(w == doctest::Approx(1.0 / 4500.0));
  for (const auto& p : pf.positions()) CHECK(kRoom.contains(p));
  CHECK(pf_init(Environment(1.0, 1.0), 1.0, RandomStream(1)).size() == 1);
  CHECK(pf_init(Environment(1.0, 1.0), 0.1, RandomStream(1)).size() == 1);
  CHECK_THROWS_AS(pf_init(kRoom, 0.0, RandomStream(1)), std::invalid_argument);
}

TEST_CASE("adapted_count bounds")
{
  const ParticleFilterOptions opt;
  CHECK(adapted_count(0.0, opt, 4500) == 100);
  CHECK(adapted_count(1e-6, opt, 4500) == 100);
  CHECK(adapted_count(10.0, opt, 4500) == 4500);
  CHECK(adapted_count(0.1, opt, 4500) == 500);
  CHECK(adapted_count(0.0, opt, 50) == 50);
  std::size_t last = 0;
  for (double s = 0.0; s < 2.0; s += 0.01) {
    const std::size_t n = adapted_count(s, opt, 4500);
    CHECK(n >= last);
    CHECK(n >= 100);
    CHECK(n <= 4500);
    last = n;
  }
}

TEST_CASE("pf converges on noiseless data and keeps its invariants")
{
  const auto a = make_ula(6, 1.0, { 1.5, 0.0 });
  const LikelihoodSpec spec;
  const auto pairs = make_pairs(spec.pairing, a.size());
  const NoiseModel noise{ spec.sigma_t, spec.sigma_theta, 0, 0 };
  for (const Position truth : { Position{ 1.5, 1.5 }, Position{ 0.7, 2.4 }, Position{ 2.3, 0.9 } }) {
    auto pf = pf_init(kRoom, 500.0, RandomStream(7));
    RandomStream quiet(0);
    const auto m = sample_measurements(truth, a, pairs, {}, quiet);
    for (int k = 0; k < 5; ++k) {
      pf_update(pf, m, a, spec);
      CHECK(weight_sum(pf) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(pf.size() >= pf.min_count());
      CHECK(pf.size() <= pf.initial_count());
      for (const auto& p : pf.positions()) CHECK(kRoom.contains(p));
    }
    CHECK(distance(pf.estimate(), truth) < 0.01);
    CHECK(pf.size() < pf.initial_count());
    (void)noise;
  }
}

TEST_CASE("pf is deterministic for a fixed seed")
{
  const auto a = make_ula(6, 1.0, { 1.5, 0.0 });
  const LikelihoodSpec spec;
  const auto pairs = make_pairs(spec.pairing, a.size());
  const NoiseModel noise{ spec.sigma_t, spec.sigma_theta, 0, 0 };
  auto run = [&] {
    auto pf = pf_init(kRoom, 500.0, RandomStream(21));
    RandomStream meas_rng(22);
    std::vector<Position> out;
    for (int k = 0; k < 6; ++k) out.push_back(pf_update(pf, sample_measurements({ 1.1, 1.9 }, a, pairs, noise, meas_rng), a, spec));
    out.push_back({ pf.spread(), static_cast<double>(pf.size()) });
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("pf_adapt resizes to the adapted count")
{
  const auto a = make_ula(6, 1.0, { 1.5, 0.0 });
  const LikelihoodSpec spec;
  ParticleFilterOptions opt;
  opt.adaptive = false;
  auto pf = pf_init(kRoom, 500.0, RandomStream(3), opt);
  RandomStream quiet(0);
  const auto m = sample_measurements({ 1.5, 1.5 }, a, make_pairs(spec.pairing, 6), {}, quiet);
  pf_update(pf, m, a, spec);
  CHECK(pf.size() == 4500);
  pf_adapt(pf);
  CHECK(pf.size() == adapted_count(pf.spread(), opt, 4500));
  CHECK(weight_sum(pf) == doctest::Approx(1.0).epsilon(1e-9));
}
