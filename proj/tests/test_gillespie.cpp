#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "mjp/gillespie.hpp"
#include "support.hpp"

namespace mjp {
namespace {

TEST(SimulatePath, ZeroRatesGiveNoEvents) {
  const ModelSpec m = testing::oregonator().model;
  Rng rng = make_rng(1);
  const std::vector<double> theta(5, 0.0);
  const Path p = simulate_path(m, theta, State{5, 5, 5}, 0.0, 10.0, rng);
  EXPECT_TRUE(p.events.empty());
  EXPECT_EQ(p.start, (State{5, 5, 5}));
}

TEST(SimulatePath, PureBirthCountIsPoisson) {
  const ModelSpec m = testing::immigration_death();
  Rng rng = make_rng(2);
  const std::vector<double> theta{50.0, 0.0};
  const int reps = 2000;
  double sum = 0.0;
  for (int k = 0; k < reps; ++k) sum += static_cast<double>(simulate_path(m, theta, State{0}, 0.0, 1.0, rng).num_events());
  EXPECT_NEAR(sum / reps, 50.0, 3.0 * std::sqrt(50.0) / std::sqrt(static_cast<double>(reps)));
}

TEST(SimulatePath, ImmigrationDeathStationaryMean) {
  const ModelSpec m = testing::immigration_death();
  Rng rng = make_rng(3);
  const std::vector<double> theta{10.0, 1.0};
  const Path p = simulate_path(m, theta, State{10}, 0.0, 5000.0, rng);
  // Time average over unit cells after a burn-in of 100.
  std::vector<double> cells;
  State y = p.start;
  std::size_t k = 0;
  for (int cell = 0; cell < 5000; ++cell) {
    double integral = 0.0, t = cell;
    for (; k < p.events.size() && p.events[k].time <= cell + 1.0; ++k) {
      integral += static_cast<double>(y[0]) * (p.events[k].time - t);
      t = p.events[k].time;
      apply_reaction_inplace(y, m.jump, p.events[k].reaction);
    }
    integral += static_cast<double>(y[0]) * (cell + 1.0 - t);
    if (cell >= 100) cells.push_back(integral);
  }
  const double mean = std::accumulate(cells.begin(), cells.end(), 0.0) / static_cast<double>(cells.size());
  EXPECT_NEAR(mean, 10.0, 3.0 * testing::batch_means_se(cells));
}

TEST(SimulatePath, FirstWaitingTimeIsExponential) {
  const ModelSpec m = testing::oregonator().model;
  const std::vector<double> theta{0.1, 0.1, 2.5, 0.04, 1.0};
  const State y0{4, 6, 3};
  double mu0 = 0.0;
  for (std::size_t i = 0; i < 5; ++i) mu0 += theta[i] * standardized_intensity(m, i, 0.0, y0);
  Rng rng = make_rng(4);
  std::vector<double> waits;
  for (int k = 0; k < 10000; ++k) {
    try {
      simulate_path(m, theta, y0, 0.0, 100.0, rng, 1);
      FAIL() << "expected a second event within the horizon";
    } catch (const EventCapExceeded& e) {
      waits.push_back(e.partial_path().events.front().time);
    }
  }
  const double d = testing::ks_statistic(waits, [mu0](double x) { return 1.0 - std::exp(-mu0 * x); });
  EXPECT_GT(testing::ks_pvalue(d, waits.size()), 0.01);
}

TEST(SimulatePath, PathsAreValidAndReproducible) {
  const ModelSpec m = testing::oregonator().model;
  const std::vector<double> theta{0.1, 0.1, 2.5, 0.04, 1.0};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng a = make_rng(seed), b = make_rng(seed);
    const Path p = simulate_path(m, theta, State{10, 10, 10}, 0.0, 5.0, a);
    EXPECT_TRUE(is_valid_path(m, p));
    EXPECT_EQ(p, simulate_path(m, theta, State{10, 10, 10}, 0.0, 5.0, b));
  }
}

TEST(SimulatePath, EventCapCarriesPartialPath) {
  const ModelSpec m = testing::immigration_death();
  Rng rng = make_rng(5);
  const std::vector<double> theta{1000.0, 0.0};
  try {
    simulate_path(m, theta, State{0}, 0.0, 10.0, rng, 100);
    FAIL() << "expected EventCapExceeded";
  } catch (const EventCapExceeded& e) {
    EXPECT_EQ(e.partial_path().events.size(), 100u);
  }
}

TEST(SimulatePath, TimeDependentIntensityStaysValid) {
  ModelSpec m = testing::immigration_death();
  m.intensity[0].time.kind = TimeFactorKind::linear;
  Rng rng = make_rng(6);
  const std::vector<double> theta{5.0, 1.0};
  const Path p = simulate_path(m, theta, State{0}, 1.0, 10.0, rng);
  EXPECT_TRUE(is_valid_path(m, p));
  EXPECT_GT(p.num_events(), 0u);
}

TEST(EqualRatePath, NoViableReactionGivesEmptyPath) {
  const ModelSpec m = testing::birth_death(0);
  Rng rng = make_rng(7);
  EXPECT_TRUE(simulate_equal_rate_path(m, State{0}, 0.0, 1.0, rng).events.empty());
}

TEST(EqualRatePath, OneViableTypeIsPoissonOne) {
  ModelSpec m = testing::immigration_death();
  m.intensity[1].factors.front().constant = -1'000'000;  // death never viable
  Rng rng = make_rng(8);
  const int reps = 20000;
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < reps; ++k) {
    const double n = static_cast<double>(simulate_equal_rate_path(m, State{0}, 0.0, 1.0, rng).num_events());
    sum += n;
    sq += n * n;
  }
  const double mean = sum / reps;
  EXPECT_NEAR(mean, 1.0, 3.0 / std::sqrt(static_cast<double>(reps)));
  EXPECT_NEAR(sq / reps - mean * mean, 1.0, 0.05);
}

TEST(EqualRatePath, EachViableTypeContributesUnitRate) {
  ModelSpec m;
  m.species = {"A", "B", "C"};
  m.reactions = {"a", "b", "c"};
  m.jump = IntMatrix::identity(3);
  m.intensity.assign(3, IntensityForm{});
  m.init.ranges.assign(3, {0, 0});
  m.error.observed.assign(3, true);
  Rng rng = make_rng(9);
  const int reps = 20000;
  double sum = 0.0;
  for (int k = 0; k < reps; ++k)
    sum += static_cast<double>(simulate_equal_rate_path(m, State{0, 0, 0}, 0.0, 2.0, rng).num_events());
  // Rate 1 / (b - a) per type over a horizon of b - a.
  EXPECT_NEAR(sum / reps, 3.0, 3.0 * std::sqrt(3.0 / reps));
}

}  // namespace
}  // namespace mjp
