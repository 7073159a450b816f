#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "liftsim/marginal.hpp"
#include "liftsim/naive.hpp"
#include "support/oracles.hpp"
#include "support/stats.hpp"

using namespace liftsim;

namespace {

GridStack exp_stack(std::size_t nx, std::size_t ny, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> exp1(1.0);
  GridStack stack{Grid::unit_square(nx, ny), m, {}};
  stack.values.resize(nx * ny * m);
  for (double& v : stack.values) v = exp1(rng);
  return stack;
}

}  // namespace

TEST_CASE("rank pattern by hand") {
  const std::vector<double> x{3, 1, 4, 2};
  const auto ranks = rank_pattern(x);
  CHECK(ranks == std::vector<std::uint32_t>{3, 1, 4, 2});
}

TEST_CASE("rank pattern ties broken by position and flagged") {
  const std::vector<double> x{5, 5, 2};
  std::size_t ties = 0;
  const auto ranks = rank_pattern(x, &ties);
  CHECK(ranks == std::vector<std::uint32_t>{2, 3, 1});
  CHECK(ties == 1);

  std::size_t no_ties = 7;
  rank_pattern(std::vector<double>{1, 2, 3}, &no_ties);
  CHECK(no_ties == 0);
}

TEST_CASE("rank pattern is a permutation of 1..n") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  std::vector<double> x(257);
  for (double& v : x) v = normal(rng);
  auto ranks = rank_pattern(x);
  std::sort(ranks.begin(), ranks.end());
  for (std::size_t i = 0; i < ranks.size(); ++i) CHECK(ranks[i] == i + 1);
}

TEST_CASE("apply rank pattern by hand") {
  const std::vector<double> training{3, 1, 4, 2};
  const auto out = apply_rank_pattern(training, {10, 20, 30, 40});
  CHECK(out == std::vector<double>{30, 10, 40, 20});
}

TEST_CASE("apply rank pattern keeps the source ranks exactly") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  std::vector<double> src(301), draws(301);
  for (double& v : src) v = normal(rng);
  for (double& v : draws) v = normal(rng);
  const auto out = apply_rank_pattern(src, draws);
  CHECK(rank_pattern(out) == rank_pattern(src));

  auto sorted_out = out;
  std::sort(sorted_out.begin(), sorted_out.end());
  std::sort(draws.begin(), draws.end());
  CHECK(sorted_out == draws);
}

TEST_CASE("naive resample with copied ranks preserves the pooled rank pattern") {
  const GridStack training = exp_stack(12, 12, 4, 21);
  const MarginalModel model = fit_marginal(training.values, 0.1, ShapeMethod::moment);

  std::size_t ties = 5;
  const GridStack out =
      naive_resample(training, model, RankSource::copy, DsParams{}, 77, 1, &ties);
  CHECK(out.m == training.m);
  CHECK(out.grid == training.grid);
  CHECK(ties == 0);
  CHECK(rank_pattern(out.values) == rank_pattern(training.values));
}

TEST_CASE("naive resample output is an i.i.d. model sample") {
  const GridStack training = exp_stack(20, 20, 5, 22);
  const MarginalModel model = fit_marginal(training.values, 0.1, ShapeMethod::moment);

  const GridStack out = naive_resample(training, model, RankSource::copy, DsParams{}, 101);
  const auto cdf = [&](double x) { return model.cdf(x); };
  CHECK(testsupport::ks_test(out.values, cdf) > 0.01);
}

TEST_CASE("naive resample ds ranks permute the same draw set") {
  const GridStack training = exp_stack(10, 10, 3, 23);
  const MarginalModel model = fit_marginal(training.values, 0.1, ShapeMethod::moment);
  DsParams ds;
  ds.dist_threshold = 0.1;
  ds.scan_fraction = 0.2;

  const GridStack copy_out = naive_resample(training, model, RankSource::copy, ds, 303);
  const GridStack ds_out = naive_resample(training, model, RankSource::ds, ds, 303);
  CHECK(ds_out.m == training.m);

  auto a = copy_out.values;
  auto b = ds_out.values;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
  CHECK(ds_out.values != copy_out.values);
}

TEST_CASE("renyi order statistics for n=1 are Exp(1)") {
  std::mt19937_64 rng(31);
  std::vector<double> draws(3000);
  for (double& v : draws) v = renyi_order_statistics(1, rng)[0];
  CHECK(testsupport::ks_test(draws, testsupport::exp1_cdf) > 0.01);
}

TEST_CASE("renyi order statistics are nondecreasing") {
  std::mt19937_64 rng(32);
  const auto y = renyi_order_statistics(500, rng);
  REQUIRE(y.size() == 500);
  CHECK(std::is_sorted(y.begin(), y.end()));
  CHECK(y.front() > 0.0);
}

TEST_CASE("renyi maximum mean matches the harmonic number") {
  const std::size_t n = 1000;
  const std::size_t reps = 4000;
  std::mt19937_64 rng(33);
  double sum = 0.0;
  for (std::size_t r = 0; r < reps; ++r) sum += renyi_order_statistics(n, rng).back();
  const double h_n = testsupport::harmonic_number(n);
  CHECK(std::fabs(sum / reps - h_n) < 0.05);
}

TEST_CASE("renyi maximum equals sorted i.i.d. maximum in law") {
  const std::size_t n = 1000;
  const std::size_t reps = 1500;
  std::mt19937_64 rng(34);
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> renyi_max(reps), iid_max(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    renyi_max[r] = renyi_order_statistics(n, rng).back();
    double mx = 0.0;
    for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, exp1(rng));
    iid_max[r] = mx;
  }
  CHECK(testsupport::ks_two_sample_test(renyi_max, iid_max) > 0.01);
}

TEST_CASE("final spacing of i.i.d. exponential samples is Exp(1)") {
  const std::size_t samples = 2000;
  std::vector<GridStack> stacks;
  stacks.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) stacks.push_back(exp_stack(25, 40, 1, 4000 + s));

  const SpacingDiagnostics diag = spacing_diagnostics(stacks);
  REQUIRE(diag.maxima.size() == samples);
  REQUIRE(diag.top_spacings.size() == samples);
  for (double s : diag.top_spacings) CHECK(s <= 0.0);

  std::vector<double> gaps(samples);
  for (std::size_t i = 0; i < samples; ++i) gaps[i] = -diag.top_spacings[i];
  CHECK(testsupport::ks_test(gaps, testsupport::exp1_cdf) > 0.01);
}

TEST_CASE("constant field has zero top spacing") {
  GridStack stack{Grid::unit_square(3, 3), 1, std::vector<double>(9, 2.0)};
  const SpacingDiagnostics diag = spacing_diagnostics(std::vector<GridStack>{stack});
  CHECK(diag.maxima == std::vector<double>{2.0});
  CHECK(diag.top_spacings == std::vector<double>{0.0});
}

TEST_CASE("spacing diagnostics rejects empty input") {
  CHECK_THROWS_AS(spacing_diagnostics(std::vector<GridStack>{}), std::invalid_argument);
}

TEST_CASE("independent maxima exceed fully dependent maxima on average") {
  const std::size_t samples = 300;
  std::mt19937_64 rng(41);
  std::exponential_distribution<double> exp1(1.0);
  std::vector<GridStack> indep, dep;
  for (std::size_t s = 0; s < samples; ++s) {
    indep.push_back(exp_stack(20, 20, 1, 6000 + s));
    dep.push_back(GridStack{Grid::unit_square(20, 20), 1, std::vector<double>(400, exp1(rng))});
  }
  const double mean_indep = testsupport::mean(spacing_diagnostics(indep).maxima);
  const double mean_dep = testsupport::mean(spacing_diagnostics(dep).maxima);
  CHECK(mean_indep > mean_dep + 3.0);
}

TEST_CASE("spacing csv layout") {
  SpacingDiagnostics diag;
  diag.maxima = {5.5, 6.25};
  diag.top_spacings = {-0.5, -1.25};
  const auto path = std::filesystem::temp_directory_path() / "liftsim_spacing_test.csv";
  write_spacing_csv(path, diag);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "sample,maximum,top_spacing");
  REQUIRE(std::getline(in, line));
  CHECK(line.rfind("0,", 0) == 0);
  std::size_t rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
  std::filesystem::remove(path);
}
