#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "liftsim/synth.hpp"
#include "support/stats.hpp"

using namespace liftsim;
using namespace liftsim::synth;

namespace {

std::vector<double> cell_series(const GridStack& stack, std::size_t cell) {
  std::vector<double> out(stack.m);
  for (std::size_t j = 0; j < stack.m; ++j) out[j] = stack.replicate(j)[cell];
  return out;
}

double correlation(std::span<const double> a, std::span<const double> b) {
  const double ma = testsupport::mean(a);
  const double mb = testsupport::mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("covariance matrix diagonal and symmetry") {
  const Grid g = Grid::unit_square(4, 3);
  CovarianceSpec cov;
  cov.range = 0.25;
  cov.variance = 1.75;
  const auto c = covariance_matrix(g, cov);
  const std::size_t n = g.cells();
  REQUIRE(c.size() == n * n);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(c[i * n + i] == 1.75);
    for (std::size_t j = 0; j < n; ++j) CHECK(c[i * n + j] == c[j * n + i]);
  }
}

TEST_CASE("two-cell covariance matches the scalar form") {
  const Grid g = Grid::unit_square(2, 1);
  CovarianceSpec cov;
  cov.range = 0.2;
  cov.variance = 2.0;
  const auto c = covariance_matrix(g, cov);
  // centers (0.25, 0.5) and (0.75, 0.5) are 0.5 apart
  const double expected = 2.0 * std::exp(-0.5 / 0.2);
  CHECK(c[1] == doctest::Approx(expected).epsilon(1e-15));
  CHECK(c[2] == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("covariance matrix refuses oversized grids") {
  CovarianceSpec cov;
  CHECK_THROWS_AS(covariance_matrix(Grid::unit_square(101, 101), cov, 10000), std::exception);
}

TEST_CASE("gaussian per-cell variance is near one") {
  SynthSpec spec;
  spec.grid = Grid::unit_square(4, 4);
  spec.m = 2000;
  spec.seed = 9001;
  const GridStack stack = simulate(spec);
  for (std::size_t cell = 0; cell < spec.grid.cells(); ++cell) {
    const double v = testsupport::sample_variance(cell_series(stack, cell));
    CHECK(v > 0.94);
    CHECK(v < 1.06);
  }
}

TEST_CASE("empirical correlation at one range of separation is near 1/e") {
  SynthSpec spec;
  spec.grid = Grid::unit_square(5, 1);  // neighbor centers are 0.2 apart
  spec.cov.range = 0.2;
  spec.m = 2000;
  spec.seed = 9002;
  const GridStack stack = simulate(spec);
  const double rho = correlation(cell_series(stack, 0), cell_series(stack, 1));
  CHECK(rho == doctest::Approx(std::exp(-1.0)).epsilon(0.05 / std::exp(-1.0)));
}

TEST_CASE("short range gives near-independent cells") {
  SynthSpec spec;
  spec.grid = Grid::unit_square(3, 1);
  spec.cov.range = 1e-9;
  spec.m = 4000;
  spec.seed = 9003;
  const GridStack stack = simulate(spec);
  CHECK(std::fabs(correlation(cell_series(stack, 0), cell_series(stack, 1))) < 0.05);
  CHECK(std::fabs(correlation(cell_series(stack, 0), cell_series(stack, 2))) < 0.05);
}

TEST_CASE("huge range gives nearly constant replicates") {
  SynthSpec spec;
  spec.grid = Grid::unit_square(6, 6);
  spec.cov.range = 1e6;
  spec.m = 5;
  spec.seed = 9004;
  const GridStack stack = simulate(spec);
  for (std::size_t j = 0; j < stack.m; ++j) {
    const auto r = stack.replicate(j);
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    CHECK(*hi - *lo < 0.01);
  }
}

TEST_CASE("simulation is deterministic and thread-count independent") {
  SynthSpec spec;
  spec.grid = Grid::unit_square(8, 8);
  spec.m = 12;
  spec.family = FieldFamily::student;
  spec.nu = 3.0;
  spec.seed = 9005;
  const GridStack a = simulate(spec, 1);
  const GridStack b = simulate(spec, 1);
  const GridStack c = simulate(spec, 4);
  CHECK(a.values == b.values);
  CHECK(a.values == c.values);

  spec.seed = 9006;
  CHECK(simulate(spec).values != a.values);
}

TEST_CASE("student variance is near nu/(nu-2)") {
  SynthSpec spec;
  spec.grid = Grid::unit_square(3, 3);
  spec.m = 5000;
  spec.family = FieldFamily::student;
  spec.nu = 3.0;
  spec.seed = 9007;
  const GridStack stack = simulate(spec);
  for (std::size_t cell = 0; cell < spec.grid.cells(); ++cell) {
    const double v = testsupport::sample_variance(cell_series(stack, cell));
    CHECK(v > 2.5);
    CHECK(v < 3.6);
  }
}

TEST_CASE("student maxima dominate gaussian maxima") {
  SynthSpec spec;
  spec.grid = Grid::unit_square(10, 10);
  spec.m = 20;
  std::vector<double> gauss_max, student_max;
  for (std::uint64_t s = 0; s < 200; ++s) {
    spec.seed = 9100 + s;
    spec.family = FieldFamily::gaussian;
    const GridStack g = simulate(spec);
    gauss_max.push_back(*std::max_element(g.values.begin(), g.values.end()));
    spec.family = FieldFamily::student;
    const GridStack t = simulate(spec);
    student_max.push_back(*std::max_element(t.values.begin(), t.values.end()));
  }
  CHECK(testsupport::mean(student_max) > testsupport::mean(gauss_max));
  CHECK(testsupport::paired_t_pvalue_greater(student_max, gauss_max) < 0.01);
}

TEST_CASE("gaussian cells pass Anderson-Darling normality") {
  SynthSpec spec;
  spec.grid = Grid::unit_square(10, 10);
  spec.m = 2000;
  spec.seed = 9008;
  const GridStack stack = simulate(spec);
  // Bonferroni over 20 sampled cells at the 1% family level
  for (std::size_t k = 0; k < 20; ++k) {
    const double p = testsupport::anderson_darling_pvalue_standard_normal(cell_series(stack, k * 5));
    CHECK(p > 0.01 / 20.0);
  }
}

TEST_CASE("exponential margin transform yields Exp(1) values") {
  SynthSpec spec;
  spec.grid = Grid::unit_square(4, 4);
  spec.cov.range = 0.05;  // weak dependence so pooled cells are near-independent
  spec.m = 2000;
  spec.margin = MarginTransform::exponential;
  spec.seed = 9009;
  const GridStack stack = simulate(spec);
  for (double v : stack.values) CHECK(v >= 0.0);
  CHECK(testsupport::ks_test(stack.values, testsupport::exp1_cdf) > 0.01);
}

TEST_CASE("exponential margin is the exact probability integral transform") {
  SynthSpec spec;
  spec.grid = Grid::unit_square(5, 5);
  spec.m = 8;
  spec.seed = 9010;
  const GridStack raw = simulate(spec);
  spec.margin = MarginTransform::exponential;
  const GridStack exp_stack = simulate(spec);
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    const double expected = -std::log1p(-testsupport::normal_cdf(raw.values[i]));
    CHECK(exp_stack.values[i] == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("log-gaussian margin exponentiates the gaussian field") {
  SynthSpec spec;
  spec.grid = Grid::unit_square(5, 5);
  spec.m = 8;
  spec.seed = 9011;
  const GridStack raw = simulate(spec);
  spec.margin = MarginTransform::log_gaussian;
  const GridStack lg = simulate(spec);
  for (std::size_t i = 0; i < raw.values.size(); ++i)
    CHECK(lg.values[i] == doctest::Approx(std::exp(raw.values[i])).epsilon(1e-12));
}

TEST_CASE("name parsing round-trips") {
  CHECK(parse_field_family("gaussian") == FieldFamily::gaussian);
  CHECK(parse_field_family("student") == FieldFamily::student);
  CHECK(field_family_name(FieldFamily::student) == "student");
  CHECK_THROWS_AS(parse_field_family("cauchy"), std::invalid_argument);

  CHECK(parse_margin_transform("none") == MarginTransform::none);
  CHECK(parse_margin_transform("exponential") == MarginTransform::exponential);
  CHECK(parse_margin_transform("log-gaussian") == MarginTransform::log_gaussian);
  CHECK(margin_transform_name(MarginTransform::log_gaussian) == "log-gaussian");
  CHECK_THROWS_AS(parse_margin_transform("uniform"), std::invalid_argument);
}

TEST_CASE("invalid specs are rejected") {
  SynthSpec spec;
  spec.grid = Grid::unit_square(2, 2);
  spec.m = 0;
  CHECK_THROWS_AS(simulate(spec), std::invalid_argument);
  spec.m = 1;
  spec.cov.range = 0.0;
  CHECK_THROWS_AS(simulate(spec), std::invalid_argument);
  spec.cov.range = 0.2;
  spec.family = FieldFamily::student;
  spec.nu = 0.5;
  CHECK_THROWS_AS(simulate(spec), std::invalid_argument);
}
