#include "liftsim/synth.hpp"

#include <algorithm>
#include <cmath>
#include <new>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <fftw3.h>

#include "liftsim/parallel.hpp"
#include "liftsim/rng.hpp"

namespace liftsim::synth {

namespace {

void check_cov(const CovarianceSpec& cov) {
  if (!(cov.range > 0.0)) throw std::invalid_argument("synth: range must be positive");
  if (!(cov.variance > 0.0)) throw std::invalid_argument("synth: variance must be positive");
}

void check_spec(const SynthSpec& spec) {
  check_cov(spec.cov);
  if (spec.grid.cells() == 0) throw std::invalid_argument("synth: empty grid");
  if (spec.m == 0) throw std::invalid_argument("synth: m must be positive");
  if (spec.dense_cell_limit == 0)
    throw std::invalid_argument("synth: dense_cell_limit must be positive");
  if (spec.family == FieldFamily::student && !(spec.nu >= 1.0))
    throw std::invalid_argument("synth: student needs nu >= 1");
}

Eigen::MatrixXd dense_factor(const std::vector<double>& c, std::size_t n) {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> m(c.data(), static_cast<Eigen::Index>(n),
                             static_cast<Eigen::Index>(n));
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  // Near-singular covariances (huge range) lose strict positive definiteness
  // to rounding; a clamped spectral root still simulates them.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("synth: covariance eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  const double top = std::max(ev.maxCoeff(), 0.0);
  if (ev.minCoeff() < -1e-9 * std::max(top, 1.0))
    throw std::runtime_error("synth: covariance is not positive semidefinite");
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev[i] = std::sqrt(std::max(ev[i], 0.0));
  return es.eigenvectors() * ev.asDiagonal();
}

struct FftBuffer {
  fftw_complex* p = nullptr;

  explicit FftBuffer(std::size_t n)
      : p(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!p) throw std::bad_alloc();
  }
  ~FftBuffer() { fftw_free(p); }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;
};

struct FftPlan {
  fftw_plan p = nullptr;

  explicit FftPlan(fftw_plan plan) : p(plan) {
    if (!p) throw std::runtime_error("synth: fftw plan creation failed");
  }
  ~FftPlan() { fftw_destroy_plan(p); }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
};

// Covariance eigenvalues on the embedding torus, pre-divided by the transform
// size so a single forward FFT of sqrt_lambda * (U + iV) yields two
// independent replicates (real and imaginary parts).
struct Embedding {
  std::size_t mx = 0, my = 0;
  std::vector<double> sqrt_lambda;
};

Embedding build_embedding(const Grid& g, const CovarianceSpec& cov) {
  std::size_t mx = 2 * g.nx, my = 2 * g.ny;
  for (int attempt = 0; attempt < 6; ++attempt) {
    const std::size_t n = mx * my;
    FftBuffer in(n), out(n);
    FftPlan plan(fftw_plan_dft_2d(static_cast<int>(my), static_cast<int>(mx), in.p, out.p,
                                  FFTW_FORWARD, FFTW_ESTIMATE));
    for (std::size_t j = 0; j < my; ++j) {
      const double hy = static_cast<double>(std::min(j, my - j)) * g.dy;
      for (std::size_t i = 0; i < mx; ++i) {
        const double hx = static_cast<double>(std::min(i, mx - i)) * g.dx;
        in.p[j * mx + i][0] = cov.variance * std::exp(-std::hypot(hx, hy) / cov.range);
        in.p[j * mx + i][1] = 0.0;
      }
    }
    fftw_execute(plan.p);

    double lo = out.p[0][0], hi = out.p[0][0];
    for (std::size_t k = 0; k < n; ++k) {
      lo = std::min(lo, out.p[k][0]);
      hi = std::max(hi, out.p[k][0]);
    }
    if (lo >= -1e-9 * hi) {
      Embedding emb{mx, my, std::vector<double>(n)};
      for (std::size_t k = 0; k < n; ++k)
        emb.sqrt_lambda[k] = std::sqrt(std::max(out.p[k][0], 0.0) / static_cast<double>(n));
      return emb;
    }
    mx *= 2;
    my *= 2;
  }
  throw std::runtime_error("synth: circulant embedding stayed indefinite after padding");
}

void fill_gaussian_dense(GridStack& stack, const SynthSpec& spec, int threads) {
  const std::size_t cells = spec.grid.cells();
  const auto c = covariance_matrix(spec.grid, spec.cov, spec.dense_cell_limit);
  const Eigen::MatrixXd factor = dense_factor(c, cells);
  parallel_for(stack.m, threads, [&](std::size_t j) {
    auto eng = rng::engine(rng::derive(spec.seed, j, 0));
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(static_cast<Eigen::Index>(cells));
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(eng);
    auto rep = stack.replicate(j);
    Eigen::Map<Eigen::VectorXd> w(rep.data(), static_cast<Eigen::Index>(cells));
    w.noalias() = factor * z;
  });
}

void fill_gaussian_circulant(GridStack& stack, const SynthSpec& spec) {
  const Embedding emb = build_embedding(spec.grid, spec.cov);
  const std::size_t n = emb.mx * emb.my;
  FftBuffer in(n), out(n);
  FftPlan plan(fftw_plan_dft_2d(static_cast<int>(emb.my), static_cast<int>(emb.mx), in.p,
                                out.p, FFTW_FORWARD, FFTW_ESTIMATE));
  const std::size_t pairs = (stack.m + 1) / 2;
  for (std::size_t p = 0; p < pairs; ++p) {
    auto eng = rng::engine(rng::derive(spec.seed, p, 2));
    std::normal_distribution<double> normal;
    for (std::size_t k = 0; k < n; ++k) {
      in.p[k][0] = emb.sqrt_lambda[k] * normal(eng);
      in.p[k][1] = emb.sqrt_lambda[k] * normal(eng);
    }
    fftw_execute(plan.p);

    auto re = stack.replicate(2 * p);
    auto im = 2 * p + 1 < stack.m ? stack.replicate(2 * p + 1) : std::span<double>();
    for (std::uint32_t r = 0; r < spec.grid.ny; ++r) {
      for (std::uint32_t c = 0; c < spec.grid.nx; ++c) {
        const std::size_t cell = std::size_t(r) * spec.grid.nx + c;
        const std::size_t torus = std::size_t(r) * emb.mx + c;
        re[cell] = out.p[torus][0];
        if (!im.empty()) im[cell] = out.p[torus][1];
      }
    }
  }
}

}  // namespace

FieldFamily parse_field_family(std::string_view name) {
  if (name == "gaussian") return FieldFamily::gaussian;
  if (name == "student") return FieldFamily::student;
  throw std::invalid_argument("unknown field family: " + std::string(name));
}

MarginTransform parse_margin_transform(std::string_view name) {
  if (name == "none") return MarginTransform::none;
  if (name == "exponential") return MarginTransform::exponential;
  if (name == "log-gaussian") return MarginTransform::log_gaussian;
  throw std::invalid_argument("unknown margin transform: " + std::string(name));
}

std::string_view field_family_name(FieldFamily family) {
  return family == FieldFamily::gaussian ? "gaussian" : "student";
}

std::string_view margin_transform_name(MarginTransform margin) {
  switch (margin) {
    case MarginTransform::none: return "none";
    case MarginTransform::exponential: return "exponential";
    case MarginTransform::log_gaussian: return "log-gaussian";
  }
  throw std::invalid_argument("unknown margin transform");
}

std::vector<double> covariance_matrix(const Grid& grid, const CovarianceSpec& cov,
                                      std::size_t max_cells) {
  check_cov(cov);
  const std::size_t n = grid.cells();
  if (n == 0) throw std::invalid_argument("covariance_matrix: empty grid");
  if (n > max_cells)
    throw std::invalid_argument(
        "covariance_matrix: grid above the dense limit, simulate via the circulant path");
  std::vector<double> c(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    const double xa = grid.center_x(static_cast<std::uint32_t>(a % grid.nx));
    const double ya = grid.center_y(static_cast<std::uint32_t>(a / grid.nx));
    c[a * n + a] = cov.variance;
    for (std::size_t b = 0; b < a; ++b) {
      const double xb = grid.center_x(static_cast<std::uint32_t>(b % grid.nx));
      const double yb = grid.center_y(static_cast<std::uint32_t>(b / grid.nx));
      const double v = cov.variance * std::exp(-std::hypot(xa - xb, ya - yb) / cov.range);
      c[a * n + b] = v;
      c[b * n + a] = v;
    }
  }
  return c;
}

GridStack simulate(const SynthSpec& spec, int threads) {
  check_spec(spec);
  GridStack stack{spec.grid, spec.m, std::vector<double>(spec.m * spec.grid.cells())};
  if (spec.grid.cells() <= spec.dense_cell_limit) {
    fill_gaussian_dense(stack, spec, threads);
  } else {
    fill_gaussian_circulant(stack, spec);
  }

  parallel_for(spec.m, threads, [&](std::size_t j) {
    auto rep = stack.replicate(j);
    if (spec.family == FieldFamily::student) {
      auto eng = rng::engine(rng::derive(spec.seed, j, 1));
      std::chi_squared_distribution<double> chi(spec.nu);
      double q = chi(eng);
      while (q <= 0.0) q = chi(eng);
      const double scale = std::sqrt(spec.nu / q);
      for (double& v : rep) v *= scale;
    }
    switch (spec.margin) {
      case MarginTransform::none: break;
      case MarginTransform::exponential: {
        const double sd = std::sqrt(spec.cov.variance);
        if (spec.family == FieldFamily::gaussian) {
          for (double& v : rep)
            v = -std::log(0.5 * std::erfc(v / (sd * std::numbers::sqrt2)));
        } else {
          const boost::math::students_t_distribution<double> dist(spec.nu);
          for (double& v : rep)
            v = -std::log(boost::math::cdf(boost::math::complement(dist, v / sd)));
        }
        break;
      }
      case MarginTransform::log_gaussian:
        for (double& v : rep) v = std::exp(v);
        break;
    }
  });
  return stack;
}

}  // namespace liftsim::synth
