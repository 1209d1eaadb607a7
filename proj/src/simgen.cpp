#include "afrf/simgen.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>

#include "afrf/error.hpp"

namespace afrf {
namespace {

constexpr double kInitialJitter = 1e-10;
constexpr double kMaxJitter = 1e-4;

ModelParams step_params(double mu, double q, double a, double b, double alpha, double beta,
                        double nu) {
  ModelParams p;
  p.model = MeanModel::Step;
  p.mu = mu;
  p.q = q;
  p.a = a;
  p.b = b;
  p.alpha = alpha;
  p.beta = beta;
  p.nu_exp = nu;
  return p;
}

ModelParams peak_params(double mu, double q, double a, double b, double alpha, double beta,
                        double nu, double r, double z, double w) {
  ModelParams p = step_params(mu, q, a, b, alpha, beta, nu);
  p.model = MeanModel::Peak;
  p.r_peak = r;
  p.z_peak = z;
  p.w_peak = w;
  return p;
}

ModelParams trig_params() {
  ModelParams p;
  p.model = MeanModel::Trig;
  p.a1 = 2.0;
  p.a2 = 10.0;
  p.b1 = 1.5;
  p.b2 = 11.5;
  p.c1 = 1.0;
  p.c2 = 4.0;
  p.alpha = 2.0;
  p.beta = 0.5;
  p.nu_exp = 1.0;
  return p;
}

std::vector<GroupSpec> two_groups(const ModelParams& p) {
  return {{"g1", p, 1}, {"g2", p, 2}};
}

}  // namespace

void GpSpec::validate() const {
  if (!(alpha >= 0.0)) throw ValidationError("GP scale alpha must be >= 0");
  if (!(beta > 0.0)) throw ValidationError("GP range beta must be > 0");
  if (!(nu_exp > 0.0 && nu_exp <= 2.0)) throw ValidationError("GP exponent must be in (0, 2]");
  if (grid.size() < 1) throw ValidationError("GP grid is empty");
}

Eigen::MatrixXd covariance(const GpSpec& spec) {
  spec.validate();
  const Eigen::Index t = spec.grid.size();
  Eigen::MatrixXd cov(t, t);
  for (Eigen::Index i = 0; i < t; ++i) {
    for (Eigen::Index j = 0; j < t; ++j) {
      const double d = std::abs(spec.grid[i] - spec.grid[j]);
      cov(i, j) = i == j ? spec.alpha : spec.alpha * std::exp(-spec.beta * std::pow(d, spec.nu_exp));
    }
  }
  return cov;
}

Eigen::MatrixXd sample_gp(const GpSpec& spec, int n, Rng& rng) {
  spec.validate();
  if (n < 0) throw ValidationError("sample count must be >= 0");
  const Eigen::Index t = spec.grid.size();
  if (spec.alpha == 0.0) return Eigen::MatrixXd::Zero(n, t);
  // Factor the correlation and scale by sqrt(alpha).
  GpSpec unit = spec;
  unit.alpha = 1.0;
  const Eigen::MatrixXd corr = covariance(unit);
  Eigen::MatrixXd lower;
  for (double jitter = kInitialJitter;; jitter *= 10.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(corr + jitter * Eigen::MatrixXd::Identity(t, t));
    if (llt.info() == Eigen::Success) {
      lower = llt.matrixL();
      break;
    }
    if (jitter * 10.0 > kMaxJitter) {
      throw NumericError("GP covariance is not positive definite even with jitter");
    }
  }
  Eigen::MatrixXd z(t, n);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < t; ++j) z(j, i) = standard_normal(rng);
  }
  return std::sqrt(spec.alpha) * (lower * z).transpose();
}

Eigen::MatrixXd sample_gp(const GpSpec& spec, int n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_gp(spec, n, rng);
}

ScenarioConfig scenario(int id, std::uint64_t seed, int n_per_group, int grid_size) {
  if (n_per_group < 1) throw ValidationError("curves per group must be >= 1");
  if (grid_size < 2) throw ValidationError("grid must have at least 2 points");
  ScenarioConfig config;
  config.id = id;
  config.seed = seed;
  config.n_per_group = n_per_group;
  config.grid_size = grid_size;
  switch (id) {
    case 1:
      config.groups = two_groups(step_params(8, 2, 0.2, 0.5, 1, 1, 1));
      break;
    case 2:
      config.groups = two_groups(trig_params());
      break;
    case 3:
      config.groups = two_groups(peak_params(8, 1.8, 0.45, 0.55, 1, 1, 1, 0.02, 90, 2));
      break;
    case 4: {
      const auto a = peak_params(0, 1, 0.45, 0.45, 1.3, 1.2, 1, 0.02, 90, 2);
      const auto b = peak_params(-2, 1.8, 0.15, 0.15, 0.8, 0.8, 1, 0.01, 90, 5);
      config.groups = {{"A-g1", a, 1}, {"A-g2", a, 2}, {"B-g1", b, 1}, {"B-g2", b, 2}};
      break;
    }
    case 5: {
      const auto a = peak_params(0, 1.8, 0.45, 0.45, 1, 1, 1, 0.02, 90, 2);
      const auto b = peak_params(1, 0.8, 0.65, 0.65, 1, 1, 1, 0.02, 90, 2);
      config.groups = {{"A-g1", a, 1}, {"A-g2", a, 2}, {"B-g2", b, 2}};
      break;
    }
    case 6: {
      const auto a = step_params(2, 3, 0.6, 0.75, 2, 1, 0.5);
      const auto b = step_params(2, 3, 0.8, 0.9, 2, 1, 0.5);
      config.groups = {{"A-g1", a, 1}, {"A-g2", a, 2}, {"B-g2", b, 2}};
      break;
    }
    default:
      throw ValidationError("scenario id must be 1..6, got " + std::to_string(id));
  }
  return config;
}

Latents draw_latents(const GroupSpec& group, Rng& rng) {
  const ModelParams& p = group.params;
  Latents l;
  switch (p.model) {
    case MeanModel::Step:
      l.k = uniform01(rng) < 0.5 ? -1 : 1;
      l.jump = uniform_real(rng, p.a, p.b);
      break;
    case MeanModel::Trig:
      if (group.variant == 1) {
        l.coef1 = uniform_real(rng, p.a1, p.a2);
        l.coef2 = uniform_real(rng, p.a1, p.a2);
      } else {
        l.u = uniform01(rng) < p.bernoulli_p ? 1 : 0;
        const double lo = l.u == 0 ? p.b1 : p.c1;
        const double hi = l.u == 0 ? p.b2 : p.c2;
        l.coef1 = uniform_real(rng, lo, hi);
        l.coef2 = uniform_real(rng, lo, hi);
      }
      break;
    case MeanModel::Peak:
      l.u = uniform01(rng) < p.bernoulli_p ? 1 : 0;
      l.centre = uniform_real(rng, p.a, p.b);
      break;
  }
  return l;
}

Eigen::VectorXd mean_structure(const GroupSpec& group, const Latents& l,
                               const Eigen::VectorXd& grid) {
  const ModelParams& p = group.params;
  Eigen::VectorXd x(grid.size());
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const double t = grid[j];
    switch (p.model) {
      case MeanModel::Step:
        x[j] = p.mu * t + (group.variant == 2 && l.jump <= t ? p.q * l.k : 0.0);
        break;
      case MeanModel::Trig: {
        const double theta = 2.0 * std::numbers::pi * t;
        x[j] = l.coef1 * std::sin(theta) + l.coef2 * std::cos(theta);
        break;
      }
      case MeanModel::Peak: {
        x[j] = p.mu * t;
        if (group.variant == 2) {
          const double sign = l.u == 0 ? 1.0 : -1.0;  // (-1)^u
          const double peak = std::exp(-p.z_peak * std::pow(std::abs(t - l.centre), p.w_peak)) /
                              std::sqrt(p.r_peak * std::numbers::pi);
          x[j] += sign * p.q - sign * peak;
        }
        break;
      }
    }
  }
  return x;
}

CurveSet generate(const ScenarioConfig& config) {
  if (config.groups.empty()) throw ValidationError("scenario has no groups");
  const int g_count = static_cast<int>(config.groups.size());
  const int n = config.n_per_group;
  CurveSet out;
  out.domain = unit_grid(config.grid_size);
  out.values.resize(static_cast<Eigen::Index>(g_count) * n, config.grid_size);
  for (int g = 0; g < g_count; ++g) {
    const GroupSpec& group = config.groups[static_cast<std::size_t>(g)];
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(config.id), g));
    const GpSpec noise{group.params.alpha, group.params.beta, group.params.nu_exp, out.domain};
    const Eigen::MatrixXd e = sample_gp(noise, n, rng);
    for (int i = 0; i < n; ++i) {
      const Latents l = draw_latents(group, rng);
      out.values.row(static_cast<Eigen::Index>(g) * n + i) =
          mean_structure(group, l, out.domain).transpose() + e.row(i);
      out.labels.push_back(g);
    }
    out.class_names.push_back(std::to_string(g + 1));
  }
  return out;
}

std::pair<CurveSet, CurveSet> split_half(const CurveSet& curves, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x73706c6974ULL));
  std::vector<int> train_rows;
  std::vector<int> test_rows;
  for (int c = 0; c < curves.n_classes(); ++c) {
    std::vector<int> members;
    for (std::size_t i = 0; i < curves.labels.size(); ++i) {
      if (curves.labels[i] == c) members.push_back(static_cast<int>(i));
    }
    shuffle(std::span<int>(members), rng);
    const std::size_t half = members.size() / 2;
    train_rows.insert(train_rows.end(), members.begin(), members.begin() + static_cast<long>(half));
    test_rows.insert(test_rows.end(), members.begin() + static_cast<long>(half), members.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {curves.subset(train_rows), curves.subset(test_rows)};
}

}  // namespace afrf
