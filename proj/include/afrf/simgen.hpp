#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "afrf/dataio.hpp"
#include "afrf/random.hpp"

namespace afrf {

/// Zero-mean Gaussian process with covariance alpha * exp(-beta |t - s|^nu_exp).
struct GpSpec {
  double alpha = 1.0;
  double beta = 1.0;
  double nu_exp = 1.0;
  Eigen::VectorXd grid;

  void validate() const;
};

Eigen::MatrixXd covariance(const GpSpec& spec);

// n draws as rows. Cholesky of the covariance plus 1e-10 jitter, raised
// tenfold on failure up to 1e-4.
Eigen::MatrixXd sample_gp(const GpSpec& spec, int n, Rng& rng);
Eigen::MatrixXd sample_gp(const GpSpec& spec, int n, std::uint64_t seed);

// Mean structures of the two-group base models.
//  Step:  g1 mu t;  g2 mu t + q k I(T <= t),  k = +-1, T ~ U[a, b].
//  Trig:  g1 a1 sin + a2 cos;  g2 (b1 sin + b2 cos)(1 - u) + (c1 sin + c2 cos) u,
//         evaluated at theta = 2 pi t, coefficient pairs ~ U of their range.
//  Peak:  g1 mu t;  g2 mu t + (-1)^u q + (-1)^(1-u) exp(-z |t - v|^w) / sqrt(r pi),
//         v ~ U[a, b].
enum class MeanModel { Step, Trig, Peak };

struct ModelParams {
  MeanModel model = MeanModel::Step;
  double mu = 0.0;
  double q = 0.0;
  double a = 0.0;
  double b = 0.0;
  double a1 = 0.0, a2 = 0.0;  // Trig group 1 coefficient range
  double b1 = 0.0, b2 = 0.0;  // Trig group 2, u = 0
  double c1 = 0.0, c2 = 0.0;  // Trig group 2, u = 1
  double bernoulli_p = 0.5;   // P(u = 1)
  double r_peak = 0.0;
  double z_peak = 0.0;
  double w_peak = 2.0;
  double alpha = 1.0;
  double beta = 1.0;
  double nu_exp = 1.0;
};

// Per-curve random quantities; unused fields are ignored by the model.
struct Latents {
  int k = 1;
  double jump = 0.0;  // T
  double coef1 = 0.0;
  double coef2 = 0.0;
  int u = 0;
  double centre = 0.0;  // v
};

struct GroupSpec {
  std::string name;
  ModelParams params;
  int variant = 1;  // group 1 or 2 of the base model
};

struct ScenarioConfig {
  int id = 1;
  std::vector<GroupSpec> groups;
  int n_per_group = 100;
  int grid_size = 50;
  std::uint64_t seed = 1;
};

// Published parameters of scenarios 1-6; classes follow `groups` order.
ScenarioConfig scenario(int id, std::uint64_t seed, int n_per_group = 100, int grid_size = 50);

Latents draw_latents(const GroupSpec& group, Rng& rng);

// Noiseless curve of one group member on `grid`.
Eigen::VectorXd mean_structure(const GroupSpec& group, const Latents& latents,
                               const Eigen::VectorXd& grid);

// Labeled curves, groups in order, n_per_group rows each, class names "1".."G".
CurveSet generate(const ScenarioConfig& config);

// Stratified half split: each class contributes floor(n_c / 2) rows to train.
std::pair<CurveSet, CurveSet> split_half(const CurveSet& curves, std::uint64_t seed);

}  // namespace afrf
