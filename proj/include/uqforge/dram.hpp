#pragma once

#include <span>
#include <vector>

#include "uqforge/domain.hpp"
#include "uqforge/sequence.hpp"

namespace uqforge {

// Metropolis-Hastings with delayed-rejection stages and adaptive-Metropolis
// covariance updates. Every stage proposes from a Gaussian centred at the
// current chain position with covariance stage_scales[i-1] * master.
struct DramOptions {
  long n_pos = 100;           // chain length, initial position included
  Vector initial_position;
  Matrix initial_proposal_cov;
  int n_stages = 1;
  std::vector<double> stage_scales = {1.0};  // gamma_1..gamma_n, gamma_1 == 1, non-decreasing
  double s_d = 0.0;           // covariance scaling; <= 0 means 2.4^2 / dim
  double epsilon = 1e-5;      // covariance regularization
  long n0 = 0;                // initial non-adaptation interval
  long adapt_interval = 0;    // 0 = never adapt
  bool out_of_bounds_in_chain = true;

  void validate(int dim) const;
  double effective_s_d(int dim) const;
};

struct DramResult {
  SampleSequence chain;            // log_targets hold the (tempered) log posterior
  std::vector<double> log_likes;   // raw log-likelihood per position
  std::vector<long> stage_accepts; // acceptances per DR stage
  long num_sweeps = 0;
  long num_out_of_support = 0;     // candidates that landed outside the support
  Matrix final_proposal_cov;

  double acceptance_rate() const {
    long acc = 0;
    for (long a : stage_accepts) acc += a;
    return num_sweeps > 0 ? static_cast<double>(acc) / static_cast<double>(num_sweeps) : 0.0;
  }
};

// Unnormalized Gaussian log proposal density, -0.5 (to-from)^T cov^-1 (to-from).
double log_proposal_density(const Vector& from, const Vector& to, const Matrix& cov);

// Standard MH acceptance in log space.
double alpha_first(double logpi_a, double logpi_x, double logq_ax, double logq_xa);

// Stage-i delayed-rejection acceptance for the path a = path[0], x^(1) ...
// x^(i) = path[i]. stage_covs[j-1] is the stage-j proposal covariance.
double alpha_stage(int stage, std::span<const Vector> path, std::span<const double> path_log_target,
                   const std::vector<Matrix>& stage_covs);

// s_d * cov(history) + s_d * epsilon * I.
Matrix am_update(const SampleSequence& history, double s_d, double epsilon);

Matrix stage_covariance(const Matrix& master, int stage, const std::vector<double>& scales);

// temper scales the log-likelihood inside the target: pi_prior * f^temper.
DramResult run_dram(const TargetDensity& target, const DramOptions& options, RngStream& rng,
                    double temper = 1.0);

}  // namespace uqforge
