#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "uqforge/domain.hpp"
#include "uqforge/dram.hpp"
#include "uqforge/sequence.hpp"

namespace uqforge {

// Adaptive multilevel sampler: moves a population from the prior to the
// posterior through tempered intermediate densities pi_prior * f^tau with
// adaptively chosen exponents, accumulating the log model evidence on the way.
struct MlOptions {
  long n_per_level = 100;
  double beta_min = 0.85;  // lower ESS-ratio threshold
  double beta_max = 0.91;  // upper ESS-ratio threshold
  int n_workers = 1;

  // per-level MH kernel controls
  int n_stages = 1;
  std::vector<double> stage_scales = {1.0};
  double s_d = 0.0;  // <= 0 means 2.4^2 / dim
  double epsilon = 1e-5;
  long steps_per_draw = 1;  // MH sweeps behind each emitted sample

  long max_levels = 1000;  // safety stop
  bool keep_level_samples = true;

  // Per-level overrides (sample count, DR stages, scalings): called with the
  // level index and a copy of these options before the level runs.
  std::function<void(int level, MlOptions&)> per_level_adjust;

  void validate() const;
};

// One tempering stage: exponent, weight bookkeeping and its evidence share.
struct LevelRecord {
  int level = 0;
  double tau = 0.0;
  double ess = 0.0;          // effective sample size of the stage weights
  long n_total = 0;
  double log_c = 0.0;        // log evidence increment
  double acceptance_rate = 0.0;
  SampleSequence samples;    // populated when keep_level_samples is set
  std::vector<double> log_likes;
};

struct MlResult {
  SampleSequence posterior;
  std::vector<double> posterior_log_likes;
  double log_evidence = 0.0;
  std::vector<LevelRecord> levels;  // levels[0] is the prior stage
};

// log w_k = (tau_new - tau_prev) * log_like_k
std::vector<double> plausibility_log_weights(const std::vector<double>& log_likes, double tau_prev,
                                             double tau_new);

// Normalized weights via log-sum-exp plus n_eff = 1 / sum(w~^2).
std::pair<std::vector<double>, double> normalize_and_ess(const std::vector<double>& log_weights);

// Bisection on the exponent gap so that the ESS ratio lands inside
// (beta_min, beta_max); clamps to 1 when the full remaining gap keeps the
// ratio above beta_min.
double choose_tau(const std::vector<double>& log_likes, double tau_prev, double beta_min, double beta_max);

std::pair<Vector, Matrix> weighted_covariance(const SampleSequence& samples,
                                              const std::vector<double>& normalized_weights);

struct ChainTask {
  long start_index = 0;  // index into the previous level's samples
  long length = 0;       // chain length, the start included
  int worker = 0;
};

// n_next independent categorical draws aggregated into (index, multiplicity)
// tasks ordered by start index.
std::vector<ChainTask> resample_starts(const std::vector<double>& normalized_weights, long n_next,
                                       RngStream& rng);

// Reassign whole chains across workers so per-worker totals hug the mean.
void balance_load(std::vector<ChainTask>& tasks, int n_workers);

// log c_l = logsumexp(log_weights) - log n
double level_log_c(const std::vector<double>& log_weights);

MlResult run_amssa(const PriorSpec& prior, const TargetDensity::LogDensityFn& log_likelihood,
                   const MlOptions& options, std::uint64_t seed);

}  // namespace uqforge
