#pragma once

#include <functional>
#include <vector>

#include "uqforge/domain.hpp"
#include "uqforge/sequence.hpp"

namespace uqforge {

// Deterministic forward map from parameters to quantities of interest.
struct QoiMap {
  int input_dim = 0;
  int output_dim = 0;
  std::function<Vector(const Vector&)> eval;
};

struct PropagateResult {
  SampleSequence params;
  SampleSequence qois;
};

// Push every input sample through the QoI map; output k pairs with input k.
// Throws QoiEvalError with the offending index on a non-finite evaluation.
PropagateResult propagate(const SampleSequence& input, const QoiMap& qoi, int n_workers = 1);
PropagateResult propagate(const PriorSpec& input, long count, const QoiMap& qoi, RngStream& rng,
                          int n_workers = 1);

// Horizontal distance travelled by a projectile launched at angle alpha with
// speed v0 from height h0 under gravity g.
double projectile_distance(double g, double v0, double alpha, double h0);

struct RandomWalkOptions {
  double x0 = 0.0;
  double delta = 1.0;   // maximum step size
  long n_trials = 1;    // independent restarts
  long n_steps = 1000;  // steps per restart
};

struct RandomWalkResult {
  SampleSequence samples;  // n_trials * n_steps values
  long accepted = 0;
  long total = 0;
  std::vector<double> per_trial_ratio;

  double acceptance_ratio() const {
    return total > 0 ? static_cast<double>(accepted) / static_cast<double>(total) : 0.0;
  }
};

// 1-D random-walk sampler for an unnormalized density: uniform trial step in
// [x - delta, x + delta], uphill moves always accepted, downhill moves
// accepted with probability equal to the density ratio.
RandomWalkResult random_walk_mc(const std::function<double(double)>& p_unnormalized,
                                const RandomWalkOptions& options, RngStream& rng);

// Step size with pilot-run acceptance ratio near the target (default 0.5).
double tune_step_size(const std::function<double(double)>& p_unnormalized, double x0, RngStream& rng,
                      double target = 0.5, long pilot_steps = 4000);

struct JointStats {
  Matrix covariance;
  Matrix correlation;
};

// Covariance/correlation over the horizontally stacked [params qois] columns.
JointStats param_qoi_joint_stats(const SampleSequence& params, const SampleSequence& qois);

}  // namespace uqforge
