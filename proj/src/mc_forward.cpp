#include "uqforge/mc_forward.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace uqforge {

namespace {

PropagateResult propagate_samples(std::vector<Vector> inputs, const QoiMap& qoi, int n_workers) {
  if (qoi.output_dim < 1 || !qoi.eval) throw UqError("propagate: QoI map is not configured");
  const long n = static_cast<long>(inputs.size());
  std::vector<Vector> outputs(static_cast<std::size_t>(n));
  std::atomic<long> bad_index{-1};

  const auto eval_range = [&](long lo, long hi) {
    for (long i = lo; i < hi; ++i) {
      if (bad_index.load(std::memory_order_relaxed) >= 0) return;
      Vector q = qoi.eval(inputs[static_cast<std::size_t>(i)]);
      if (q.size() != qoi.output_dim || !q.allFinite()) {
        long expected = -1;
        bad_index.compare_exchange_strong(expected, i);
        return;
      }
      outputs[static_cast<std::size_t>(i)] = std::move(q);
    }
  };

  if (n_workers <= 1 || n < 2 * n_workers) {
    eval_range(0, n);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (n + n_workers - 1) / n_workers;
    for (int w = 0; w < n_workers; ++w) {
      const long lo = w * chunk;
      const long hi = std::min<long>(n, lo + chunk);
      if (lo < hi) pool.emplace_back(eval_range, lo, hi);
    }
    for (auto& t : pool) t.join();
  }
  if (bad_index.load() >= 0) {
    throw QoiEvalError("propagate: QoI evaluation is non-finite", bad_index.load());
  }

  PropagateResult result;
  result.params = SampleSequence(qoi.input_dim);
  result.qois = SampleSequence(qoi.output_dim);
  result.params.reserve(static_cast<std::size_t>(n));
  result.qois.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    result.params.push_back(std::move(inputs[static_cast<std::size_t>(i)]));
    result.qois.push_back(std::move(outputs[static_cast<std::size_t>(i)]));
  }
  return result;
}

}  // namespace

PropagateResult propagate(const SampleSequence& input, const QoiMap& qoi, int n_workers) {
  if (input.dim() != qoi.input_dim) throw DimensionError("propagate: input dimension mismatch");
  std::vector<Vector> samples;
  samples.reserve(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) samples.push_back(input[i]);
  return propagate_samples(std::move(samples), qoi, n_workers);
}

PropagateResult propagate(const PriorSpec& input, long count, const QoiMap& qoi, RngStream& rng,
                          int n_workers) {
  if (input.dim() != qoi.input_dim) throw DimensionError("propagate: input dimension mismatch");
  if (count < 1) throw UqError("propagate: count must be positive");
  std::vector<Vector> samples;
  samples.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) samples.push_back(input.realize(rng));
  return propagate_samples(std::move(samples), qoi, n_workers);
}

double projectile_distance(double g, double v0, double alpha, double h0) {
  if (!(g > 0.0)) throw UqError("projectile_distance: g must be positive");
  const double vy = v0 * std::sin(alpha);
  return v0 * std::cos(alpha) / g * (vy + std::sqrt(vy * vy + 2.0 * g * h0));
}

RandomWalkResult random_walk_mc(const std::function<double(double)>& p_unnormalized,
                                const RandomWalkOptions& options, RngStream& rng) {
  if (!(options.delta > 0.0)) throw UqError("random_walk_mc: delta must be positive");
  if (options.n_trials < 1 || options.n_steps < 1) throw UqError("random_walk_mc: empty run");
  const double p0 = p_unnormalized(options.x0);
  if (!(p0 > 0.0)) throw InvalidStartError("random_walk_mc: density vanishes at the starting point");

  RandomWalkResult result;
  result.samples = SampleSequence(1);
  result.samples.reserve(static_cast<std::size_t>(options.n_trials * options.n_steps));
  result.per_trial_ratio.reserve(static_cast<std::size_t>(options.n_trials));

  Vector point(1);
  for (long trial = 0; trial < options.n_trials; ++trial) {
    double x = options.x0;
    double px = p0;
    long trial_accepts = 0;
    for (long step = 0; step < options.n_steps; ++step) {
      const double x_trial = x + (2.0 * rng.uniform01() - 1.0) * options.delta;
      const double pt = p_unnormalized(x_trial);
      const double w = pt / px;
      bool accept = false;
      if (w >= 1.0) {
        accept = true;  // uphill
      } else {
        accept = rng.uniform01() < w;
      }
      if (accept) {
        x = x_trial;
        px = pt;
        ++trial_accepts;
      }
      point[0] = x;
      result.samples.push_back(point);
    }
    result.accepted += trial_accepts;
    result.per_trial_ratio.push_back(static_cast<double>(trial_accepts) / static_cast<double>(options.n_steps));
  }
  result.total = options.n_trials * options.n_steps;
  return result;
}

double tune_step_size(const std::function<double(double)>& p_unnormalized, double x0, RngStream& rng,
                      double target, long pilot_steps) {
  const std::uint64_t pilot_seed = rng.next_u64();
  const auto ratio_at = [&](double delta) {
    RngStream pilot(pilot_seed);  // common random numbers across probes
    RandomWalkOptions opts{x0, delta, 1, pilot_steps};
    return random_walk_mc(p_unnormalized, opts, pilot).acceptance_ratio();
  };

  double hi = 1.0;
  while (ratio_at(hi) > target && hi < 1e12) hi *= 2.0;
  double lo = hi;
  while (ratio_at(lo) < target && lo > 1e-12) lo *= 0.5;
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double r = ratio_at(mid);
    if (std::abs(r - target) <= 0.01) return mid;
    if (r > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

JointStats param_qoi_joint_stats(const SampleSequence& params, const SampleSequence& qois) {
  if (params.size() != qois.size()) throw DimensionError("joint stats: sequence lengths differ");
  if (params.size() < 2) throw InsufficientDataError("joint stats need at least 2 samples");
  SampleSequence stacked(params.dim() + qois.dim());
  stacked.reserve(params.size());
  Vector row(params.dim() + qois.dim());
  for (std::size_t i = 0; i < params.size(); ++i) {
    row.head(params.dim()) = params[i];
    row.tail(qois.dim()) = qois[i];
    stacked.push_back(row);
  }
  JointStats stats;
  stats.covariance = mean_and_covariance(stacked).second;
  stats.correlation = correlation_matrix(stacked);
  return stats;
}

}  // namespace uqforge
