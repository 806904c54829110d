#include "uqforge/multilevel.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

namespace uqforge {

void MlOptions::validate() const {
  if (n_per_level < 2) throw UqError("multilevel: n_per_level must be >= 2");
  if (!(0.0 < beta_min && beta_min < beta_max && beta_max < 1.0)) {
    throw UqError("multilevel: thresholds must satisfy 0 < beta_min < beta_max < 1");
  }
  if (n_workers < 1) throw UqError("multilevel: n_workers must be >= 1");
  if (n_stages < 1 || static_cast<int>(stage_scales.size()) < n_stages) {
    throw UqError("multilevel: invalid DR stage configuration");
  }
  if (steps_per_draw < 1) throw UqError("multilevel: steps_per_draw must be >= 1");
}

std::vector<double> plausibility_log_weights(const std::vector<double>& log_likes, double tau_prev,
                                             double tau_new) {
  if (!(0.0 <= tau_prev && tau_prev < tau_new && tau_new <= 1.0)) {
    throw UqError("plausibility weights need 0 <= tau_prev < tau_new <= 1");
  }
  const double gap = tau_new - tau_prev;
  std::vector<double> lw(log_likes.size());
  for (std::size_t k = 0; k < log_likes.size(); ++k) {
    lw[k] = log_likes[k] == kNegInf ? kNegInf : gap * log_likes[k];
  }
  return lw;
}

std::pair<std::vector<double>, double> normalize_and_ess(const std::vector<double>& log_weights) {
  const double lse = logsumexp(log_weights);
  if (lse == kNegInf) throw DegenerateLevelError("all plausibility weights vanished");
  std::vector<double> w(log_weights.size());
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < log_weights.size(); ++k) {
    w[k] = log_weights[k] == kNegInf ? 0.0 : std::exp(log_weights[k] - lse);
    sum_sq += w[k] * w[k];
  }
  return {std::move(w), 1.0 / sum_sq};
}

namespace {

double ess_ratio_at_gap(const std::vector<double>& log_likes, double gap) {
  std::vector<double> lw(log_likes.size());
  for (std::size_t k = 0; k < log_likes.size(); ++k) {
    lw[k] = log_likes[k] == kNegInf ? kNegInf : gap * log_likes[k];
  }
  const auto [w, ess] = normalize_and_ess(lw);
  return ess / static_cast<double>(log_likes.size());
}

}  // namespace

double choose_tau(const std::vector<double>& log_likes, double tau_prev, double beta_min, double beta_max) {
  if (tau_prev >= 1.0) throw UqError("choose_tau: tau_prev must be < 1");
  const double full_gap = 1.0 - tau_prev;
  if (ess_ratio_at_gap(log_likes, full_gap) > beta_min) return 1.0;
  double lo = 0.0;  // ratio -> 1 as the gap shrinks
  double hi = full_gap;
  double mid = 0.5 * full_gap;
  while (hi - lo > 1e-10) {
    mid = 0.5 * (lo + hi);
    const double r = ess_ratio_at_gap(log_likes, mid);
    if (r >= beta_max) {
      lo = mid;
    } else if (r <= beta_min) {
      hi = mid;
    } else {
      return tau_prev + mid;
    }
  }
  return tau_prev + mid;
}

std::pair<Vector, Matrix> weighted_covariance(const SampleSequence& samples,
                                              const std::vector<double>& normalized_weights) {
  if (samples.size() != normalized_weights.size() || samples.empty()) {
    throw DimensionError("weighted_covariance: samples and weights must pair up");
  }
  const int d = samples.dim();
  Vector mean = Vector::Zero(d);
  for (std::size_t m = 0; m < samples.size(); ++m) mean += normalized_weights[m] * samples[m];
  Matrix cov = Matrix::Zero(d, d);
  for (std::size_t m = 0; m < samples.size(); ++m) {
    const Vector diff = samples[m] - mean;
    cov.noalias() += normalized_weights[m] * (diff * diff.transpose());
  }
  return {std::move(mean), std::move(cov)};
}

std::vector<ChainTask> resample_starts(const std::vector<double>& normalized_weights, long n_next,
                                       RngStream& rng) {
  if (normalized_weights.empty() || n_next < 1) {
    throw UqError("resample_starts: need weights and a positive draw count");
  }
  std::vector<double> cdf(normalized_weights.size());
  std::partial_sum(normalized_weights.begin(), normalized_weights.end(), cdf.begin());
  cdf.back() = 1.0;  // guard against roundoff in the last bin
  std::vector<long> counts(normalized_weights.size(), 0);
  for (long i = 0; i < n_next; ++i) {
    const double u = rng.uniform01();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    ++counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  std::vector<ChainTask> tasks;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] > 0) tasks.push_back({static_cast<long>(k), counts[k], 0});
  }
  return tasks;
}

void balance_load(std::vector<ChainTask>& tasks, int n_workers) {
  if (n_workers < 1) throw UqError("balance_load: n_workers must be >= 1");
  if (n_workers == 1) {
    for (auto& t : tasks) t.worker = 0;
    return;
  }
  // Longest chain first onto the least-loaded worker; ties resolved by index
  // so the assignment is deterministic.
  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&tasks](std::size_t a, std::size_t b) {
    return tasks[a].length > tasks[b].length;
  });
  std::vector<long> load(static_cast<std::size_t>(n_workers), 0);
  for (std::size_t i : order) {
    int best = 0;
    for (int w = 1; w < n_workers; ++w) {
      if (load[w] < load[best]) best = w;
    }
    tasks[i].worker = best;
    load[best] += tasks[i].length;
  }
}

double level_log_c(const std::vector<double>& log_weights) {
  const double lse = logsumexp(log_weights);
  if (lse == kNegInf) throw DegenerateLevelError("all plausibility weights vanished");
  return lse - std::log(static_cast<double>(log_weights.size()));
}

MlResult run_amssa(const PriorSpec& prior, const TargetDensity::LogDensityFn& log_likelihood,
                   const MlOptions& options, std::uint64_t seed) {
  options.validate();
  const int d = prior.dim();
  const long n = options.n_per_level;
  const TargetDensity target = TargetDensity::from_prior(prior, log_likelihood);

  MlResult result;

  // Level 0: the prior population, tau = 0.
  RngStream coordinator(mix_seed(seed, 0x416d5353ULL));
  SampleSequence samples(d);
  samples.reserve(static_cast<std::size_t>(n));
  std::vector<double> log_likes(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) {
    Vector x = prior.realize(coordinator);
    log_likes[static_cast<std::size_t>(k)] = target.log_likelihood(x);
    const double lp = target.log_prior(x);
    samples.push_back(std::move(x), lp);
  }

  double tau = 0.0;
  {
    LevelRecord rec;
    rec.level = 0;
    rec.tau = 0.0;
    rec.ess = static_cast<double>(n);
    rec.n_total = n;
    if (options.keep_level_samples) {
      rec.samples = samples;
      rec.log_likes = log_likes;
    }
    result.levels.push_back(std::move(rec));
  }

  int level = 0;
  while (tau < 1.0) {
    ++level;
    if (level > options.max_levels) throw UqError("multilevel: exceeded max_levels without reaching tau = 1");

    MlOptions level_opts = options;
    if (options.per_level_adjust) {
      options.per_level_adjust(level, level_opts);
      level_opts.validate();
    }

    const double tau_new = choose_tau(log_likes, tau, options.beta_min, options.beta_max);
    const std::vector<double> lw = plausibility_log_weights(log_likes, tau, tau_new);
    const auto [w, ess] = normalize_and_ess(lw);
    const double log_c = level_log_c(lw);
    const long n_prev = static_cast<long>(log_likes.size());

    auto [wmean, wcov] = weighted_covariance(samples, w);
    const double s_d = level_opts.s_d > 0.0 ? level_opts.s_d : 2.4 * 2.4 / static_cast<double>(d);
    const Matrix proposal = s_d * wcov + s_d * level_opts.epsilon * Matrix::Identity(d, d);

    std::vector<ChainTask> tasks = resample_starts(w, level_opts.n_per_level, coordinator);
    balance_load(tasks, options.n_workers);

    // Chains draw from streams keyed on (seed, level, start index), so the
    // merged population does not depend on the worker count.
    std::vector<SampleSequence> chain_samples(tasks.size());
    std::vector<std::vector<double>> chain_log_likes(tasks.size());
    std::vector<long> chain_accepts(tasks.size(), 0);
    std::vector<long> chain_sweeps(tasks.size(), 0);
    std::exception_ptr worker_error;
    std::mutex error_mutex;

    // One independent MH transition per resampled draw: a leader selected m
    // times emits m one-step moves, all launched from the leader itself.
    // Emitting the leader raw, or walking one sequential chain of length m,
    // couples a slot's mixing depth to its leader's weight and leaves an
    // over-dispersion bias in the population that does not vanish with n;
    // independent single transitions keep every slot exactly one kernel
    // application away from the resampled law.
    const auto run_task = [&](std::size_t t) {
      const ChainTask& task = tasks[t];
      const Vector& start = samples[static_cast<std::size_t>(task.start_index)];
      DramOptions kernel;
      kernel.n_pos = 1 + level_opts.steps_per_draw;
      kernel.initial_position = start;
      kernel.initial_proposal_cov = proposal;
      kernel.n_stages = level_opts.n_stages;
      kernel.stage_scales = level_opts.stage_scales;
      kernel.s_d = s_d;
      kernel.epsilon = level_opts.epsilon;
      kernel.adapt_interval = 0;
      RngStream chain_rng(mix_seed(seed, static_cast<std::uint64_t>(level),
                                   static_cast<std::uint64_t>(task.start_index)));
      SampleSequence emitted(d);
      emitted.reserve(static_cast<std::size_t>(task.length));
      std::vector<double> emitted_ll;
      emitted_ll.reserve(static_cast<std::size_t>(task.length));
      for (long draw = 0; draw < task.length; ++draw) {
        DramResult r = run_dram(target, kernel, chain_rng, tau_new);
        const std::size_t last = r.chain.size() - 1;
        emitted.push_back(r.chain[last], r.chain.log_targets()[last]);
        emitted_ll.push_back(r.log_likes[last]);
        for (long a : r.stage_accepts) chain_accepts[t] += a;
        chain_sweeps[t] += r.num_sweeps;
      }
      chain_samples[t] = std::move(emitted);
      chain_log_likes[t] = std::move(emitted_ll);
    };

    if (options.n_workers == 1) {
      for (std::size_t t = 0; t < tasks.size(); ++t) run_task(t);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(options.n_workers));
      for (int w = 0; w < options.n_workers; ++w) {
        pool.emplace_back([&, w]() {
          try {
            for (std::size_t t = 0; t < tasks.size(); ++t) {
              if (tasks[t].worker == w) run_task(t);
            }
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!worker_error) worker_error = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      if (worker_error) std::rethrow_exception(worker_error);
    }

    SampleSequence merged(d);
    merged.reserve(static_cast<std::size_t>(level_opts.n_per_level));
    std::vector<double> merged_ll;
    merged_ll.reserve(static_cast<std::size_t>(level_opts.n_per_level));
    long accepts = 0;
    long sweeps = 0;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      merged.append(chain_samples[t]);
      merged_ll.insert(merged_ll.end(), chain_log_likes[t].begin(), chain_log_likes[t].end());
      accepts += chain_accepts[t];
      sweeps += chain_sweeps[t];
    }

    samples = std::move(merged);
    log_likes = std::move(merged_ll);
    tau = tau_new;
    result.log_evidence += log_c;

    LevelRecord rec;
    rec.level = level;
    rec.tau = tau;
    rec.ess = ess;
    rec.n_total = n_prev;  // the weight set the ESS ratio refers to
    rec.log_c = log_c;
    rec.acceptance_rate = sweeps > 0 ? static_cast<double>(accepts) / static_cast<double>(sweeps) : 0.0;
    if (options.keep_level_samples) {
      rec.samples = samples;
      rec.log_likes = log_likes;
    }
    result.levels.push_back(std::move(rec));
  }

  result.posterior = std::move(samples);
  result.posterior_log_likes = std::move(log_likes);
  return result;
}

}  // namespace uqforge
