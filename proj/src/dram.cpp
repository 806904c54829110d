#include "uqforge/dram.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace uqforge {

void DramOptions::validate(int dim) const {
  if (n_pos < 1) throw UqError("dram: n_pos must be >= 1");
  if (initial_position.size() != dim) throw DimensionError("dram: initial position dimension mismatch");
  if (initial_proposal_cov.rows() != dim || initial_proposal_cov.cols() != dim) {
    throw DimensionError("dram: initial proposal covariance dimension mismatch");
  }
  if (n_stages < 1) throw UqError("dram: n_stages must be >= 1");
  if (static_cast<int>(stage_scales.size()) < n_stages) {
    throw UqError("dram: stage_scales must provide one scale per stage");
  }
  if (stage_scales[0] != 1.0) throw UqError("dram: first stage scale must be 1");
  for (int i = 1; i < n_stages; ++i) {
    if (stage_scales[i] < stage_scales[i - 1]) throw UqError("dram: stage scales must be non-decreasing");
  }
  if (epsilon <= 0.0) throw UqError("dram: epsilon must be positive");
  if (n0 < 0 || adapt_interval < 0) throw UqError("dram: adaptation intervals must be non-negative");
}

double DramOptions::effective_s_d(int dim) const {
  return s_d > 0.0 ? s_d : 2.4 * 2.4 / static_cast<double>(dim);
}

double log_proposal_density(const Vector& from, const Vector& to, const Matrix& cov) {
  if (from.size() != to.size() || cov.rows() != from.size() || cov.cols() != from.size()) {
    throw DimensionError("log_proposal_density: dimension mismatch");
  }
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw DecompositionError("log_proposal_density: covariance is not positive-definite");
  }
  const Vector diff = to - from;
  return -0.5 * llt.matrixL().solve(diff).squaredNorm();
}

double alpha_first(double logpi_a, double logpi_x, double logq_ax, double logq_xa) {
  if (logpi_x == kNegInf) return 0.0;
  return std::min(1.0, std::exp((logpi_x - logpi_a) + (logq_xa - logq_ax)));
}

namespace {

using LogProposalFn = std::function<double(int /*stage*/, const Vector& /*from*/, const Vector& /*to*/)>;

// Acceptance probability for the (sub)path path[idx[0]] .. path[idx[j]],
// where idx[0] plays the role of the current point. Recursive because the
// alpha-fraction of stage j needs every lower-stage alpha along both the
// forward path and the reversed one.
double alpha_path(const std::vector<int>& idx, std::span<const Vector> path,
                  std::span<const double> lps, const LogProposalFn& lq) {
  const int j = static_cast<int>(idx.size()) - 1;
  const double lp_head = lps[idx[0]];
  const double lp_tail = lps[idx[j]];
  if (lp_tail == kNegInf) return 0.0;
  if (lp_head == kNegInf) return 1.0;  // density ratio diverges
  double log_num = lp_tail - lp_head;
  for (int k = 1; k <= j; ++k) {
    log_num += lq(k, path[idx[j]], path[idx[j - k]]) - lq(k, path[idx[0]], path[idx[k]]);
  }
  for (int k = 1; k <= j - 1; ++k) {
    std::vector<int> fwd(idx.begin(), idx.begin() + k + 1);
    std::vector<int> rev(idx.rbegin(), idx.rbegin() + k + 1);
    const double a_rev = alpha_path(rev, path, lps, lq);
    const double a_fwd = alpha_path(fwd, path, lps, lq);
    if (a_rev == a_fwd) continue;  // equal [1 - alpha] factors cancel
    if (a_rev >= 1.0) return 0.0;  // numerator factor [1 - alpha] vanishes
    if (a_fwd >= 1.0) return 0.0;  // zero denominator; conservative convention
    log_num += std::log1p(-a_rev) - std::log1p(-a_fwd);
  }
  return std::min(1.0, std::exp(log_num));
}

}  // namespace

double alpha_stage(int stage, std::span<const Vector> path, std::span<const double> path_log_target,
                   const std::vector<Matrix>& stage_covs) {
  if (stage < 1 || static_cast<std::size_t>(stage) + 1 != path.size() || path.size() != path_log_target.size()) {
    throw DimensionError("alpha_stage: path must hold the current point plus one entry per stage");
  }
  if (static_cast<int>(stage_covs.size()) < stage) {
    throw DimensionError("alpha_stage: missing stage covariances");
  }
  std::vector<Eigen::LLT<Matrix>> llts;
  llts.reserve(stage_covs.size());
  for (const auto& c : stage_covs) {
    llts.emplace_back(c);
    if (llts.back().info() != Eigen::Success) {
      throw DecompositionError("alpha_stage: stage covariance is not positive-definite");
    }
  }
  const LogProposalFn lq = [&llts](int k, const Vector& from, const Vector& to) {
    const Vector diff = to - from;
    return -0.5 * llts[k - 1].matrixL().solve(diff).squaredNorm();
  };
  std::vector<int> idx(static_cast<std::size_t>(stage) + 1);
  for (int i = 0; i <= stage; ++i) idx[i] = i;
  return alpha_path(idx, path, path_log_target, lq);
}

Matrix am_update(const SampleSequence& history, double s_d, double epsilon) {
  if (history.empty()) throw InsufficientDataError("am_update needs at least one sample");
  const int d = history.dim();
  Matrix cov = Matrix::Zero(d, d);
  if (history.size() >= 2) cov = mean_and_covariance(history).second;
  return s_d * cov + s_d * epsilon * Matrix::Identity(d, d);
}

Matrix stage_covariance(const Matrix& master, int stage, const std::vector<double>& scales) {
  if (stage < 1 || static_cast<std::size_t>(stage) > scales.size()) {
    throw DimensionError("stage_covariance: stage out of range");
  }
  return scales[stage - 1] * master;
}

DramResult run_dram(const TargetDensity& target, const DramOptions& options, RngStream& rng, double temper) {
  const int d = target.dim();
  options.validate(d);

  // one likelihood evaluation per point; the tempered total follows from it
  const auto evaluate = [&target, temper](const Vector& x, double& log_like) -> double {
    const double lprior = target.log_prior(x);
    if (lprior == kNegInf) {
      log_like = kNegInf;
      return kNegInf;
    }
    log_like = target.log_likelihood(x);
    if (log_like == kNegInf) return temper == 0.0 ? lprior : kNegInf;
    return lprior + temper * log_like;
  };

  const Vector& m0 = options.initial_position;
  double ll0;
  const double lp0 = evaluate(m0, ll0);
  if (lp0 == kNegInf) throw InvalidStartError("dram: initial position has zero target density");

  DramResult result;
  result.stage_accepts.assign(options.n_stages, 0);
  result.chain = SampleSequence(d);
  result.chain.reserve(static_cast<std::size_t>(options.n_pos));
  result.log_likes.reserve(static_cast<std::size_t>(options.n_pos));
  result.chain.push_back(m0, lp0);
  result.log_likes.push_back(ll0);

  // Running mean and scatter matrix over the full history, repeats included.
  long hist_n = 1;
  Vector hist_mean = m0;
  Matrix hist_m2 = Matrix::Zero(d, d);
  const auto hist_update = [&](const Vector& x) {
    ++hist_n;
    const Vector delta = x - hist_mean;
    hist_mean += delta / static_cast<double>(hist_n);
    hist_m2.noalias() += delta * (x - hist_mean).transpose();
  };

  Matrix master = options.initial_proposal_cov;
  Eigen::LLT<Matrix> master_llt(master);
  if (master_llt.info() != Eigen::Success) {
    throw DecompositionError("dram: initial proposal covariance is not positive-definite");
  }
  const double s_d = options.effective_s_d(d);

  const LogProposalFn lq = [&master_llt, &options](int k, const Vector& from, const Vector& to) {
    const Vector diff = to - from;
    return -0.5 * master_llt.matrixL().solve(diff).squaredNorm() / options.stage_scales[k - 1];
  };

  Vector current = m0;
  double lp_cur = lp0;
  double ll_cur = ll0;
  std::vector<Vector> path;
  std::vector<double> path_lp;
  Vector z(d);

  while (result.chain.size() < static_cast<std::size_t>(options.n_pos)) {
    const long k = static_cast<long>(result.chain.size());
    if (options.adapt_interval > 0 && k >= options.n0 && k % options.adapt_interval == 0) {
      Matrix cov = hist_n >= 2 ? Matrix(hist_m2 / static_cast<double>(hist_n - 1)) : Matrix::Zero(d, d);
      master = s_d * cov + s_d * options.epsilon * Matrix::Identity(d, d);
      master_llt.compute(master);
      if (master_llt.info() != Eigen::Success) {
        throw DecompositionError("dram: adapted proposal covariance is not positive-definite");
      }
    }

    path.assign(1, current);
    path_lp.assign(1, lp_cur);
    bool accepted = false;

    for (int stage = 1; stage <= options.n_stages && !accepted; ++stage) {
      const double scale = std::sqrt(options.stage_scales[stage - 1]);
      Vector cand;
      double lp_cand;
      double ll_cand;
      long redraws = 0;
      for (;;) {
        for (int j = 0; j < d; ++j) z[j] = rng.normal();
        const Vector step = master_llt.matrixL() * z;
        cand = current + scale * step;
        lp_cand = evaluate(cand, ll_cand);
        if (lp_cand != kNegInf || options.out_of_bounds_in_chain) break;
        // out-of-bounds repeats were disabled: resample the candidate instead
        ++result.num_out_of_support;
        if (++redraws > 1000000) throw UqError("dram: cannot draw an in-support candidate");
      }
      path.push_back(cand);
      path_lp.push_back(lp_cand);
      if (lp_cand == kNegInf) {
        // stage consumed without an acceptance coin
        ++result.num_out_of_support;
        continue;
      }
      double alpha;
      if (stage == 1) {
        alpha = alpha_first(lp_cur, lp_cand, 0.0, 0.0);  // symmetric first-stage proposal
      } else {
        std::vector<int> idx(static_cast<std::size_t>(stage) + 1);
        for (int i = 0; i <= stage; ++i) idx[i] = i;
        alpha = alpha_path(idx, path, path_lp, lq);
      }
      if (rng.uniform01() < alpha) {
        current = cand;
        lp_cur = lp_cand;
        ll_cur = ll_cand;
        ++result.stage_accepts[stage - 1];
        accepted = true;
      }
    }

    result.chain.push_back(current, lp_cur);
    result.log_likes.push_back(ll_cur);
    hist_update(current);
    ++result.num_sweeps;
  }

  result.final_proposal_cov = master;
  return result;
}

}  // namespace uqforge
