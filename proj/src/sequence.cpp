#include "uqforge/sequence.hpp"

#include <algorithm>
#include <cmath>

namespace uqforge {

void SampleSequence::push_back(Vector x) {
  if (dim_ == 0) dim_ = static_cast<int>(x.size());
  if (x.size() != dim_) throw DimensionError("sample dimension does not match sequence");
  if (!log_targets_.empty()) throw UqError("sequence mixes samples with and without log-targets");
  samples_.push_back(std::move(x));
}

void SampleSequence::push_back(Vector x, double log_target) {
  if (dim_ == 0) dim_ = static_cast<int>(x.size());
  if (x.size() != dim_) throw DimensionError("sample dimension does not match sequence");
  if (log_targets_.size() != samples_.size()) {
    throw UqError("sequence mixes samples with and without log-targets");
  }
  samples_.push_back(std::move(x));
  log_targets_.push_back(log_target);
}

void SampleSequence::append(const SampleSequence& other) {
  if (other.empty()) return;
  if (dim_ == 0) dim_ = other.dim();
  if (other.dim() != dim_) throw DimensionError("cannot append sequence of different dimension");
  const bool want_targets = samples_.empty() ? other.has_log_targets() : has_log_targets();
  if (want_targets && !other.has_log_targets()) {
    throw UqError("cannot append sequence without log-targets to one with them");
  }
  for (std::size_t i = 0; i < other.size(); ++i) {
    if (want_targets) {
      push_back(other[i], other.log_targets()[i]);
    } else {
      push_back(other[i]);
    }
  }
}

Matrix SampleSequence::as_matrix() const {
  Matrix m(static_cast<long>(samples_.size()), dim_);
  for (std::size_t i = 0; i < samples_.size(); ++i) m.row(static_cast<long>(i)) = samples_[i].transpose();
  return m;
}

std::vector<double> SampleSequence::column(int j) const {
  if (j < 0 || j >= dim_) throw DimensionError("column index out of range");
  std::vector<double> c(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) c[i] = samples_[i][j];
  return c;
}

std::pair<Vector, Matrix> mean_and_covariance(const SampleSequence& seq) {
  const long n = static_cast<long>(seq.size());
  if (n < 2) throw InsufficientDataError("mean_and_covariance needs at least 2 samples");
  Vector mean = Vector::Zero(seq.dim());
  for (std::size_t i = 0; i < seq.size(); ++i) mean += seq[i];
  mean /= static_cast<double>(n);
  Matrix cov = Matrix::Zero(seq.dim(), seq.dim());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Vector d = seq[i] - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(n - 1);
  return {std::move(mean), std::move(cov)};
}

Matrix correlation_matrix(const SampleSequence& seq) {
  auto [mean, cov] = mean_and_covariance(seq);
  const int d = seq.dim();
  Vector sd(d);
  for (int j = 0; j < d; ++j) {
    if (cov(j, j) <= 0.0) throw DegenerateDataError("correlation_matrix: zero-variance column " + std::to_string(j));
    sd[j] = std::sqrt(cov(j, j));
  }
  Matrix corr(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) corr(i, j) = i == j ? 1.0 : cov(i, j) / (sd[i] * sd[j]);
  }
  return corr;
}

std::vector<double> autocorrelation(const SampleSequence& seq, int component, int max_lag) {
  const long n = static_cast<long>(seq.size());
  if (max_lag < 0 || max_lag >= n) throw DimensionError("autocorrelation: max_lag must be < sequence length");
  const std::vector<double> x = seq.column(component);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double denom = 0.0;
  for (double v : x) denom += (v - mean) * (v - mean);
  if (denom <= 0.0) throw DegenerateDataError("autocorrelation: constant sequence");
  std::vector<double> r(static_cast<std::size_t>(max_lag) + 1);
  for (int k = 0; k <= max_lag; ++k) {
    double s = 0.0;
    for (long t = 0; t + k < n; ++t) s += (x[t] - mean) * (x[t + k] - mean);
    r[k] = s / denom;
  }
  return r;
}

double silverman_bandwidth(const SampleSequence& seq, int component) {
  const long n = static_cast<long>(seq.size());
  if (n < 10) throw InsufficientDataError("kde needs at least 10 samples");
  std::vector<double> x = seq.column(component);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  std::sort(x.begin(), x.end());
  const double iqr = sorted_quantile(x, 0.75) - sorted_quantile(x, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  if (!(h > 0.0)) throw DegenerateDataError("kde bandwidth is zero (constant data)");
  return h;
}

std::vector<double> gaussian_kde(const SampleSequence& seq, int component, const std::vector<double>& grid) {
  const double h = silverman_bandwidth(seq, component);
  const std::vector<double> x = seq.column(component);
  const double norm = 1.0 / (static_cast<double>(x.size()) * h * std::sqrt(2.0 * M_PI));
  std::vector<double> density(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double s = 0.0;
    for (double xi : x) {
      const double z = (grid[g] - xi) / h;
      s += std::exp(-0.5 * z * z);
    }
    density[g] = norm * s;
  }
  return density;
}

double ecdf(const SampleSequence& seq, int component, double at) {
  if (seq.empty()) throw InsufficientDataError("ecdf of empty sequence");
  long count = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq.component(i, component) <= at) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(seq.size());
}

SampleSequence filter(const SampleSequence& seq, const FilterSpec& spec) {
  if (spec.discard_portion < 0.0 || spec.discard_portion >= 1.0) {
    throw UqError("filter: discard_portion must be in [0, 1)");
  }
  if (spec.lag < 1) throw UqError("filter: lag must be >= 1");
  const long n = static_cast<long>(seq.size());
  // discard at least the requested portion; the tolerance keeps exact
  // products like 0.2 * 100 from rounding up
  const long start =
      std::max<long>(0, static_cast<long>(std::ceil(spec.discard_portion * static_cast<double>(n) - 1e-9)));
  SampleSequence out(seq.dim(), seq.origin_worker());
  for (long i = start; i < n; i += spec.lag) {
    if (seq.has_log_targets()) {
      out.push_back(seq[static_cast<std::size_t>(i)], seq.log_targets()[static_cast<std::size_t>(i)]);
    } else {
      out.push_back(seq[static_cast<std::size_t>(i)]);
    }
  }
  if (out.empty()) throw InsufficientDataError("filter produced an empty sequence");
  return out;
}

SampleSequence unify(std::vector<SampleSequence> chains) {
  if (chains.empty()) throw InsufficientDataError("unify of zero chains");
  std::stable_sort(chains.begin(), chains.end(),
                   [](const SampleSequence& a, const SampleSequence& b) { return a.origin_worker() < b.origin_worker(); });
  const bool all_targets =
      std::all_of(chains.begin(), chains.end(), [](const SampleSequence& c) { return c.has_log_targets(); });
  SampleSequence out(chains.front().dim(), chains.front().origin_worker());
  for (const auto& c : chains) {
    if (c.dim() != out.dim()) throw DimensionError("unify: chain dimensions differ");
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (all_targets) {
        out.push_back(c[i], c.log_targets()[i]);
      } else {
        out.push_back(c[i]);
      }
    }
  }
  return out;
}

}  // namespace uqforge
