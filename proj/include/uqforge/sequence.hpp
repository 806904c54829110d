#pragma once

#include <utility>
#include <vector>

#include "uqforge/errors.hpp"
#include "uqforge/math.hpp"

namespace uqforge {

// Ordered list of parameter vectors (a chain), optionally with per-sample
// log-target values. Value semantics; diagnostics below are pure functions.
class SampleSequence {
 public:
  SampleSequence() = default;
  explicit SampleSequence(int dim, int origin_worker = 0) : dim_(dim), origin_worker_(origin_worker) {}

  int dim() const { return dim_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  void reserve(std::size_t n) { samples_.reserve(n); }
  void push_back(Vector x);
  void push_back(Vector x, double log_target);
  void append(const SampleSequence& other);

  const Vector& operator[](std::size_t i) const { return samples_[i]; }
  double component(std::size_t i, int j) const { return samples_[i][j]; }

  bool has_log_targets() const { return !log_targets_.empty(); }
  const std::vector<double>& log_targets() const { return log_targets_; }

  int origin_worker() const { return origin_worker_; }
  void set_origin_worker(int w) { origin_worker_ = w; }

  // n x d matrix, one row per sample
  Matrix as_matrix() const;
  std::vector<double> column(int j) const;

 private:
  int dim_ = 0;
  int origin_worker_ = 0;
  std::vector<Vector> samples_;
  std::vector<double> log_targets_;
};

struct FilterSpec {
  double discard_portion = 0.0;  // burn-in fraction in [0, 1)
  long lag = 1;                  // thinning stride >= 1
};

std::pair<Vector, Matrix> mean_and_covariance(const SampleSequence& seq);
Matrix correlation_matrix(const SampleSequence& seq);

// r(k) for k = 0..max_lag, normalized so r(0) = 1.
std::vector<double> autocorrelation(const SampleSequence& seq, int component, int max_lag);

double silverman_bandwidth(const SampleSequence& seq, int component);
std::vector<double> gaussian_kde(const SampleSequence& seq, int component, const std::vector<double>& grid);

double ecdf(const SampleSequence& seq, int component, double at);

// Drop the first floor(p*n) samples, then keep every lag-th of the rest.
SampleSequence filter(const SampleSequence& seq, const FilterSpec& spec);

// Concatenate chains in ascending origin_worker order.
SampleSequence unify(std::vector<SampleSequence> chains);

}  // namespace uqforge
