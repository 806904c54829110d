#pragma once

#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include "uqforge/errors.hpp"
#include "uqforge/math.hpp"
#include "uqforge/rng.hpp"

namespace uqforge {

// Axis-aligned box, the support of every density handled here. Bounds may be
// infinite; membership is inclusive of the bounds.
class BoxDomain {
 public:
  BoxDomain(Vector lower, Vector upper);

  static BoxDomain unbounded(int dim);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  bool contains(const Vector& x) const;
  bool is_bounded() const;
  // sum of log widths; only meaningful for bounded boxes
  double log_volume() const;

 private:
  Vector lower_;
  Vector upper_;
};

// Componentwise [max(lowers), min(uppers)]; throws EmptyDomainError when any
// coordinate interval collapses.
BoxDomain intersect_domains(const BoxDomain& a, const BoxDomain& b);

double log_uniform_pdf(const Vector& x, const BoxDomain& box);
double log_gaussian_pdf(const Vector& x, const Vector& mean, const Matrix& cov);

// Prior distribution: uniform / Gaussian / beta / gamma / inverse-gamma /
// log-normal, or an ordered concatenation of those. Immutable after
// construction and shareable across workers.
class PriorSpec {
 public:
  static PriorSpec Uniform(BoxDomain box);
  static PriorSpec Gaussian(Vector mean, Matrix cov);
  static PriorSpec Beta(double alpha, double beta);
  static PriorSpec Gamma(double shape, double scale);
  static PriorSpec InverseGamma(double shape, double scale);
  static PriorSpec LogNormal(double location, double scale);
  static PriorSpec Concatenated(std::vector<PriorSpec> parts);

  int dim() const;
  double log_pdf(const Vector& x) const;
  Vector realize(RngStream& rng) const;
  BoxDomain support() const;

  // Analytic moments, used by tests and for proposal seeding.
  Vector mean() const;
  Vector variance() const;

 private:
  struct UniformF {
    std::shared_ptr<const BoxDomain> box;
  };
  struct GaussianF {
    Vector mean;
    Matrix cov;
    std::shared_ptr<const Eigen::LLT<Matrix>> llt;
    double log_norm;  // -0.5 * (n log 2pi + log det)
  };
  struct BetaF {
    double alpha, beta, log_norm;
  };
  struct GammaF {
    double shape, scale, log_norm;
  };
  struct InvGammaF {
    double shape, scale, log_norm;
  };
  struct LogNormalF {
    double location, scale;
  };
  struct ConcatF {
    std::vector<PriorSpec> parts;
    int total_dim;
  };

  using Family = std::variant<UniformF, GaussianF, BetaF, GammaF, InvGammaF, LogNormalF, ConcatF>;

  explicit PriorSpec(Family f) : family_(std::move(f)) {}
  Family family_;
};

// log-prior + log-likelihood pair over a box domain. Evaluation outside the
// domain is -inf; both terms are pure functions of the parameter vector.
class TargetDensity {
 public:
  using LogDensityFn = std::function<double(const Vector&)>;

  TargetDensity(BoxDomain domain, LogDensityFn log_prior, LogDensityFn log_likelihood);

  static TargetDensity from_prior(const PriorSpec& prior, LogDensityFn log_likelihood);

  int dim() const { return domain_.dim(); }
  const BoxDomain& domain() const { return domain_; }

  double log_prior(const Vector& x) const;
  double log_likelihood(const Vector& x) const;
  double log_posterior(const Vector& x) const;
  // log_prior + tau * log_likelihood; tau = 0 reduces to the prior,
  // tau = 1 to the posterior.
  double log_tempered(const Vector& x, double tau) const;

 private:
  BoxDomain domain_;
  LogDensityFn log_prior_;
  LogDensityFn log_like_;
};

}  // namespace uqforge
