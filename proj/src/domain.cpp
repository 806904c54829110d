#include "uqforge/domain.hpp"

#include <algorithm>
#include <cmath>

namespace uqforge {

BoxDomain::BoxDomain(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.size() == 0) {
    throw DimensionError("box bounds must have equal, nonzero dimension");
  }
  for (int j = 0; j < lower_.size(); ++j) {
    if (!(lower_[j] < upper_[j])) {
      throw EmptyDomainError("box has lower[" + std::to_string(j) + "] >= upper[" + std::to_string(j) + "]");
    }
  }
}

BoxDomain BoxDomain::unbounded(int dim) {
  const double inf = std::numeric_limits<double>::infinity();
  return BoxDomain(Vector::Constant(dim, -inf), Vector::Constant(dim, inf));
}

bool BoxDomain::contains(const Vector& x) const {
  if (x.size() != lower_.size()) {
    throw DimensionError("point dimension does not match box dimension");
  }
  for (int j = 0; j < x.size(); ++j) {
    if (x[j] < lower_[j] || x[j] > upper_[j]) return false;
  }
  return true;
}

bool BoxDomain::is_bounded() const {
  return lower_.allFinite() && upper_.allFinite();
}

double BoxDomain::log_volume() const {
  double s = 0.0;
  for (int j = 0; j < lower_.size(); ++j) s += std::log(upper_[j] - lower_[j]);
  return s;
}

BoxDomain intersect_domains(const BoxDomain& a, const BoxDomain& b) {
  if (a.dim() != b.dim()) throw DimensionError("cannot intersect boxes of different dimension");
  Vector lo = a.lower().cwiseMax(b.lower());
  Vector hi = a.upper().cwiseMin(b.upper());
  for (int j = 0; j < lo.size(); ++j) {
    if (!(lo[j] < hi[j])) throw EmptyDomainError("box intersection is empty at coordinate " + std::to_string(j));
  }
  return BoxDomain(std::move(lo), std::move(hi));
}

double log_uniform_pdf(const Vector& x, const BoxDomain& box) {
  if (x.size() != box.dim()) throw DimensionError("log_uniform_pdf: dimension mismatch");
  if (!box.contains(x)) return kNegInf;
  return -box.log_volume();
}

double log_gaussian_pdf(const Vector& x, const Vector& mean, const Matrix& cov) {
  if (x.size() != mean.size() || cov.rows() != x.size() || cov.cols() != x.size()) {
    throw DimensionError("log_gaussian_pdf: dimension mismatch");
  }
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw DecompositionError("log_gaussian_pdf: covariance is not positive-definite");
  }
  double log_det = 0.0;
  for (int j = 0; j < cov.rows(); ++j) log_det += 2.0 * std::log(llt.matrixL()(j, j));
  const Vector diff = x - mean;
  const double quad = llt.matrixL().solve(diff).squaredNorm();
  return -0.5 * (static_cast<double>(x.size()) * kLogTwoPi + log_det + quad);
}

namespace {

double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw UqError(std::string(what) + " must be positive and finite");
}

}  // namespace

PriorSpec PriorSpec::Uniform(BoxDomain box) {
  return PriorSpec(UniformF{std::make_shared<const BoxDomain>(std::move(box))});
}

PriorSpec PriorSpec::Gaussian(Vector mean, Matrix cov) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw DimensionError("Gaussian prior: covariance shape does not match mean");
  }
  if (!cov.isApprox(cov.transpose(), 1e-12)) {
    throw DecompositionError("Gaussian prior: covariance is not symmetric");
  }
  auto llt = std::make_shared<Eigen::LLT<Matrix>>(cov);
  if (llt->info() != Eigen::Success) {
    throw DecompositionError("Gaussian prior: covariance is not positive-definite");
  }
  double log_det = 0.0;
  for (int j = 0; j < cov.rows(); ++j) log_det += 2.0 * std::log(llt->matrixL()(j, j));
  const double log_norm = -0.5 * (static_cast<double>(mean.size()) * kLogTwoPi + log_det);
  return PriorSpec(GaussianF{std::move(mean), std::move(cov), std::move(llt), log_norm});
}

PriorSpec PriorSpec::Beta(double alpha, double beta) {
  require_positive(alpha, "beta alpha");
  require_positive(beta, "beta beta");
  return PriorSpec(BetaF{alpha, beta, -log_beta_fn(alpha, beta)});
}

PriorSpec PriorSpec::Gamma(double shape, double scale) {
  require_positive(shape, "gamma shape");
  require_positive(scale, "gamma scale");
  return PriorSpec(GammaF{shape, scale, -std::lgamma(shape) - shape * std::log(scale)});
}

PriorSpec PriorSpec::InverseGamma(double shape, double scale) {
  require_positive(shape, "inverse-gamma shape");
  require_positive(scale, "inverse-gamma scale");
  return PriorSpec(InvGammaF{shape, scale, shape * std::log(scale) - std::lgamma(shape)});
}

PriorSpec PriorSpec::LogNormal(double location, double scale) {
  require_positive(scale, "log-normal scale");
  return PriorSpec(LogNormalF{location, scale});
}

PriorSpec PriorSpec::Concatenated(std::vector<PriorSpec> parts) {
  if (parts.empty()) throw DimensionError("Concatenated prior needs at least one part");
  int total = 0;
  for (const auto& p : parts) total += p.dim();
  return PriorSpec(ConcatF{std::move(parts), total});
}

int PriorSpec::dim() const {
  return std::visit(
      [](const auto& f) -> int {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformF>) {
          return f.box->dim();
        } else if constexpr (std::is_same_v<T, GaussianF>) {
          return static_cast<int>(f.mean.size());
        } else if constexpr (std::is_same_v<T, ConcatF>) {
          return f.total_dim;
        } else {
          return 1;
        }
      },
      family_);
}

double PriorSpec::log_pdf(const Vector& x) const {
  if (x.size() != dim()) throw DimensionError("prior log_pdf: dimension mismatch");
  return std::visit(
      [&x](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformF>) {
          return log_uniform_pdf(x, *f.box);
        } else if constexpr (std::is_same_v<T, GaussianF>) {
          const Vector diff = x - f.mean;
          return f.log_norm - 0.5 * f.llt->matrixL().solve(diff).squaredNorm();
        } else if constexpr (std::is_same_v<T, BetaF>) {
          const double v = x[0];
          if (v < 0.0 || v > 1.0) return kNegInf;
          return f.log_norm + (f.alpha - 1.0) * std::log(v) + (f.beta - 1.0) * std::log1p(-v);
        } else if constexpr (std::is_same_v<T, GammaF>) {
          const double v = x[0];
          if (v <= 0.0) return kNegInf;
          return f.log_norm + (f.shape - 1.0) * std::log(v) - v / f.scale;
        } else if constexpr (std::is_same_v<T, InvGammaF>) {
          const double v = x[0];
          if (v <= 0.0) return kNegInf;
          return f.log_norm - (f.shape + 1.0) * std::log(v) - f.scale / v;
        } else if constexpr (std::is_same_v<T, LogNormalF>) {
          const double v = x[0];
          if (v <= 0.0) return kNegInf;
          const double z = (std::log(v) - f.location) / f.scale;
          return -std::log(v) - std::log(f.scale) - 0.5 * (kLogTwoPi + z * z);
        } else {  // ConcatF
          double total = 0.0;
          int offset = 0;
          for (const auto& part : f.parts) {
            const int d = part.dim();
            total += part.log_pdf(x.segment(offset, d));
            if (total == kNegInf) return kNegInf;
            offset += d;
          }
          return total;
        }
      },
      family_);
}

Vector PriorSpec::realize(RngStream& rng) const {
  return std::visit(
      [&rng](const auto& f) -> Vector {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformF>) {
          const auto& box = *f.box;
          Vector x(box.dim());
          for (int j = 0; j < x.size(); ++j) {
            x[j] = box.lower()[j] + rng.uniform01() * (box.upper()[j] - box.lower()[j]);
          }
          return x;
        } else if constexpr (std::is_same_v<T, GaussianF>) {
          Vector z(f.mean.size());
          for (int j = 0; j < z.size(); ++j) z[j] = rng.normal();
          return f.mean + f.llt->matrixL() * z;
        } else if constexpr (std::is_same_v<T, BetaF>) {
          Vector x(1);
          x[0] = rng.beta(f.alpha, f.beta);
          return x;
        } else if constexpr (std::is_same_v<T, GammaF>) {
          Vector x(1);
          x[0] = rng.gamma(f.shape, f.scale);
          return x;
        } else if constexpr (std::is_same_v<T, InvGammaF>) {
          Vector x(1);
          x[0] = 1.0 / rng.gamma(f.shape, 1.0 / f.scale);
          return x;
        } else if constexpr (std::is_same_v<T, LogNormalF>) {
          Vector x(1);
          x[0] = std::exp(f.location + f.scale * rng.normal());
          return x;
        } else {  // ConcatF
          Vector x(f.total_dim);
          int offset = 0;
          for (const auto& part : f.parts) {
            const int d = part.dim();
            x.segment(offset, d) = part.realize(rng);
            offset += d;
          }
          return x;
        }
      },
      family_);
}

BoxDomain PriorSpec::support() const {
  const double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      [inf](const auto& f) -> BoxDomain {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformF>) {
          return *f.box;
        } else if constexpr (std::is_same_v<T, GaussianF>) {
          return BoxDomain::unbounded(static_cast<int>(f.mean.size()));
        } else if constexpr (std::is_same_v<T, BetaF>) {
          return BoxDomain(Vector::Constant(1, 0.0), Vector::Constant(1, 1.0));
        } else if constexpr (std::is_same_v<T, LogNormalF>) {
          return BoxDomain(Vector::Constant(1, 0.0), Vector::Constant(1, inf));
        } else if constexpr (std::is_same_v<T, ConcatF>) {
          Vector lo(f.total_dim), hi(f.total_dim);
          int offset = 0;
          for (const auto& part : f.parts) {
            const BoxDomain s = part.support();
            lo.segment(offset, s.dim()) = s.lower();
            hi.segment(offset, s.dim()) = s.upper();
            offset += s.dim();
          }
          return BoxDomain(std::move(lo), std::move(hi));
        } else {  // GammaF, InvGammaF
          return BoxDomain(Vector::Constant(1, 0.0), Vector::Constant(1, inf));
        }
      },
      family_);
}

Vector PriorSpec::mean() const {
  return std::visit(
      [](const auto& f) -> Vector {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformF>) {
          return 0.5 * (f.box->lower() + f.box->upper());
        } else if constexpr (std::is_same_v<T, GaussianF>) {
          return f.mean;
        } else if constexpr (std::is_same_v<T, BetaF>) {
          return Vector::Constant(1, f.alpha / (f.alpha + f.beta));
        } else if constexpr (std::is_same_v<T, GammaF>) {
          return Vector::Constant(1, f.shape * f.scale);
        } else if constexpr (std::is_same_v<T, InvGammaF>) {
          if (f.shape <= 1.0) throw UqError("inverse-gamma mean undefined for shape <= 1");
          return Vector::Constant(1, f.scale / (f.shape - 1.0));
        } else if constexpr (std::is_same_v<T, LogNormalF>) {
          return Vector::Constant(1, std::exp(f.location + 0.5 * f.scale * f.scale));
        } else {  // ConcatF
          Vector m(f.total_dim);
          int offset = 0;
          for (const auto& part : f.parts) {
            m.segment(offset, part.dim()) = part.mean();
            offset += part.dim();
          }
          return m;
        }
      },
      family_);
}

Vector PriorSpec::variance() const {
  return std::visit(
      [](const auto& f) -> Vector {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniformF>) {
          const Vector w = f.box->upper() - f.box->lower();
          return w.cwiseProduct(w) / 12.0;
        } else if constexpr (std::is_same_v<T, GaussianF>) {
          return f.cov.diagonal();
        } else if constexpr (std::is_same_v<T, BetaF>) {
          const double s = f.alpha + f.beta;
          return Vector::Constant(1, f.alpha * f.beta / (s * s * (s + 1.0)));
        } else if constexpr (std::is_same_v<T, GammaF>) {
          return Vector::Constant(1, f.shape * f.scale * f.scale);
        } else if constexpr (std::is_same_v<T, InvGammaF>) {
          if (f.shape <= 2.0) throw UqError("inverse-gamma variance undefined for shape <= 2");
          const double a1 = f.shape - 1.0;
          return Vector::Constant(1, f.scale * f.scale / (a1 * a1 * (f.shape - 2.0)));
        } else if constexpr (std::is_same_v<T, LogNormalF>) {
          const double s2 = f.scale * f.scale;
          return Vector::Constant(1, (std::exp(s2) - 1.0) * std::exp(2.0 * f.location + s2));
        } else {  // ConcatF
          Vector v(f.total_dim);
          int offset = 0;
          for (const auto& part : f.parts) {
            v.segment(offset, part.dim()) = part.variance();
            offset += part.dim();
          }
          return v;
        }
      },
      family_);
}

TargetDensity::TargetDensity(BoxDomain domain, LogDensityFn log_prior, LogDensityFn log_likelihood)
    : domain_(std::move(domain)), log_prior_(std::move(log_prior)), log_like_(std::move(log_likelihood)) {}

TargetDensity TargetDensity::from_prior(const PriorSpec& prior, LogDensityFn log_likelihood) {
  return TargetDensity(
      prior.support(), [prior](const Vector& x) { return prior.log_pdf(x); }, std::move(log_likelihood));
}

double TargetDensity::log_prior(const Vector& x) const {
  if (!domain_.contains(x)) return kNegInf;
  return log_prior_(x);
}

double TargetDensity::log_likelihood(const Vector& x) const {
  if (!domain_.contains(x)) return kNegInf;
  return log_like_(x);
}

double TargetDensity::log_posterior(const Vector& x) const {
  const double lp = log_prior(x);
  if (lp == kNegInf) return kNegInf;
  const double ll = log_like_(x);
  if (ll == kNegInf) return kNegInf;
  return lp + ll;
}

double TargetDensity::log_tempered(const Vector& x, double tau) const {
  const double lp = log_prior(x);
  if (lp == kNegInf) return kNegInf;
  if (tau == 0.0) return lp;
  const double ll = log_like_(x);
  if (ll == kNegInf) return kNegInf;
  return lp + tau * ll;
}

}  // namespace uqforge
