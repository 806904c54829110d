#include "uqforge/problems.hpp"

#include <array>
#include <cmath>

namespace uqforge::problems {

Vector simple_sip_mean() {
  Vector mu(2);
  mu << -1.0, 2.0;
  return mu;
}

Matrix simple_sip_cov() {
  Matrix c(2, 2);
  c << 4.0, 0.0, 0.0, 1.0;
  return c;
}

TargetDensity simple_sip_posterior(double box_halfwidth) {
  BoxDomain box(Vector::Constant(2, -box_halfwidth), Vector::Constant(2, box_halfwidth));
  const double log_prior_value = -box.log_volume();
  return TargetDensity(
      box, [log_prior_value](const Vector&) { return log_prior_value; },
      [](const Vector& theta) {
        const double d1 = theta[0] + 1.0;
        const double d2 = theta[1] - 2.0;
        return -0.5 * (d1 * d1 / 4.0 + d2 * d2);
      });
}

PriorSpec simple_sfp_input() { return PriorSpec::Gaussian(simple_sip_mean(), simple_sip_cov()); }

QoiMap sum_qoi() {
  return QoiMap{2, 1, [](const Vector& theta) { return Vector::Constant(1, theta[0] + theta[1]); }};
}

namespace {

constexpr std::array<GravityObservation, 14> kGravityData = {{
    {10.0, 1.41, 0.02},
    {20.0, 2.14, 0.12},
    {30.0, 2.49, 0.02},
    {40.0, 2.87, 0.01},
    {50.0, 3.22, 0.03},
    {60.0, 3.49, 0.01},
    {70.0, 3.81, 0.03},
    {80.0, 4.07, 0.03},
    {90.0, 4.32, 0.03},
    {100.0, 4.47, 0.05},
    {110.0, 4.75, 0.01},
    {120.0, 4.99, 0.04},
    {130.0, 5.16, 0.01},
    {140.0, 5.26, 0.09},
}};

}  // namespace

std::span<const GravityObservation> gravity_data() {
  return std::span<const GravityObservation>(kGravityData.data(), kGravityData.size());
}

double gravity_fall_time(double g, double altitude) { return std::sqrt(2.0 * altitude / g); }

double gravity_log_likelihood(double g) {
  double misfit = 0.0;
  for (const auto& obs : kGravityData) {
    const double r = (gravity_fall_time(g, obs.altitude) - obs.time) / obs.sigma;
    misfit += r * r;
  }
  return -0.5 * misfit;
}

PriorSpec gravity_prior() {
  return PriorSpec::Uniform(BoxDomain(Vector::Constant(1, 8.0), Vector::Constant(1, 11.0)));
}

TargetDensity gravity_posterior() {
  return TargetDensity::from_prior(gravity_prior(),
                                   [](const Vector& theta) { return gravity_log_likelihood(theta[0]); });
}

QoiMap projectile_qoi(double v0, double alpha, double h0) {
  return QoiMap{1, 1, [v0, alpha, h0](const Vector& theta) {
                  return Vector::Constant(1, projectile_distance(theta[0], v0, alpha, h0));
                }};
}

PriorSpec bimodal_prior() {
  return PriorSpec::Uniform(BoxDomain(Vector::Constant(1, -250.0), Vector::Constant(1, 250.0)));
}

double bimodal_log_likelihood(double theta) {
  // f = f1/2 + f2/2 with f1 = N(10, 1^2), f2 = N(100, 5^2)
  const double z1 = theta - 10.0;
  const double z2 = (theta - 100.0) / 5.0;
  const double lf1 = -0.5 * (kLogTwoPi + z1 * z1);
  const double lf2 = -0.5 * (kLogTwoPi + z2 * z2) - std::log(5.0);
  const double m = std::max(lf1, lf2);
  return m + std::log(0.5 * std::exp(lf1 - m) + 0.5 * std::exp(lf2 - m));
}

double modal_log_likelihood(const Vector& theta, int num_modes) {
  if (theta.size() != 3) throw DimensionError("modal likelihood expects (theta1, theta2, sigma^2)");
  if (num_modes != 1 && num_modes != 2) throw UqError("modal likelihood: num_modes must be 1 or 2");
  const double t1 = theta[0];
  const double t2 = theta[1];
  const double sigma_sq = theta[2];
  if (!(sigma_sq > 0.0)) return kNegInf;

  static const double data_plus[5] = {72.0470, 71.8995, 72.2801, 71.9421, 72.3578};
  static const double data_minus[5] = {28.0292, 27.3726, 27.5388, 27.0357, 27.1588};

  const double root = std::sqrt(t1 * t1 + 4.0 * t2 * t2);
  const double base = 10.0 * t1 + 20.0 * t2;
  double sum_sq = 0.0;

  const double model_plus = 10.0 * std::sqrt(base + 10.0 * root);
  for (double d : data_plus) {
    const double r = model_plus - d;
    sum_sq += r * r;
  }
  double norm = -2.5 * std::log(2.0 * M_PI * sigma_sq);
  if (num_modes == 2) {
    const double inner = base - 10.0 * root;
    const double model_minus = 10.0 * std::sqrt(std::max(inner, 0.0));
    for (double d : data_minus) {
      const double r = model_minus - d;
      sum_sq += r * r;
    }
    norm = -5.0 * std::log(2.0 * M_PI * sigma_sq);
  }
  return norm - 0.5 * sum_sq / sigma_sq;
}

PriorSpec modal_prior(int num_modes, bool beta_variant) {
  const PriorSpec box2 = PriorSpec::Uniform(BoxDomain(Vector::Zero(2), Vector::Constant(2, 3.0)));
  if (!beta_variant) {
    const PriorSpec sigma = PriorSpec::Uniform(BoxDomain(Vector::Zero(1), Vector::Constant(1, 0.3)));
    return PriorSpec::Concatenated({box2, sigma});
  }
  const double beta = num_modes == 1 ? 0.09709133373799 : 0.08335837191688;
  return PriorSpec::Concatenated({box2, PriorSpec::Beta(3.0, beta)});
}

std::vector<PriorSpec> line_priors() {
  std::vector<PriorSpec> priors;
  priors.push_back(PriorSpec::Uniform(BoxDomain(Vector::Constant(1, 2.0), Vector::Constant(1, 5.0))));
  priors.push_back(PriorSpec::Uniform(BoxDomain(Vector::Constant(1, 3.0), Vector::Constant(1, 7.0))));
  return priors;
}

QoiMap line_qoi(double x) {
  return QoiMap{2, 1, [x](const Vector& theta) { return Vector::Constant(1, theta[0] * x + theta[1]); }};
}

}  // namespace uqforge::problems
