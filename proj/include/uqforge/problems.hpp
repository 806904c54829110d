#pragma once

#include <span>
#include <vector>

#include "uqforge/domain.hpp"
#include "uqforge/mc_forward.hpp"

// Built-in benchmark problems with analytically checkable answers. The CLI
// subcommands and the verification suites both build on these.
namespace uqforge::problems {

// --- simple inverse problem: flat prior, Gaussian likelihood ---------------
// mean (-1, 2), covariance diag(4, 1); flat prior truncated to a box wide
// enough that the truncation error in the posterior moments is negligible.
Vector simple_sip_mean();
Matrix simple_sip_cov();
TargetDensity simple_sip_posterior(double box_halfwidth = 15.0);

// --- simple forward problem: q = theta1 + theta2 ---------------------------
PriorSpec simple_sfp_input();
QoiMap sum_qoi();

// --- gravity: free-fall timing data, scalar g ------------------------------
struct GravityObservation {
  double altitude;  // m
  double time;      // s
  double sigma;     // s
};

std::span<const GravityObservation> gravity_data();  // 14 observations
double gravity_fall_time(double g, double altitude);
double gravity_log_likelihood(double g);
PriorSpec gravity_prior();  // U(8, 11)
TargetDensity gravity_posterior();
QoiMap projectile_qoi(double v0, double alpha, double h0);

// --- bimodal: equal-weight mixture of N(10, 1) and N(100, 25) --------------
PriorSpec bimodal_prior();  // U(-250, 250)
double bimodal_log_likelihood(double theta);

// --- modal: 3 parameters (theta1, theta2, sigma^2), one or two modes -------
double modal_log_likelihood(const Vector& theta, int num_modes);
PriorSpec modal_prior(int num_modes, bool beta_variant);

// --- straight line y = m x + c for sensitivity analysis --------------------
std::vector<PriorSpec> line_priors();  // m ~ U(2,5), c ~ U(3,7)
QoiMap line_qoi(double x);

}  // namespace uqforge::problems
