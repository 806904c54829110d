#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "uqforge/dram.hpp"
#include "uqforge/problems.hpp"

using namespace uqforge;

namespace {

Vector vec1(double v) { return Vector::Constant(1, v); }

TargetDensity standard_normal_1d() {
  return TargetDensity(BoxDomain::unbounded(1), [](const Vector&) { return 0.0; },
                       [](const Vector& x) { return -0.5 * x.squaredNorm(); });
}

DramOptions basic_options(long n_pos, const Vector& start, const Matrix& cov) {
  DramOptions o;
  o.n_pos = n_pos;
  o.initial_position = start;
  o.initial_proposal_cov = cov;
  return o;
}

}  // namespace

TEST_CASE("log proposal density") {
  const Vector a = vec1(1.3);
  CHECK(log_proposal_density(a, a, Matrix::Identity(1, 1)) == 0.0);

  Vector u(2), v(2);
  u << 0.0, 0.0;
  v << 1.0, 1.0;  // squared distance 2
  CHECK(log_proposal_density(u, v, Matrix::Identity(2, 2)) == doctest::Approx(-1.0));

  RngStream rng(4);
  for (int i = 0; i < 50; ++i) {
    Vector x(2), y(2);
    x << rng.normal(), rng.normal();
    y << rng.normal(), rng.normal();
    Matrix c(2, 2);
    const double off = 0.3 * rng.normal();
    c << 1.0 + rng.uniform01(), off, off, 1.0 + rng.uniform01();
    CHECK(log_proposal_density(x, y, c) == doctest::Approx(log_proposal_density(y, x, c)));
  }
}

TEST_CASE("first-stage acceptance") {
  CHECK(alpha_first(-1.0, -1.0, 0.0, 0.0) == 1.0);
  CHECK(alpha_first(-1.0, kNegInf, 0.0, 0.0) == 0.0);
  CHECK(alpha_first(0.0, std::log(0.5), 0.0, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("staged acceptance") {
  const std::vector<Matrix> covs = {Matrix::Identity(1, 1), Matrix::Identity(1, 1)};

  SUBCASE("zero density candidate") {
    const std::vector<Vector> path = {vec1(0.0), vec1(1.0), vec1(2.0)};
    const std::vector<double> lps = {0.0, -0.5, kNegInf};
    CHECK(alpha_stage(2, path, lps, covs) == 0.0);
  }

  SUBCASE("all targets equal gives certain acceptance") {
    // collinear equidistant points keep every proposal ratio at one
    const std::vector<Vector> path = {vec1(0.0), vec1(1.0), vec1(2.0)};
    const std::vector<double> lps = {-2.0, -2.0, -2.0};
    CHECK(alpha_stage(2, path, lps, covs) == 1.0);
  }

  SUBCASE("vanishing reverse factor forces rejection") {
    // alpha_1(x2, x1) = 1 because pi(x1) > pi(x2), while alpha_1(a, x1) < 1
    const std::vector<Vector> path = {vec1(0.0), vec1(1.0), vec1(2.0)};
    const std::vector<double> lps = {0.0, -0.5, -3.0};
    CHECK(alpha_stage(2, path, lps, covs) == 0.0);
  }

  SUBCASE("values stay in [0,1] for random paths") {
    RngStream rng(17);
    const std::vector<Matrix> c3 = {Matrix::Identity(1, 1), 4.0 * Matrix::Identity(1, 1),
                                    9.0 * Matrix::Identity(1, 1)};
    for (int trial = 0; trial < 500; ++trial) {
      const std::vector<Vector> path = {vec1(rng.normal()), vec1(rng.normal()), vec1(rng.normal()),
                                        vec1(rng.normal())};
      std::vector<double> lps(4);
      for (auto& lp : lps) lp = -3.0 * rng.uniform01();
      for (int stage = 2; stage <= 3; ++stage) {
        const double a = alpha_stage(stage, std::span(path.data(), stage + 1),
                                     std::span(lps.data(), stage + 1), c3);
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
      }
    }
  }
}

TEST_CASE("adaptive covariance update") {
  SampleSequence constant(2);
  for (int i = 0; i < 7; ++i) constant.push_back(Vector::Constant(2, 0.5));
  const Matrix c = am_update(constant, 2.88, 1e-5);
  CHECK(c(0, 0) == doctest::Approx(2.88e-5));
  CHECK(c(0, 1) == 0.0);

  // default scaling for d = 2
  DramOptions o;
  CHECK(o.effective_s_d(2) == doctest::Approx(2.88));

  RngStream rng(8);
  Matrix cov = Matrix::Zero(2, 2);
  cov(0, 0) = 4.0;
  cov(1, 1) = 1.0;
  const PriorSpec g = PriorSpec::Gaussian(Vector::Zero(2), cov);
  SampleSequence draws(2);
  for (int i = 0; i < 100000; ++i) draws.push_back(g.realize(rng));
  const Matrix adapted = am_update(draws, 2.88, 1e-5);
  CHECK(adapted(0, 0) == doctest::Approx(2.88 * 4.0).epsilon(0.05));
  CHECK(adapted(1, 1) == doctest::Approx(2.88 * 1.0).epsilon(0.05));
}

TEST_CASE("stage covariance scaling") {
  Matrix master(2, 2);
  master << 2.0, 0.5, 0.5, 1.0;
  const std::vector<double> scales = {1.0, 9.0, 81.0, 729.0};
  CHECK(stage_covariance(master, 1, scales).isApprox(master));
  CHECK(stage_covariance(Matrix::Identity(2, 2), 2, scales).isApprox(9.0 * Matrix::Identity(2, 2)));
  CHECK(stage_covariance(master, 3, scales).isApprox(81.0 * master));
  CHECK(stage_covariance(master, 4, scales).isApprox(729.0 * master));
  CHECK_THROWS_AS(stage_covariance(master, 5, scales), DimensionError);
}

TEST_CASE("chain length is exact and support is honored") {
  // target supported on [0,1] with proposals frequently out of bounds
  const TargetDensity target(BoxDomain(vec1(0.0), vec1(1.0)), [](const Vector&) { return 0.0; },
                             [](const Vector&) { return 0.0; });
  DramOptions o = basic_options(2000, vec1(0.5), Matrix::Identity(1, 1) * 4.0);
  RngStream rng(3);
  const DramResult r = run_dram(target, o, rng);
  CHECK(r.chain.size() == 2000);
  CHECK(r.num_out_of_support > 0);
  for (std::size_t i = 0; i < r.chain.size(); ++i) {
    CHECK(r.chain[i][0] >= 0.0);
    CHECK(r.chain[i][0] <= 1.0);
  }

  // out-of-bounds candidates redrawn instead of recorded
  o.out_of_bounds_in_chain = false;
  RngStream rng2(3);
  const DramResult r2 = run_dram(target, o, rng2);
  CHECK(r2.chain.size() == 2000);
}

TEST_CASE("flat target accepts every move") {
  const TargetDensity flat(BoxDomain::unbounded(1), [](const Vector&) { return 0.0; },
                           [](const Vector&) { return 0.0; });
  DramOptions o = basic_options(5000, vec1(0.0), Matrix::Identity(1, 1));
  RngStream rng(12);
  const DramResult r = run_dram(flat, o, rng);
  CHECK(r.acceptance_rate() == doctest::Approx(1.0));
}

TEST_CASE("no adaptation keeps the initial covariance") {
  const TargetDensity target = standard_normal_1d();
  DramOptions o = basic_options(500, vec1(0.0), Matrix::Identity(1, 1) * 0.7);
  o.adapt_interval = 0;
  RngStream rng(5);
  const DramResult r = run_dram(target, o, rng);
  CHECK(r.final_proposal_cov(0, 0) == 0.7);
}

TEST_CASE("invalid start is rejected") {
  const TargetDensity target(BoxDomain(vec1(0.0), vec1(1.0)), [](const Vector&) { return 0.0; },
                             [](const Vector&) { return 0.0; });
  DramOptions o = basic_options(100, vec1(2.0), Matrix::Identity(1, 1));
  RngStream rng(1);
  CHECK_THROWS_AS(run_dram(target, o, rng), InvalidStartError);
}

TEST_CASE("simple posterior moments are recovered") {
  const TargetDensity target = problems::simple_sip_posterior();
  DramOptions o = basic_options(100000, Vector::Zero(2), 2.88 * Matrix::Identity(2, 2));
  o.adapt_interval = 100;
  o.n0 = 1000;
  RngStream rng(20240817);
  const DramResult r = run_dram(target, o, rng);
  const auto [mean, cov] = mean_and_covariance(r.chain);
  CHECK(mean[0] == doctest::Approx(-1.0).epsilon(0.06));
  CHECK(std::abs(mean[0] + 1.0) < 0.06);
  CHECK(std::abs(mean[1] - 2.0) < 0.03);
  CHECK(cov(0, 0) == doctest::Approx(4.0).epsilon(0.08));
  CHECK(cov(1, 1) == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("delayed rejection stages also sample correctly") {
  const TargetDensity target = problems::simple_sip_posterior();
  DramOptions o = basic_options(60000, Vector::Zero(2), 2.88 * Matrix::Identity(2, 2));
  o.n_stages = 3;
  o.stage_scales = {1.0, 4.0, 16.0};
  o.adapt_interval = 100;
  o.n0 = 500;
  RngStream rng(7111);
  const DramResult r = run_dram(target, o, rng);
  CHECK(r.stage_accepts[1] + r.stage_accepts[2] > 0);  // higher stages in use
  const auto [mean, cov] = mean_and_covariance(r.chain);
  CHECK(std::abs(mean[0] + 1.0) < 0.12);
  CHECK(std::abs(mean[1] - 2.0) < 0.06);
  CHECK(cov(0, 0) == doctest::Approx(4.0).epsilon(0.12));
  CHECK(cov(1, 1) == doctest::Approx(1.0).epsilon(0.12));
}

TEST_CASE("stationarity against exact draws") {
  const TargetDensity target = standard_normal_1d();
  DramOptions o = basic_options(100000, vec1(0.0), Matrix::Identity(1, 1) * 2.4 * 2.4);
  RngStream rng(424242);
  const DramResult r = run_dram(target, o, rng);
  std::vector<double> second_half;
  for (std::size_t i = r.chain.size() / 2; i < r.chain.size(); ++i) second_half.push_back(r.chain[i][0]);
  RngStream exact_rng(55);
  std::vector<double> exact(100000);
  for (auto& v : exact) v = exact_rng.normal();
  const double d = testsupport::ks_statistic(second_half, exact);
  CHECK(d < testsupport::ks_critical(1e-3, second_half.size(), exact.size()));
}

TEST_CASE("runs are bitwise reproducible") {
  const TargetDensity target = problems::simple_sip_posterior();
  DramOptions o = basic_options(5000, Vector::Zero(2), Matrix::Identity(2, 2));
  o.adapt_interval = 50;
  RngStream rng_a(99), rng_b(99);
  const DramResult a = run_dram(target, o, rng_a);
  const DramResult b = run_dram(target, o, rng_b);
  REQUIRE(a.chain.size() == b.chain.size());
  for (std::size_t i = 0; i < a.chain.size(); ++i) {
    CHECK(a.chain[i][0] == b.chain[i][0]);
    CHECK(a.chain[i][1] == b.chain[i][1]);
    CHECK(a.chain.log_targets()[i] == b.chain.log_targets()[i]);
  }
}

TEST_CASE("translated target yields translated chain") {
  const Vector shift = Vector::Constant(1, 3.25);
  const TargetDensity base = standard_normal_1d();
  const TargetDensity moved(BoxDomain::unbounded(1), [](const Vector&) { return 0.0; },
                            [shift](const Vector& x) { return -0.5 * (x - shift).squaredNorm(); });
  DramOptions o = basic_options(20000, vec1(0.4), Matrix::Identity(1, 1) * 1.7);
  DramOptions o_shift = o;
  o_shift.initial_position = vec1(0.4 + 3.25);
  RngStream rng_a(2718), rng_b(2718);
  const DramResult a = run_dram(base, o, rng_a);
  const DramResult b = run_dram(moved, o_shift, rng_b);
  for (std::size_t i = 0; i < a.chain.size(); ++i) {
    CHECK(std::abs(b.chain[i][0] - (a.chain[i][0] + 3.25)) < 1e-9);
  }
}
