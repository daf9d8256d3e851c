#include <gtest/gtest.h>

#include "gptopt/bo/gp.hpp"
#include "gptopt/core/random.hpp"
#include "oracles.hpp"

using namespace gptopt;
using namespace gptopt::fixtures;
using namespace gptopt::bo;

namespace {

std::vector<Point> grid_points(int n, int d, Rng& rng) {
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back(rng.unit_point(d));
  return pts;
}

}  // namespace

TEST(Gp, PosteriorMatchesDenseSolveOracle) {
  Rng rng(2024);
  for (int m = 0; m < 50; ++m) {
    const auto model = random_gp_model(rng);
    for (int q = 0; q < 10; ++q) {
      const auto x = rng.unit_point(model.dim());
      const auto [mu, sd] = model.posterior_standardized(x);
      const auto [mu_o, sd_o] = dense_posterior(model, Eigen::Map<const Eigen::RowVectorXd>(x.data(), model.dim()));
      EXPECT_NEAR(mu, mu_o, 1e-8);
      EXPECT_NEAR(sd, sd_o, 1e-8);
    }
  }
}

TEST(Gp, BatchAndPointwisePosteriorsAgree) {
  Rng rng(8);
  const auto model = random_gp_model(rng);
  Eigen::MatrixXd xs(20, model.dim());
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < model.dim(); ++j) xs(i, j) = rng.uniform(-1, 1);
  const auto [mu, sd] = model.posterior_standardized(xs);
  for (int i = 0; i < 20; ++i) {
    const Point x(xs.row(i).data(), xs.row(i).data() + model.dim());
    Eigen::RowVectorXd row = xs.row(i);
    const auto [m1, s1] = model.posterior_standardized(std::vector<double>(row.data(), row.data() + row.size()));
    EXPECT_NEAR(mu(i), m1, 1e-12);
    EXPECT_NEAR(sd(i), s1, 1e-12);
  }
}

TEST(Gp, CholeskyReconstructsRegularizedGram) {
  Rng rng(9);
  const auto model = random_gp_model(rng);
  const auto& x = model.train_x();
  const Eigen::MatrixXd l = model.chol();
  Eigen::MatrixXd k = matern52_cross(x, x, model.hyper());
  k.diagonal().array() += model.noise();
  EXPECT_LT((l * l.transpose() - k).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Gp, InterpolatesSmoothData) {
  Rng rng(3);
  const auto pts = grid_points(25, 2, rng);
  std::vector<double> ys;
  for (const auto& p : pts) ys.push_back(std::sin(3 * p[0]) + p[1] * p[1]);
  const auto model = fit_gp(pts, ys);
  const double range = *std::max_element(ys.begin(), ys.end()) - *std::min_element(ys.begin(), ys.end());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto [mu, sd] = model.posterior(pts[i]);
    EXPECT_NEAR(mu, ys[i], 0.02 * range);
    EXPECT_LT(sd, 0.05 * range);
  }
}

TEST(Gp, RevertsToPriorFarFromData) {
  Rng rng(4);
  Eigen::MatrixXd x(8, 2);
  Eigen::VectorXd y(8);
  for (int i = 0; i < 8; ++i) {
    x(i, 0) = rng.uniform(-1.0, -0.9);
    x(i, 1) = rng.uniform(-1.0, -0.9);
    y(i) = rng.normal();
  }
  GpHyper h{Eigen::Vector2d(0.05, 0.05), 1.3, 1e-4};
  const auto model = GpModel::condition(x, y, h);
  const auto [mu, sd] = model.posterior_standardized(std::vector<double>{1.0, 1.0});
  EXPECT_NEAR(mu, model.mean_const(), 1e-9);
  EXPECT_NEAR(sd, std::sqrt(1.3), 1e-9);
  const auto [mu_near, sd_near] = model.posterior_standardized(std::vector<double>{x(0, 0), x(0, 1)});
  EXPECT_LT(sd_near, 0.05);
}

TEST(Gp, ConstantDataIsStable) {
  Rng rng(5);
  const auto pts = grid_points(6, 3, rng);
  const std::vector<double> ys(6, 4.2);
  const auto model = fit_gp(pts, ys);
  EXPECT_DOUBLE_EQ(model.y_std(), 1.0);
  const auto [mu, sd] = model.posterior(rng.unit_point(3));
  EXPECT_NEAR(mu, 4.2, 1e-9);
  EXPECT_TRUE(std::isfinite(sd));
}

TEST(Gp, MllGradientMatchesFiniteDifferences) {
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = rng.uniform_int(1, 3);
    const int n = 12;
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) x(i, j) = rng.uniform(-1, 1);
      y(i) = rng.normal();
    }
    GpHyper h;
    h.lengthscales = Eigen::VectorXd(d);
    for (int j = 0; j < d; ++j) h.lengthscales(j) = rng.log_uniform(0.3, 1.5);
    h.signal_variance = rng.log_uniform(0.5, 2.0);
    h.noise = rng.log_uniform(1e-3, 1e-1);
    const auto base = log_marginal_likelihood(x, y, h);
    ASSERT_TRUE(base.ok);
    const double eps = 1e-5;
    for (int p = 0; p < d + 2; ++p) {
      auto bump = [&](double delta) {
        GpHyper g = h;
        if (p < d) g.lengthscales(p) *= std::exp(delta);
        else if (p == d) g.signal_variance *= std::exp(delta);
        else g.noise *= std::exp(delta);
        return log_marginal_likelihood(x, y, g, false).value;
      };
      const double fd = (bump(eps) - bump(-eps)) / (2 * eps);
      EXPECT_NEAR(base.gradient(p), fd, 1e-5 * std::max(1.0, std::abs(fd))) << "param " << p;
    }
  }
}

TEST(Gp, OptimizerNeverEndsBelowItsStart) {
  Rng rng(7);
  const auto pts = grid_points(15, 2, rng);
  std::vector<double> ys;
  for (const auto& p : pts) ys.push_back(p[0] * p[0] - p[1]);
  const auto model = fit_gp(pts, ys);
  const auto& tr = model.trace();
  ASSERT_EQ(tr.start_mll.size(), tr.final_mll.size());
  ASSERT_FALSE(tr.final_mll.empty());
  for (std::size_t r = 0; r < tr.start_mll.size(); ++r)
    if (std::isfinite(tr.start_mll[r])) {
      EXPECT_GE(tr.final_mll[r], tr.start_mll[r]);
    }
  const double best = *std::max_element(tr.final_mll.begin(), tr.final_mll.end());
  EXPECT_EQ(tr.final_mll[static_cast<std::size_t>(tr.best_restart)], best);
}

TEST(Gp, FitIsDeterministicForSeed) {
  Rng rng(10);
  const auto pts = grid_points(12, 2, rng);
  std::vector<double> ys;
  for (const auto& p : pts) ys.push_back(std::cos(4 * p[0]) * p[1]);
  GpFitOptions opt;
  opt.seed = 77;
  const auto a = fit_gp(pts, ys, opt);
  const auto b = fit_gp(pts, ys, opt);
  EXPECT_EQ(a.hyper().lengthscales, b.hyper().lengthscales);
  EXPECT_EQ(a.log_marginal_likelihood(), b.log_marginal_likelihood());
}

TEST(Gp, RejectsDegenerateInput) {
  const std::vector<Point> one{{0.0, 0.0}};
  EXPECT_THROW(fit_gp(one, std::vector<double>{1.0}), SurrogateError);
  const std::vector<Point> two{{0.0, 0.0}, {0.5, 0.5}};
  EXPECT_THROW(fit_gp(two, std::vector<double>{1.0, std::nan("")}), SurrogateError);
  EXPECT_THROW(fit_gp(two, std::vector<double>{1.0}), SurrogateError);
}
