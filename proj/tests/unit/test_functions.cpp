#include <gtest/gtest.h>

#include "gptopt/core/random.hpp"
#include "gptopt/functions/synthetic.hpp"
#include "oracles.hpp"

using namespace gptopt;
using namespace gptopt::fixtures;
using namespace gptopt::functions;

namespace {

std::vector<Point> probe_points(int dim, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back(rng.unit_point(dim));
  // Corners and center are part of the domain too.
  pts.push_back(Point(static_cast<std::size_t>(dim), -1.0));
  pts.push_back(Point(static_cast<std::size_t>(dim), 1.0));
  pts.push_back(Point(static_cast<std::size_t>(dim), 0.0));
  return pts;
}

}  // namespace

TEST(Generators, DeterministicAcrossConstruction) {
  for (Family f : kAllFamilies)
    for (int dim : {2, 5}) {
      const FunctionSpec spec{f, dim, 31, std::nullopt, json::object()};
      const auto a = make_function(spec);
      const auto b = make_function(spec);
      for (const auto& x : probe_points(dim, 20, 1)) ASSERT_EQ(a(x), b(x)) << spec.id();
    }
}

TEST(Generators, SeedsProduceDifferentFunctions) {
  for (Family f : kAllFamilies) {
    const auto a = make_function({f, 3, 1, std::nullopt, json::object()});
    const auto b = make_function({f, 3, 2, std::nullopt, json::object()});
    int differ = 0;
    for (const auto& x : probe_points(3, 20, 2)) differ += a(x) != b(x);
    EXPECT_GT(differ, 10) << to_string(f);
  }
}

TEST(Generators, TotalOnTheBoxForEveryFamilyAndDimension) {
  for (Family f : kAllFamilies)
    for (int dim = kMinDim; dim <= kMaxDim; dim += 2)
      for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        for (auto aug : {std::optional<std::uint64_t>{}, std::optional<std::uint64_t>{seed + 100}}) {
          const FunctionSpec spec{f, dim, seed, aug, json::object()};
          const auto fn = make_function(spec);
          for (const auto& x : probe_points(dim, 30, seed)) ASSERT_TRUE(std::isfinite(fn(x))) << spec.id();
        }
      }
}

TEST(Generators, WrongDimensionIsADomainError) {
  const auto fn = make_function({Family::fourier, 3, 1, std::nullopt, json::object()});
  EXPECT_THROW(fn(std::vector<double>{0.0, 0.0}), DomainError);
}

TEST(Generators, SpecJsonAndIds) {
  FunctionSpec s{Family::expr_tree, 4, 42, 9, json{{"max_depth", 3}}};
  const json j = s;
  EXPECT_EQ(j.get<FunctionSpec>(), s);
  EXPECT_TRUE(s.id().starts_with("expr_tree-d4-s42-a9-p"));
  EXPECT_EQ((FunctionSpec{Family::fourier, 3, 42, std::nullopt, json::object()}).id(), "fourier-d3-s42");
  EXPECT_THROW((FunctionSpec{Family::gp, 11, 1, std::nullopt, json::object()}).validate(), ConfigError);
  EXPECT_THROW((FunctionSpec{Family::gp, 1, 1, std::nullopt, json::object()}).validate(), ConfigError);
  EXPECT_THROW(family_from_string("spline"), ConfigError);
}

TEST(Generators, UnknownOverrideKeysAreRejected) {
  for (Family f : kAllFamilies)
    EXPECT_THROW(make_function({f, 2, 1, std::nullopt, json{{"bogus", 1}}}), ConfigError) << to_string(f);
  EXPECT_THROW(make_function({Family::gp, 2, 1, std::nullopt, json{{"n_kernels", 4}}}), ConfigError);
}

TEST(Generators, OverridesChangeTheFunction) {
  const auto base = make_function({Family::fourier, 2, 5, std::nullopt, json::object()});
  const auto over = make_function({Family::fourier, 2, 5, std::nullopt, json{{"n_terms", 1}}});
  int differ = 0;
  for (const auto& x : probe_points(2, 10, 3)) differ += base(x) != over(x);
  EXPECT_GT(differ, 5);
}

TEST(Rk4, EmpiricalOrderIsFour) {
  for (auto err : {oscillator_error, scalar_ode_error}) {
    const double order = std::log2(err(20) / err(40));
    EXPECT_GE(order, 3.5);
    EXPECT_LE(order, 4.5);
  }
}

TEST(GpPrior, AnchorCovarianceMatchesKernelByMonteCarlo) {
  BaseKernel k;
  k.kind = KernelKind::matern;
  k.nu = 2.5;
  k.lengthscale = 0.6;
  k.variance = 1.5;
  CompositeKernel kernel;
  kernel.parts = {k};
  const std::vector<Point> anchors{{-0.8, -0.8}, {-0.5, 0.1}, {0.0, 0.0}, {0.3, 0.4}, {0.9, -0.7}};
  const Eigen::MatrixXd want = gram_matrix(kernel, anchors);
  Rng rng(77);
  const int draws = 40000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(5, 5);
  for (int i = 0; i < draws; ++i) {
    const auto d = draw_prior_values(kernel, anchors, rng);
    acc += d.values * d.values.transpose();
  }
  acc /= draws;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(acc(i, j), want(i, j), 0.05 * kernel.diagonal()) << i << "," << j;
}

TEST(GpPrior, SurfaceReproducesAnchorValues) {
  const auto body = gp_prior_function(2, 4, json{{"n_anchors", 40}, {"kernels", {{{"kind", "rbf"}, {"lengthscale", 0.3}}}}});
  const auto& a = body->anchors();
  ASSERT_EQ(a.size(), 40u);
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_NEAR(body->evaluate(a[i]), body->draw().values(static_cast<Eigen::Index>(i)), 1e-8);
  EXPECT_DOUBLE_EQ(body->kernel().parts[0].lengthscale, 0.3);
}

TEST(Augment, NoneConfigIsANoOp) {
  for (Family f : kAllFamilies) {
    const auto base = make_function({f, 3, 8, std::nullopt, json::object()});
    const auto same = apply_augmentations(base, 55, AugmentationConfig::none());
    EXPECT_TRUE(same.augmentations().empty());
    for (const auto& x : probe_points(3, 20, 4)) EXPECT_EQ(base(x), same(x));
  }
}

TEST(Augment, EachKindStaysWithinItsBound) {
  for (Family f : kAllFamilies) {
    const auto base = make_function({f, 3, 12, std::nullopt, json::object()});
    for (AugKind kind : kAllAugKinds)
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto aug = apply_augmentations(base, seed, AugmentationConfig::only(kind));
        ASSERT_EQ(aug.augmentations().size(), 1u);
        for (const auto& x : probe_points(3, 50, seed)) {
          const auto why = augmentation_bound_violation(base, aug, x);
          ASSERT_TRUE(why.empty()) << to_string(f) << " " << to_string(kind) << " seed " << seed << ": " << why;
        }
      }
  }
}

TEST(Augment, SeededStackIsReproducibleAndRecordedInSpec) {
  const FunctionSpec spec{Family::ode, 2, 3, 17, json::object()};
  const auto a = make_function(spec);
  const auto b = make_function(spec);
  EXPECT_EQ(a.spec().augment_seed, std::optional<std::uint64_t>(17));
  EXPECT_EQ(a.augmentations().size(), b.augmentations().size());
  for (const auto& x : probe_points(2, 20, 9)) EXPECT_EQ(a(x), b(x));
}

TEST(Manifest, LinesRoundTrip) {
  const FunctionSpec spec{Family::gp, 3, 7, 2, json::object()};
  const auto path = std::filesystem::temp_directory_path() / "gptopt_manifest_test.jsonl";
  {
    std::ofstream out(path);
    out << manifest_line(spec) << "\n" << manifest_line(FunctionSpec{Family::nn, 2, 1, std::nullopt, json::object()}) << "\n";
  }
  const auto specs = read_manifest(path.string());
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_EQ(specs[0], spec);
  std::filesystem::remove(path);
}
