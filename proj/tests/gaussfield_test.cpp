#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "stmax/gaussfield.hpp"

namespace {

using namespace stmax;

std::shared_ptr<const SpaceTimeGrid> single_point() {
  return std::make_shared<const SpaceTimeGrid>(2, std::vector<SpaceTimeGrid::Point>{{0, 0, 0}},
                                               std::vector<double>{0.0});
}

TEST(SpaceTimeGrid, RegularLayoutIsTimeMajorRowMajor) {
  const auto g = SpaceTimeGrid::regular({3, 2}, 0.5, {1.0, -1.0}, {0.0, 2.0});
  ASSERT_EQ(g.size(), 12u);
  EXPECT_EQ(g.space_size(), 6u);
  const auto p1 = g.point(1);
  EXPECT_DOUBLE_EQ(p1.s[0], 1.5);
  EXPECT_DOUBLE_EQ(p1.s[1], -1.0);
  EXPECT_DOUBLE_EQ(p1.t, 0.0);
  const auto p3 = g.point(3);
  EXPECT_DOUBLE_EQ(p3.s[0], 1.0);
  EXPECT_DOUBLE_EQ(p3.s[1], -0.5);
  const auto p7 = g.point(7);
  EXPECT_DOUBLE_EQ(p7.s[0], 1.5);
  EXPECT_DOUBLE_EQ(p7.t, 2.0);
  EXPECT_EQ(g.index(1, 1), 7u);
}

TEST(SpaceTimeGrid, RejectsDuplicatesAndBadInput) {
  EXPECT_THROW(SpaceTimeGrid(2, {{0, 0, 0}, {0, 0, 0}}, {0.0}), DomainError);
  EXPECT_THROW(SpaceTimeGrid(2, {{0, 0, 0}}, {1.0, 1.0}), DomainError);
  EXPECT_THROW(SpaceTimeGrid(2, {}, {1.0}), DomainError);
  EXPECT_THROW(SpaceTimeGrid(4, {{0, 0, 0}}, {1.0}), DomainError);
  EXPECT_THROW(SpaceTimeGrid::regular({2, 2}, 0.0, {}, {0.0}), DomainError);
}

TEST(BuildCovariance, Examples) {
  const CorrelationModel m(GneitingModel{});
  const auto one = build_covariance_matrix(m, *single_point());
  ASSERT_EQ(one.rows(), 1);
  EXPECT_DOUBLE_EQ(one(0, 0), 1.0);

  const SpaceTimeGrid two_times(2, {{0, 0, 0}}, {0.0, 10.0});
  const auto c = build_covariance_matrix(m, two_times);
  EXPECT_DOUBLE_EQ(c(0, 0), 1.0);
  EXPECT_NEAR(c(0, 1), 0.25, 1e-15);
  EXPECT_EQ(c(0, 1), c(1, 0));
}

TEST(BuildCovariance, AppliesScaling) {
  const CorrelationModel m(GneitingModel{});
  const SpaceTimeGrid g(2, {{0, 0, 0}, {2, 0, 0}}, {0.0, 1.0});
  const ScalingSequences s{0.5, 0.25};
  const auto c = build_covariance_matrix(m, g, s);
  EXPECT_NEAR(c(0, 3), m.correlation(SpaceTimeLag({1.0, 0.0}, 0.25)), 1e-15);
}

TEST(BuildCovariance, DimensionMismatch) {
  const CorrelationModel m(GneitingModel{0.03, 0.03, 1.5, 1, 1, 1, 3});
  EXPECT_THROW(build_covariance_matrix(m, *single_point()), DomainError);
}

TEST(BuildCovariance, PositiveDefiniteForCatalogueOnSmallGrids) {
  MaMixtureModel mix;
  mix.spatial = {BaseFamily::Cauchy, 2.0, 1.5, 2.0};
  mix.temporal = {BaseFamily::PoweredExponential, 3.0, 1.0, 1.0};
  mix.atoms = {{0.5, 2.0, 0.3}, {1.5, 0.7, 0.7}};
  BernsteinModel bern;
  bern.axes = {{0.8, 0.5}, {1.3, 0.5}};
  bern.time = {0.6, 0.9};
  bern.atoms = {{0.4, 1.0, 0.5}, {1.2, 0.3, 0.5}};
  const std::vector<CorrelationModel> models{
      CorrelationModel(GneitingModel{}), CorrelationModel(SeparableModel{4.0, 0.3, 2}),
      CorrelationModel(mix), CorrelationModel(bern),
      CorrelationModel(GneitingModel{0.5, 0.2, 0.8, 0.6, 0.9, 0.7, 2})};
  const auto grid = SpaceTimeGrid::regular({10, 10}, 1.0, {0.0, 0.0}, {0, 1, 2, 3, 4});
  for (const auto& m : models) {
    SCOPED_TRACE(m.family_name());
    const auto c = build_covariance_matrix(m, grid);
    EXPECT_TRUE(c.isApprox(c.transpose(), 0.0));
    EXPECT_TRUE((c.diagonal().array() == 1.0).all());
    const auto f = cholesky(c);
    EXPECT_LE(f.jitter_used, 1e-8);
    const double err = (f.lower * f.lower.transpose() - c).cwiseAbs().maxCoeff();
    EXPECT_LE(err, 1e-8 * static_cast<double>(c.rows()));
  }
}

TEST(Cholesky, Examples) {
  const auto id = cholesky(Eigen::MatrixXd::Identity(4, 4));
  EXPECT_TRUE(id.lower.isIdentity(0.0));
  EXPECT_EQ(id.jitter_used, 0.0);

  Eigen::MatrixXd m(2, 2);
  m << 1.0, 0.25, 0.25, 1.0;
  const auto f = cholesky(m);
  EXPECT_DOUBLE_EQ(f.lower(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(f.lower(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(f.lower(1, 0), 0.25);
  EXPECT_NEAR(f.lower(1, 1), std::sqrt(1.0 - 0.0625), 1e-16);

  const auto ones = cholesky(Eigen::MatrixXd::Ones(2, 2));
  EXPECT_GT(ones.jitter_used, 0.0);
  EXPECT_LE(ones.jitter_used, 1e-6);
}

TEST(Cholesky, FailureNamesMostNegativePivot) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  m(2, 2) = -0.5;
  try {
    cholesky(m);
    FAIL() << "expected FactorizationError";
  } catch (const FactorizationError& e) {
    EXPECT_EQ(e.pivot_index(), 2u);
    EXPECT_LT(e.pivot_value(), 0.0);
    EXPECT_NE(std::string(e.what()).find("index 2"), std::string::npos);
  }
}

TEST(Cholesky, RejectsNonSymmetric) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 0.5, 0.2, 1.0;
  EXPECT_THROW(cholesky(m), MatrixError);
}

TEST(SampleField, SinglePointMoments) {
  const auto grid = single_point();
  const auto f = cholesky(Eigen::MatrixXd::Identity(1, 1));
  const int n = 100000;
  const Eigen::MatrixXd z = sample_replications(f, 99, 0, 0, n);
  const double mean = z.mean();
  const double var = (z.array() - mean).square().sum() / (n - 1);
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_GT(var, 0.97);
  EXPECT_LT(var, 1.03);
}

TEST(SampleField, TwoPointCorrelation) {
  Eigen::MatrixXd c(2, 2);
  c << 1.0, 0.25, 0.25, 1.0;
  const auto f = cholesky(c);
  const int n = 100000;
  const Eigen::MatrixXd z = sample_replications(f, 5, 1, 0, n);
  const Eigen::VectorXd a = z.row(0).transpose().array() - z.row(0).mean();
  const Eigen::VectorXd b = z.row(1).transpose().array() - z.row(1).mean();
  EXPECT_NEAR(a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm()), 0.25, 0.02);
}

TEST(SampleField, DeterministicGivenStream) {
  const auto grid = std::make_shared<const SpaceTimeGrid>(
      SpaceTimeGrid::regular({3, 3}, 1.0, {}, {0.0, 1.0}));
  const auto f = cholesky(build_covariance_matrix(CorrelationModel(GneitingModel{}), *grid));
  RandomStream s1({12, 4, 0});
  RandomStream s2({12, 4, 0});
  const auto a = sample_field(f, grid, s1);
  const auto b = sample_field(f, grid, s2);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.seed_info.master_seed, 12u);
  EXPECT_EQ(a.seed_info.realization, 4u);
  // Column j always comes from stream (seed, realization, first + j).
  const Eigen::MatrixXd whole = sample_replications(f, 12, 4, 0, 10);
  const Eigen::MatrixXd tail = sample_replications(f, 12, 4, 6, 4);
  EXPECT_TRUE(whole.rightCols(4).isApprox(tail, 1e-14));
  EXPECT_EQ(sample_replications(f, 12, 4, 6, 4), tail);
}

TEST(SampleField, SizeMismatch) {
  const auto f = cholesky(Eigen::MatrixXd::Identity(2, 2));
  RandomStream s({1, 0, 0});
  EXPECT_THROW(sample_field(f, single_point(), s), DomainError);
}

}  // namespace
