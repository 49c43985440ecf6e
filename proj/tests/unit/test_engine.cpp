#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gfcsd/engine.hpp"
#include "oracles.hpp"

using namespace gfcsd;

namespace {

DataMatrix gaussian_data(std::size_t n_points, std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(n_points, dim);
    for (double& v : m.values()) v = normal(rng);
    return DataMatrix(std::move(m));
}

oracle::Rows to_rows(const Matrix& m) {
    oracle::Rows r(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r[i][j] = m(i, j);
    return r;
}

EngineConfig plain_fcm() {
    EngineConfig cfg;
    cfg.g = 0.0;
    return cfg;
}

}  // namespace

TEST(EngineConfig, Validation) {
    EngineConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.m = 1.0;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.g = 1.5;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.epsilon = 0.0;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.r1 = 0;
    EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(MembershipMatrix, EnforcesConstraints) {
    EXPECT_THROW(MembershipMatrix(Matrix{{0.5, 0.5}, {0.6, 0.5}}), InvalidArgument);
    EXPECT_THROW(MembershipMatrix(Matrix{{1.0, 1.0}, {0.0, 0.0}}), InvalidArgument);
    EXPECT_THROW(MembershipMatrix(Matrix{{1.5, 0.5}, {-0.5, 0.5}}), InvalidArgument);
    EXPECT_NO_THROW(MembershipMatrix(Matrix{{1.0, 0.0}, {0.0, 1.0}}));
}

TEST(MembershipMatrix, ArgmaxTiesGoToLowestIndex) {
    const MembershipMatrix u(Matrix{{0.5, 0.2, 0.3}, {0.5, 0.8, 0.3}, {0.0, 0.0, 0.4}});
    EXPECT_EQ(u.argmax_labels(), (std::vector<int>{0, 1, 2}));
}

TEST(RandomMemberships, ColumnsSumToOne) {
    std::mt19937_64 rng(1);
    const auto u = random_memberships(7, 300, rng);
    for (std::size_t k = 0; k < u.points(); ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.clusters(); ++i) s += u(i, k);
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(ScatterMatrix, PointsAtPrototypeGiveZero) {
    const DataMatrix x{{1, 2}, {1, 2}, {1, 2}};
    const std::vector<double> mu{0.3, 0.9, 1.0}, v{1, 2};
    EXPECT_EQ(scatter_matrix(x, mu, v, 2.0).matrix(), Matrix(2, 2, 0.0));
}

TEST(ScatterMatrix, TwoPointExpansion) {
    const DataMatrix x{{0, 0}, {2, 0}};
    const std::vector<double> mu{1, 1}, v{1, 0};
    EXPECT_EQ(scatter_matrix(x, mu, v, 2.0).matrix(), (Matrix{{2, 0}, {0, 0}}));
}

TEST(ScatterMatrix, LinearInWeights) {
    const DataMatrix x{{0, 1}, {2, -1}, {3, 3}};
    const std::vector<double> v{1, 0.5};
    const double m = 2.0, up = std::pow(2.0, 1.0 / m);
    const std::vector<double> base{1, 1, 1}, doubled{up, up, up};
    const auto a = scatter_matrix(x, base, v, m), b = scatter_matrix(x, doubled, v, m);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(b(i, j), 2.0 * a(i, j), 1e-12);
}

TEST(ScatterMatrix, RejectsShapeMismatch) {
    const DataMatrix x{{0, 0}, {2, 0}};
    const std::vector<double> mu{1}, v{1, 0}, v3{1, 0, 0}, mu2{1, 1};
    EXPECT_THROW(scatter_matrix(x, mu, v, 2.0), DimensionError);
    EXPECT_THROW(scatter_matrix(x, mu2, v3, 2.0), DimensionError);
}

TEST(CompositeDistance, ZeroWeightIsPlainDistance) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unif(-3, 3);
    const Axes axes(Matrix{{0.6, 0.8}});
    for (int t = 0; t < 100; ++t) {
        const std::vector<double> x{unif(rng), unif(rng)}, v{unif(rng), unif(rng)};
        EXPECT_EQ(composite_distance(x, v, axes, 2.0, 0.0), pnorm_dist(x, v, 2.0));
        EXPECT_EQ(composite_distance(x, v, axes, 1.0, 0.0), pnorm_dist(x, v, 1.0));
    }
}

TEST(CompositeDistance, OffsetAlongAxisHasNoResidual) {
    const std::vector<double> x{3, 1}, v{1, 1};
    const Axes axes(Matrix{{1, 0}});
    EXPECT_DOUBLE_EQ(composite_distance(x, v, axes, 2.0, 0.5), 4.0);
}

TEST(CompositeDistance, OffsetAcrossAxisAddsWeightedResidual) {
    // |(2,1)|^2 = 5, residual off the x-axis = 1, so 5 + 0.5 * 1.
    const std::vector<double> x{2, 1}, v{0, 0};
    const Axes axes(Matrix{{1, 0}});
    EXPECT_DOUBLE_EQ(composite_distance(x, v, axes, 2.0, 0.5), 5.5);
}

TEST(CompositeDistance, ZeroAtPrototype) {
    const std::vector<double> x{0.25, -4};
    const Axes axes(Matrix{{0, 1}});
    for (double p : {1.0, 2.0, 3.0})
        for (double g : {0.0, 0.5, 1.0}) EXPECT_EQ(composite_distance(x, x, axes, p, g), 0.0);
}

TEST(ObjectiveValue, SinglePointAtPrototypeIsZero) {
    const DataMatrix x{{1, 1}};
    const MembershipMatrix u(Matrix{{1.0}});
    EXPECT_EQ(objective_value(x, u, Matrix{{1, 1}}, {}, EngineConfig{}), 0.0);
}

TEST(ObjectiveValue, MatchesClassicalFcmObjective) {
    std::mt19937_64 rng(12);
    const auto x = gaussian_data(40, 3, rng);
    const auto u = random_memberships(3, 40, rng);
    const auto v = update_prototypes(x, u, plain_fcm());
    const double ref = oracle::fcm_objective(to_rows(x.matrix()), to_rows(u.matrix()),
                                             to_rows(v), 2.0);
    EXPECT_NEAR(objective_value(x, u, v, {}, plain_fcm()), ref, 1e-10 * ref);
}

TEST(ObjectiveValue, UniformMembershipsFactorOut) {
    const DataMatrix x{{0, 0}, {1, 2}, {-1, 3}};
    const MembershipMatrix u(Matrix(2, 3, 0.5));
    const Matrix v{{0, 1}, {1, 1}};
    const std::vector<Axes> axes{Axes(Matrix{{1, 0}}), Axes(Matrix{{0, 1}})};
    const EngineConfig cfg;
    double sum = 0.0;
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < 2; ++i)
            sum += composite_distance(x.point(k), v.row(i), axes[i], cfg.p, cfg.g);
    EXPECT_NEAR(objective_value(x, u, v, axes, cfg), 0.25 * sum, 1e-12);
}

TEST(UpdateMemberships, EquidistantPointSplitsEvenly) {
    const DataMatrix x{{0, 0}};
    const auto u = update_memberships(x, Matrix{{1, 0}, {-1, 0}}, {}, plain_fcm());
    EXPECT_DOUBLE_EQ(u(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(u(1, 0), 0.5);
}

TEST(UpdateMemberships, ZeroDistanceTakesEverything) {
    const DataMatrix x{{1, 1}, {4, 5}};
    const auto u = update_memberships(x, Matrix{{1, 1}, {4, 5}}, {}, EngineConfig{});
    EXPECT_EQ(u(0, 0), 1.0);
    EXPECT_EQ(u(1, 0), 0.0);
    EXPECT_EQ(u(0, 1), 0.0);
    EXPECT_EQ(u(1, 1), 1.0);
}

TEST(UpdateMemberships, SeveralZeroDistancesShare) {
    const DataMatrix x{{1, 1}, {4, 5}};
    const auto u = update_memberships(x, Matrix{{1, 1}, {4, 5}, {1, 1}}, {}, EngineConfig{});
    EXPECT_EQ(u(0, 0), 0.5);
    EXPECT_EQ(u(1, 0), 0.0);
    EXPECT_EQ(u(2, 0), 0.5);
    EXPECT_EQ(u(1, 1), 1.0);
}

TEST(UpdateMemberships, DistancesOneAndThree) {
    // Squared distances 1 and 3 with m = 2: 1 / (1 + 1/3).
    const DataMatrix x{{0}};
    const auto u = update_memberships(x, Matrix{{1}, {-std::sqrt(3.0)}}, {}, plain_fcm());
    EXPECT_NEAR(u(0, 0), 0.75, 1e-12);
    EXPECT_NEAR(u(1, 0), 0.25, 1e-12);
}

TEST(UpdateMemberships, RequiresPrototypes) {
    const DataMatrix x{{0}};
    EXPECT_THROW(update_memberships(x, Matrix(0, 1), {}, EngineConfig{}), InvalidArgument);
}

TEST(UpdatePrototypes, SingleSupportPoint) {
    const DataMatrix x{{0, 0}, {3, -1}, {5, 5}};
    const MembershipMatrix u(Matrix{{0, 1, 0}, {1, 0, 1}});
    const auto v = update_prototypes(x, u, EngineConfig{});
    EXPECT_EQ(v(0, 0), 3.0);
    EXPECT_EQ(v(0, 1), -1.0);
}

TEST(UpdatePrototypes, WeightedMeanInOneDimension) {
    const DataMatrix x{{0}, {2}};
    const MembershipMatrix u(Matrix{{0.8, 0.2}, {0.2, 0.8}});
    EXPECT_NEAR(update_prototypes(x, u, EngineConfig{})(0, 0), 0.11764705882352941, 1e-15);
}

TEST(UpdatePrototypes, UniformMembershipsGiveCentroid) {
    const DataMatrix x{{0, 0}, {4, 0}, {2, 6}};
    const MembershipMatrix u(Matrix(2, 3, 0.5));
    const auto v = update_prototypes(x, u, EngineConfig{});
    EXPECT_NEAR(v(1, 0), 2.0, 1e-15);
    EXPECT_NEAR(v(1, 1), 2.0, 1e-15);
}

TEST(UpdatePrototypes, RejectsNonEuclideanNorm) {
    const DataMatrix x{{0}, {2}};
    const MembershipMatrix u(Matrix{{0.5, 0.5}, {0.5, 0.5}});
    EngineConfig cfg;
    cfg.p = 1.0;
    EXPECT_THROW(update_prototypes(x, u, cfg), InvalidArgument);
}

TEST(GfcFit, MatchesTextbookFcm) {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 5; ++t) {
        const auto x = gaussian_data(60 + 10 * t, 2 + t % 3, rng);
        const auto u0 = random_memberships(2 + t % 4, x.points(), rng);
        auto cfg = plain_fcm();
        cfg.epsilon = 1e-9;
        const auto fit = gfc_fit(x, u0, cfg);
        const auto ref = oracle::textbook_fcm(to_rows(x.matrix()), to_rows(u0.matrix()), 2.0,
                                              1e-9, 300);
        EXPECT_EQ(fit.iterations, static_cast<std::size_t>(ref.iterations));
        for (std::size_t i = 0; i < u0.clusters(); ++i) {
            for (std::size_t k = 0; k < x.points(); ++k)
                EXPECT_NEAR(fit.memberships(i, k), ref.u[i][k], 1e-6);
            for (std::size_t d = 0; d < x.dim(); ++d)
                EXPECT_NEAR(fit.prototypes(i, d), ref.v[i][d], 1e-6);
        }
    }
}

TEST(GfcFit, SeparatedBlobsRecoverSampleMeans) {
    const std::vector<std::vector<double>> centers{{0, 0}, {5, 5}, {-5, 5}};
    const double sigma = 0.2;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal(0.0, sigma);
    Matrix pts(90, 2), u0(3, 90, 0.05);
    std::vector<std::vector<double>> means(3, {0.0, 0.0});
    for (std::size_t k = 0; k < 90; ++k) {
        const std::size_t b = k / 30;
        for (std::size_t d = 0; d < 2; ++d) {
            pts(k, d) = centers[b][d] + normal(rng);
            means[b][d] += pts(k, d) / 30.0;
        }
        u0(b, k) = 0.9;
    }
    const auto fit = gfc_fit(DataMatrix(pts), MembershipMatrix(u0), EngineConfig{});
    EXPECT_TRUE(fit.converged);
    for (std::size_t b = 0; b < 3; ++b)
        EXPECT_LT(std::sqrt(squared_euclidean(fit.prototypes.row(b), means[b])), sigma);
}

TEST(GfcFit, SinglePointSingleCluster) {
    const DataMatrix x{{1.5, -2}};
    const auto fit = gfc_fit(x, MembershipMatrix(Matrix{{1.0}}), EngineConfig{});
    EXPECT_TRUE(fit.converged);
    EXPECT_EQ(fit.iterations, 1u);
    EXPECT_EQ(fit.memberships(0, 0), 1.0);
    EXPECT_EQ(fit.prototypes(0, 0), 1.5);
    EXPECT_EQ(fit.prototypes(0, 1), -2.0);
}

TEST(GfcFit, AxesHaveRankInRangeAndAreOrthonormal) {
    std::mt19937_64 rng(21);
    const auto x = gaussian_data(120, 4, rng);
    const auto fit = gfc_fit(x, random_memberships(3, 120, rng), EngineConfig{});
    ASSERT_EQ(fit.axes.size(), 3u);
    for (const auto& a : fit.axes) {
        EXPECT_GE(a.rank(), 1u);
        EXPECT_LE(a.rank(), 3u);
        for (std::size_t s = 0; s < a.rank(); ++s)
            for (std::size_t t = 0; t < a.rank(); ++t)
                EXPECT_NEAR(dot(a.direction(s), a.direction(t)), s == t ? 1.0 : 0.0, 1e-8);
    }
}

TEST(GfcFit, DegenerateClusterReportsIteration) {
    const DataMatrix x{{0}, {1}};
    // 1e-200 squared underflows to zero, so cluster 1 carries no weight.
    const MembershipMatrix u(Matrix{{1.0 - 1e-200, 1.0}, {1e-200, 0.0}});
    try {
        gfc_fit(x, u, EngineConfig{});
        FAIL() << "expected a degenerate cluster";
    } catch (const DegenerateClusterError& e) {
        EXPECT_EQ(e.iteration(), 1u);
        EXPECT_EQ(e.cluster(), 1u);
    }
}

TEST(GfcFit, RejectsShapeMismatchAndNonEuclidean) {
    const DataMatrix x{{0}, {1}, {2}};
    const MembershipMatrix u(Matrix{{0.5, 0.5}, {0.5, 0.5}});
    EXPECT_THROW(gfc_fit(x, u, EngineConfig{}), DimensionError);
    EngineConfig cfg;
    cfg.p = 3.0;
    const MembershipMatrix u3(Matrix{{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}});
    EXPECT_THROW(gfc_fit(x, u3, cfg), InvalidArgument);
}

TEST(GfcFit, WarmStartSkipsFirstPrototypeUpdate) {
    const DataMatrix x{{0}, {1}, {10}, {11}};
    const MembershipMatrix u(Matrix{{0.5, 0.5, 0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}});
    auto cfg = plain_fcm();
    cfg.max_iters = 1;
    // Without warm start both prototypes collapse to the centroid.
    const auto cold = gfc_fit(x, u, cfg);
    EXPECT_EQ(cold.memberships(0, 0), 0.5);
    const auto warm = gfc_fit(x, u, cfg, Matrix{{0.5}, {10.5}});
    EXPECT_GT(warm.memberships(0, 0), 0.9);
    EXPECT_LT(warm.memberships(0, 3), 0.1);
}

TEST(GfcFit, RelabelingPermutesResult) {
    std::mt19937_64 rng(31);
    const auto x = gaussian_data(50, 3, rng);
    const auto u0 = random_memberships(3, 50, rng);
    const std::size_t perm[] = {2, 0, 1};
    Matrix permuted(3, 50);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < 50; ++k) permuted(i, k) = u0(perm[i], k);
    const EngineConfig cfg;
    const auto v_a = update_prototypes(x, u0, cfg);
    const auto v_b = update_prototypes(x, MembershipMatrix(permuted), cfg);
    const auto u_a = update_memberships(x, v_a, {}, cfg);
    const auto u_b = update_memberships(x, v_b, {}, cfg);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < 50; ++k) EXPECT_NEAR(u_b(i, k), u_a(perm[i], k), 1e-14);
}
