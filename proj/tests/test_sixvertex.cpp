#include <gtest/gtest.h>

#include <limitshape/sixvertex.hpp>
#include <random>

using namespace limitshape;
constexpr double pi = std::numbers::pi;

TEST(Weights, AnisotropyExamples) {
    EXPECT_NEAR(anisotropy_delta(VertexWeights(3, 4, 5)), 0.0, 1e-15);
    EXPECT_NEAR(anisotropy_delta(VertexWeights(1, 1, 1)), 0.5, 1e-15);
    const auto w = weights_from_baxter({Regime::A1, 0.5, 0.3});
    EXPECT_NEAR(anisotropy_delta(w), std::cosh(0.3), 1e-12);
}

TEST(Weights, RejectsNonPositive) {
    EXPECT_THROW(VertexWeights(0, 1, 1), OutOfRange);
    EXPECT_THROW(VertexWeights(1, -1, 1), OutOfRange);
}

TEST(Weights, BaxterRegimes) {
    const auto w = weights_from_baxter({Regime::B2, pi / 6, pi / 3});
    EXPECT_NEAR(w.a, 0.5, 1e-15);
    EXPECT_NEAR(w.b, 0.5, 1e-15);
    EXPECT_NEAR(w.c, std::sqrt(3.0) / 2, 1e-15);
    const auto w1 = weights_from_baxter({Regime::B1, pi / 3, pi / 6});
    EXPECT_NEAR(anisotropy_delta(w1), std::sqrt(3.0) / 2, 1e-12);
    const auto wc = weights_from_baxter({Regime::C, 0.4, 0.8});
    EXPECT_NEAR(wc.a, wc.b, 1e-15);
    EXPECT_THROW(weights_from_baxter({Regime::C, 0.9, 0.8}), OutOfRange);
    EXPECT_THROW(weights_from_baxter({Regime::B2, 0.2, 2.0}), OutOfRange);
}

TEST(Weights, ComputedDeltaPerRegime) {
    const std::vector<std::pair<Regime, std::pair<double, double>>> cases = {
        {Regime::A1, {0.7, 0.4}}, {Regime::A2, {0.9, 0.4}}, {Regime::B1, {1.2, 0.5}},
        {Regime::B2, {0.3, 0.9}}, {Regime::C, {0.3, 0.9}}};
    for (auto [reg, ug] : cases) {
        const auto w = weights_from_baxter({reg, ug.first, ug.second});
        EXPECT_NEAR(anisotropy_delta(w), regime_delta(reg, ug.second), 1e-12);
    }
}

TEST(RMatrix, ZeroPatternAndEntries) {
    const VertexWeights w(1.3, 0.7, 0.9, 0.2, -0.3);
    const Mat4 R = r_matrix(w);
    int nz = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (R(i, j) != 0) ++nz;
    EXPECT_EQ(nz, 6);
    EXPECT_NEAR(R(0, 0), 1.3 * std::exp(-0.1), 1e-15);
    EXPECT_NEAR(R(3, 3), 1.3 * std::exp(0.1), 1e-15);
    EXPECT_NEAR(R(1, 1), 0.7 * std::exp(0.5), 1e-15);
    EXPECT_NEAR(R(2, 2), 0.7 * std::exp(-0.5), 1e-15);
    EXPECT_EQ(R(1, 2), 0.9);
    EXPECT_EQ(R(2, 1), 0.9);
}

TEST(RMatrix, FieldFactorization) {
    const double H = 0.37, V = -0.21;
    const Mat4 D = kron2(field_diag(H), field_diag(V));
    const Mat4 lhs = r_matrix_abc(1.1, 0.6, 0.8, H, V);
    const Mat4 rhs = D * r_matrix_abc(1.1, 0.6, 0.8) * D;
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(RMatrix, DiagonalCommutation) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(0.2, 2.0);
    Eigen::Matrix2d D = Eigen::Matrix2d::Zero();
    D(0, 0) = U(rng);
    D(1, 1) = U(rng);
    const Mat4 DD = kron2(D, D);
    const Mat4 R = r_matrix_abc(U(rng), U(rng), U(rng), 0.3, 0.1);
    EXPECT_LT((DD * R - R * DD).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(RMatrix, PermutationAtZeroField) {
    const Mat4 R = r_matrix_abc(2.0, 1e-300, 2.0);
    EXPECT_NEAR(R(0, 0), 2.0, 0);
    EXPECT_NEAR(R(1, 2), 2.0, 0);
}

TEST(YangBaxter, SameGammaAllRegimes) {
    struct Case {
        Regime reg;
        double g, u0, u1;
    };
    // u, v and u+v must all be admissible in the regime
    const std::vector<Case> cases = {{Regime::A1, 0.5, 0.1, 1.0},  {Regime::A2, 0.3, 0.35, 1.2},
                                     {Regime::B1, 0.3, 0.32, 0.7}, {Regime::B2, 1.2, 0.05, 0.55},
                                     {Regime::C, 1.5, 0.05, 0.7}};
    for (const auto& c : cases)
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                const double u = c.u0 + (c.u1 - c.u0) * i / 4, v = c.u0 + (c.u1 - c.u0) * j / 4;
                EXPECT_LE(yang_baxter_residual(u, v, c.reg, c.g), 1e-12);
            }
}

TEST(YangBaxter, SpecExamples) {
    EXPECT_LE(yang_baxter_residual(0.3, 0.4, Regime::A1, 0.5), 1e-12);
    EXPECT_GT(yang_baxter_residual_mixed(Regime::A1, 0.3, 0.4, 0.5, 0.9, 0.5, false), 1e-3);
}

TEST(Transfer, SectorConservation) {
    const TransferOperator t(4, VertexWeights(1.2, 0.7, 0.9, 0.1, 0.2));
    const auto& T = t.matrix();
    for (std::uint32_t i = 0; i < 16; ++i)
        for (std::uint32_t j = 0; j < 16; ++j)
            if (std::popcount(i) != std::popcount(j)) EXPECT_EQ(T(i, j), 0.0);
}

TEST(Transfer, DenseCap) {
    EXPECT_THROW(TransferOperator(13, VertexWeights(1, 1, 1), true), TooLarge);
    const TransferOperator big(13, VertexWeights(1, 1, 1), false);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(big.dim());
    v[0] = 1;
    EXPECT_NO_THROW(big.apply(v));
}

TEST(Transfer, FreeFermionCommute) {
    const auto t1 = transfer(3, VertexWeights(std::cos(0.3), std::sin(0.3), 1));
    const auto t2 = transfer(3, VertexWeights(std::cos(0.7), std::sin(0.7), 1));
    EXPECT_LE(commutator_residual(t1, t2), 1e-12);
    EXPECT_EQ(commutator_residual(t1, t1), 0.0);
}

TEST(Transfer, BaxterPairN6Commutes) {
    const auto t1 = transfer(6, weights_from_baxter({Regime::A1, 0.4, 0.7}));
    const auto t2 = transfer(6, weights_from_baxter({Regime::A1, 1.1, 0.7}));
    EXPECT_LE(commutator_residual(t1, t2), 1e-10);
}

TEST(Transfer, DifferentDeltaDoesNotCommute) {
    // at N = 3 every sector is circulant, so the control needs N >= 4
    EXPECT_LT(commutator_residual(transfer(3, VertexWeights(1, 1, 1)), transfer(3, VertexWeights(2, 1, 1))), 1e-14);
    for (int N = 4; N <= 6; ++N)
        EXPECT_GT(commutator_residual(transfer(N, VertexWeights(1, 1, 1)), transfer(N, VertexWeights(2, 1, 1))), 1e-4);
    EXPECT_THROW(commutator_residual(transfer(3, VertexWeights()), transfer(4, VertexWeights())), DimensionMismatch);
}

TEST(Transfer, SingleRowCommutes) {
    EXPECT_LE(commutator_residual(transfer(1, VertexWeights(1, 2, 3, 0.4, 0.1)), transfer(1, VertexWeights(3, 1, 2))),
              1e-15);
}

TEST(Partition, TorusSmall) {
    EXPECT_NEAR(torus_partition(1, 1, VertexWeights(1.7, 0.4, 2.2)), 2 * 1.7 + 2 * 0.4, 1e-14);
    EXPECT_NEAR(torus_partition(2, 2, VertexWeights(1, 1, 1)), double(enumerate_states(ice_torus(2, 2)).size()), 1e-12);
}

TEST(Partition, TorusFieldReversal) {
    const VertexWeights w1(1.1, 0.6, 0.9, 0.4, 0), w2(1.1, 0.6, 0.9, -0.4, 0);
    EXPECT_NEAR(torus_partition(2, 3, w1), torus_partition(2, 3, w2), 1e-12 * torus_partition(2, 3, w1));
}

TEST(Partition, OracleAllSmallLattices) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(0.3, 2.0), F(-0.6, 0.6);
    for (int trial = 0; trial < 20; ++trial) {
        const VertexWeights w(U(rng), U(rng), U(rng), F(rng), F(rng));
        for (int M = 1; M <= 9; ++M)
            for (int N = 1; M * N <= 9; ++N) {
                const double zt = torus_partition(M, N, w);
                const double ze = enumerated_partition(ice_torus(M, N), w);
                EXPECT_NEAR(zt, ze, 1e-12 * std::abs(ze)) << M << "x" << N;
                // cylinder: all boundary words of one length
                for (std::uint32_t a = 0; a < (1u << N); ++a) {
                    BoundaryWord e1(N), e2(N);
                    for (int k = 0; k < N; ++k) e1[k] = (a >> k) & 1;
                    const std::uint32_t b = (a * 2654435761u) & ((1u << N) - 1);
                    for (int k = 0; k < N; ++k) e2[k] = (b >> k) & 1;
                    const double zc = cylinder_partition(M, N, w, e1, e2);
                    const double zo = enumerated_partition(ice_cylinder(M, N, e1, e2), w);
                    EXPECT_NEAR(zc, zo, 1e-12 * std::max(std::abs(zo), 1e-300));
                }
            }
    }
}

TEST(Partition, CylinderSingleColumn) {
    const VertexWeights w(1, 1, 1);
    const BoundaryWord e{0, 0};
    EXPECT_NEAR(cylinder_partition(1, 2, w, e, e), enumerated_partition(ice_cylinder(1, 2, e, e), w), 1e-15);
    EXPECT_EQ(cylinder_partition(2, 3, w, {1, 0, 0}, {1, 1, 0}), 0.0);
}

TEST(Partition, HorizontalFieldFactorization) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(0.3, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        const double a = U(rng), b = U(rng), c = U(rng), V = U(rng) - 1, H = U(rng) - 1;
        const int M = 3, N = 4;
        BoundaryWord eta(N);
        for (int k = 0; k < N; ++k) eta[k] = (trial >> k) & 1;
        BoundaryWord eta2 = eta;
        std::rotate(eta2.begin(), eta2.begin() + 1, eta2.end());
        int occ = 0;
        for (int x : eta) occ += x;
        const int m = occ - (N - occ);
        const double z0 = cylinder_partition(M, N, VertexWeights(a, b, c, 0, V), eta, eta2);
        const double zH = cylinder_partition(M, N, VertexWeights(a, b, c, H, V), eta, eta2);
        EXPECT_NEAR(zH, z0 * std::exp(-M * H * m), 1e-12 * std::abs(zH));
    }
}

TEST(Enumeration, BasicCounts) {
    IceDomain single;
    single.n_edges = 4;
    single.vertices.push_back({0, 1, 2, 3});
    EXPECT_EQ(enumerate_states(single).size(), 6u);
    EXPECT_EQ(enumerate_states(ice_torus(1, 1)).size(), 4u);
    IceDomain empty;
    EXPECT_EQ(enumerate_states(empty).size(), 1u);
    EXPECT_THROW(enumerate_states(ice_block(4, 4)), TooLarge);
}

TEST(Heights, EmptyStateIsLinear) {
    const LatticeGrid g{3, 3, false, false};
    const std::vector<int> st(g.n_edges(), 0);
    const auto h = state_to_height(g, st);
    for (int p = 0; p <= 3; ++p)
        for (int q = 0; q <= 3; ++q) EXPECT_DOUBLE_EQ(h.at(p, q), -0.5 * (p + q));
}

TEST(Heights, SingleFullVertex) {
    const LatticeGrid g{1, 1, false, false};
    const std::vector<int> st(g.n_edges(), 1);
    const auto h = state_to_height(g, st, 0, 0, -0.5);
    EXPECT_DOUBLE_EQ(h.at(0, 0), -0.5);
    EXPECT_DOUBLE_EQ(h.at(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(h.at(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(h.at(1, 1), 0.5);
}

TEST(Heights, RoundTripOnBlocks) {
    for (auto [M, N] : std::vector<std::pair<int, int>>{{2, 3}, {3, 2}, {3, 3}}) {
        const LatticeGrid g{M, N, false, false};
        for (const auto& st : enumerate_states(ice_domain(g))) {
            const auto h = state_to_height(g, st);
            EXPECT_EQ(height_to_state(g, h), st);
        }
    }
}

TEST(Heights, RoundTripOnCylinder) {
    const LatticeGrid g{2, 3, false, true};
    for (const auto& st : enumerate_states(ice_domain(g))) EXPECT_EQ(height_to_state(g, state_to_height(g, st)), st);
}

TEST(Heights, RejectsBadHeight) {
    const LatticeGrid g{1, 1, false, false};
    LatticeHeight h{1, 1, false, {0, 0.5, 0.5, 2.0}};
    EXPECT_THROW(height_to_state(g, h), Inconsistent);
}

TEST(FiveVertex, LimitsMatch) {
    const FiveVertexParams p;
    EXPECT_LT(convergence_gap(1, p, 40.0), 1e-12);
    EXPECT_LT(convergence_gap(2, p, 1e-14), 1e-10);
    EXPECT_LT(convergence_gap(3, p, 40.0), 1e-12);
    for (int k = 1; k <= 3; ++k) EXPECT_EQ(five_vertex_limit_r(k, p)(3, 3), 0.0);
    EXPECT_NEAR(five_vertex_limit_r(2, p)(0, 0), std::exp(p.l + p.m), 1e-15);
}

TEST(FiveVertex, GapDecreases) {
    const FiveVertexParams p;
    for (int k : {1, 3}) {
        const double g4 = convergence_gap(k, p, 4), g6 = convergence_gap(k, p, 6), g8 = convergence_gap(k, p, 8);
        EXPECT_GT(g4, g6);
        EXPECT_GT(g6, g8);
    }
    EXPECT_THROW(five_vertex_limit_r(4, p), OutOfRange);
}
