#include <gtest/gtest.h>

#include <limitshape/shapes.hpp>
#include <random>

using namespace limitshape;
constexpr double pi = std::numbers::pi;

namespace {

BoundaryData wavy_boundary() {
    return {[](double y) { return 1.0 / 3 + 0.08 * std::sin(2 * pi * y); },
            [](double y) { return 1.0 / 3 + 0.08 * std::cos(2 * pi * y); }};
}

HeightField random_field(const CylinderGrid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> U(-1, 1);
    HeightField f = affine_field(g, 0.3, 0.35);
    const double a = U(rng), b = U(rng), c = U(rng);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double x = g.x(i), y = g.y(j);
            f.h[g.idx(i, j)] += 0.01 * (a * std::sin(2 * pi * (x + y)) + b * std::cos(2 * pi * y) * x + c * x * x);
        }
    return f;
}

}  // namespace

TEST(Action, AffineFieldIsExact) {
    const CylinderGrid g(1.5, 2.0, 9, 8);
    const auto f = affine_field(g, 0.25, 0.4);
    EXPECT_NEAR(action(f, hex_tension(), 0.0), 1.5 * 2.0 * sigma_hex(0.25, 0.4), 1e-12);
}

TEST(Action, ConstantShiftInvariance) {
    const CylinderGrid g(1, 1, 9, 8);
    auto f = random_field(g, 1);
    const double a = action(f, hex_tension(), 0.3);
    for (auto& v : f.h) v += 4.2;
    EXPECT_NEAR(action(f, hex_tension(), 0.3), a, 1e-12);
}

TEST(Action, VTermTelescopes) {
    const CylinderGrid g(1.3, 0.9, 11, 10);
    const auto f = random_field(g, 2);
    const auto S = hex_tension();
    const double V = 0.7;
    double mean = 0;
    for (int j = 0; j < g.ny; ++j) mean += (f.h[g.idx(g.nx - 1, j)] - f.h[g.idx(0, j)]) / g.ny;
    EXPECT_NEAR(action(f, S, V) - action(f, S, 0), V * g.L * mean, 1e-12);
}

TEST(Action, RejectsOutOfDomain) {
    const CylinderGrid g(1, 1, 5, 4);
    EXPECT_THROW(action(affine_field(g, 0.8, 0.4), hex_tension(), 0), SlopeOutOfDomain);
}

TEST(Solve, ConstantSlopeGivesAffineOptimum) {
    const CylinderGrid g(1, 1, 17, 16);
    const BoundaryData bd{[](double) { return 1.0 / 3; }, [](double) { return 1.0 / 3; }};
    const auto r = minimize_action(g, hex_tension(), bd, 0.0);
    ASSERT_TRUE(r.converged);
    // d_s sigma_hex(s, 1/3) = 0 at s = 1/3
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            EXPECT_NEAR(r.field.h[g.idx(i, j)], (g.x(i) + g.y(j)) / 3, 1e-8);
}

TEST(Solve, ConstantSlopeWithFieldShiftsOptimum) {
    // argmin_s sigma(s, t0) + V s solves d_s sigma = -V
    const CylinderGrid g(1, 1, 9, 8);
    const double t0 = 0.3, V = 0.4;
    const BoundaryData bd{[=](double) { return t0; }, [=](double) { return t0; }};
    const auto r = minimize_action(g, hex_tension(), bd, V);
    ASSERT_TRUE(r.converged);
    double lo = 1e-9, hi = 1 - t0 - 1e-9;
    for (int k = 0; k < 200; ++k) {
        const double m = 0.5 * (lo + hi);
        (grad_sigma_hex(m, t0)[0] + V > 0 ? hi : lo) = m;
    }
    const double s = 0.5 * (lo + hi);
    for (int i = 0; i < g.nx; ++i) EXPECT_NEAR(r.field.h[g.idx(i, 3)], s * g.x(i) + t0 * g.y(3), 1e-8);
}

TEST(Solve, ActionNonIncreasingAndFeasible) {
    const CylinderGrid g(1, 1, 25, 24);
    const auto r = minimize_action(g, hex_tension(), wavy_boundary(), 0.0);
    ASSERT_TRUE(r.converged);
    for (std::size_t k = 1; k < r.actions.size(); ++k) EXPECT_LE(r.actions[k], r.actions[k - 1] + 1e-14);
    EXPECT_TRUE(feasible(r.field, hex_tension(), 1e-6));
}

TEST(Solve, TwoStartsAgree) {
    const CylinderGrid g(1, 1, 25, 24);
    const auto S = hex_tension();
    const auto bd = wavy_boundary();
    const auto r1 = minimize_action(g, S, bd, 0.0);
    const auto bc = boundary_columns(g, bd);
    auto start = initial_field(g, bc, S, 0.25);
    for (int i = 1; i + 1 < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            start.h[g.idx(i, j)] += 0.01 * std::sin(pi * g.x(i)) * std::cos(2 * pi * g.y(j));
    ASSERT_TRUE(feasible(start, S, 1e-6));
    const auto r2 = minimize_action(g, S, bd, 0.0, {}, &start);
    ASSERT_TRUE(r1.converged && r2.converged);
    double d = 0;
    for (std::size_t k = 0; k < r1.field.h.size(); ++k) d = std::max(d, std::abs(r1.field.h[k] - r2.field.h[k]));
    EXPECT_LE(d, 1e-8);
}

TEST(Solve, InconsistentMonodromy) {
    const CylinderGrid g(1, 1, 9, 8);
    const BoundaryData bd{[](double) { return 0.3; }, [](double) { return 0.4; }};
    EXPECT_THROW(minimize_action(g, hex_tension(), bd, 0.0), Inconsistent);
}

TEST(Solve, NoFacetsForSmoothData) {
    const CylinderGrid g(1, 1, 17, 16);
    const auto r = minimize_action(g, hex_tension(), wavy_boundary(), 0.0);
    const auto m = facet_mask(r.field, hex_tension());
    EXPECT_EQ(std::count(m.begin(), m.end(), 1), 0);
}

TEST(Residual, AffineFieldVanishes) {
    const CylinderGrid g(1, 1, 9, 8);
    const auto f = affine_field(g, 0.3, 0.4);
    EXPECT_LT(el_residual(f, hex_tension()).max_interior(), 1e-10);
    EXPECT_LT(hex_el_residual(f).max_interior(), 1e-10);
    EXPECT_LT(ff_el_residual(affine_field(g, 0.6, 0.7), 0.5).max_interior(), 1e-10);
}

TEST(Residual, HexFormIsPositiveMultiple) {
    const CylinderGrid g(1, 1, 13, 12);
    const auto f = random_field(g, 3);
    const auto S = hex_tension();
    for (int i = 1; i + 1 < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const auto d = central(f, i, j);
            EXPECT_NEAR(hex_el_pointwise(d), hex_form_factor(d.s, d.t) * el_pointwise(S, d), 1e-10);
        }
}

TEST(Residual, FFFormMatchesGeneric) {
    const CylinderGrid g(1, 1, 13, 12);
    auto f = affine_field(g, 0.55, 0.45);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) f.h[g.idx(i, j)] += 0.02 * std::sin(2 * pi * (g.x(i) + 2 * g.y(j)));
    for (double u : {0.4, pi / 4, 1.1}) {
        const auto S = ff_tension(u);
        for (int i = 1; i + 1 < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                const auto d = central(f, i, j);
                EXPECT_NEAR(ff_el_pointwise(d, u), ff_form_factor(d.s, d.t, u) * el_pointwise(S, d), 1e-8);
            }
    }
}

TEST(Residual, FFAtRightAngleIsHex) {
    const CylinderGrid g(1, 1, 13, 12);
    for (double s0 : {0.3, 0.6}) {
        auto f = affine_field(g, s0, s0 + 0.05);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) f.h[g.idx(i, j)] += 0.02 * std::sin(2 * pi * (g.x(i) + g.y(j)));
        for (int i = 1; i + 1 < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                const auto d = central(f, i, j);
                // the coefficients are invariant under (s,t) -> (1-s,1-t)
                CentralDerivs e = d;
                if (d.s + d.t > 1) {
                    e.s = 1 - d.s;
                    e.t = 1 - d.t;
                }
                EXPECT_NEAR(ff_el_pointwise(d, pi / 2), hex_el_pointwise(e), 1e-12);
            }
    }
}

TEST(Residual, OutOfDomain) {
    const CylinderGrid g(1, 1, 9, 8);
    EXPECT_THROW(hex_el_residual(affine_field(g, 0.8, 0.4)), SlopeOutOfDomain);
    EXPECT_THROW(ff_el_residual(affine_field(g, 1.2, 0.4), 0.5), SlopeOutOfDomain);
}

TEST(Residual, SecondOrderUnderRefinement) {
    const auto S = hex_tension();
    const auto m1 = mesh_study(S, wavy_boundary(), 0.0, 1.0, 1.0, {32, 64});
    ASSERT_EQ(m1.orders.size(), 1u);
    EXPECT_GE(m1.orders[0], 1.8);
    EXPECT_GE(m1.residuals[0] / m1.residuals[1], 3.5);
}
