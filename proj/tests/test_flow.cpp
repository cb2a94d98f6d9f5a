#include <gtest/gtest.h>

#include <limitshape/flow.hpp>
#include <limitshape/shapes.hpp>

using namespace limitshape;
constexpr double pi = std::numbers::pi;

namespace {

std::vector<cplx> wave(int n, double L, double p_amp = 0.1, double t0 = 1.0 / 3, double t_amp = 0.05) {
    std::vector<cplx> l(n);
    for (int j = 0; j < n; ++j) {
        const double y = L * j / n;
        l[j] = cplx(p_amp * std::cos(2 * pi * y / L), pi * (t0 + t_amp * std::sin(2 * pi * y / L)));
    }
    return l;
}

double rel_drift(const FlowState& a, const FlowState& b, int n) {
    return std::abs(conserved_In(b, n) - conserved_In(a, n)) / std::abs(conserved_In(a, n));
}

}  // namespace

TEST(Density, HexClosedFormMatchesLegendre) {
    const auto num = density_from_tension(hex_tension());
    const auto cf = hex_density();
    for (double p : {-0.5, 0.0, 0.3})
        for (double xi : {0.2, 1.0 / 3, 0.6}) {
            const auto a = num.eval(p, xi), b = cf.eval(p, xi);
            EXPECT_NEAR(a.tau, b.tau, 1e-12);
            EXPECT_NEAR(a.t1, b.t1, 1e-12);
            EXPECT_NEAR(a.t2, b.t2, 1e-12);
            EXPECT_NEAR(a.t11, b.t11, 1e-10);
            EXPECT_NEAR(a.t12, b.t12, 1e-10);
            EXPECT_NEAR(a.t22, b.t22, 1e-10);
        }
}

TEST(Density, FFBurgersAntiderivativeGivesTauDerivatives) {
    const double u = 0.6;
    const auto d = density_from_tension(ff_tension(u));
    const auto F = ff_burgers(u);
    for (double p : {-0.5, 0.0, 0.3})
        for (double xi : {0.2, 0.5}) {
            const auto r = d.eval(p, xi);
            const cplx G = F.G(std::exp(cplx(p, pi * xi)));
            EXPECT_NEAR(r.t1, G.imag() / pi, 1e-10);
            EXPECT_NEAR(r.t2, G.real(), 1e-10);
        }
}

TEST(Hamiltonian, ConstantState) {
    FlowState s{2.0, std::vector<double>(16, 0.2), std::vector<double>(16, 0.4), {}};
    const auto d = hex_density();
    EXPECT_NEAR(hamiltonian(s, d), 2.0 * d.eval(0.2, 0.4).tau, 1e-13);
}

TEST(Hamiltonian, FieldShiftsMomentum) {
    FlowState s{1.0, std::vector<double>(16, 0.2), std::vector<double>(16, 0.4), {}};
    FlowState s2 = s;
    for (auto& p : s2.p) p += 0.3;
    EXPECT_NEAR(hamiltonian(s, hex_density(), 0.3), hamiltonian(s2, hex_density()), 1e-14);
}

TEST(Hamiltonian, CriticalPointValue) {
    FlowState s{1.5, std::vector<double>(8, 0.0), std::vector<double>(8, 1.0 / 3), {}};
    EXPECT_NEAR(hamiltonian(s, hex_density()), 1.5 * (0.0 - sigma_hex(1.0 / 3, 1.0 / 3)), 1e-13);
}

TEST(Hamiltonian, ClosedFormsSeparateHolomorphicParts) {
    const cplx l(-1, 0.5);
    EXPECT_NEAR(hamiltonian_hex(l).imag(), 0.0, 1e-15);
    EXPECT_NEAR(hamiltonian_hex(cplx(0, pi / 3)).real(), -sigma_hex(1.0 / 3, 1.0 / 3), 1e-13);
    // d^2/dl^2 of the holomorphic part is F / (2 pi i)
    const double h = 1e-4;
    auto hol_hex = [](cplx x) { return dilog(std::exp(x)) / cplx(0, 2 * pi); };
    const cplx d2 = (hol_hex(l + h) - 2.0 * hol_hex(l) + hol_hex(l - h)) / (h * h);
    const cplx z = std::exp(l);
    EXPECT_LT(std::abs(d2 - hex_burgers().F(z) / cplx(0, 2 * pi)), 1e-8);
    const double u = 0.7;
    auto hol_ff = [u](cplx x) {
        const cplx zz = std::exp(x);
        return (dilog(zz * std::tan(u)) - dilog(-zz / std::tan(u))) / cplx(0, 2 * pi);
    };
    const cplx e2 = (hol_ff(l + h) - 2.0 * hol_ff(l) + hol_ff(l - h)) / (h * h);
    EXPECT_LT(std::abs(e2 - ff_burgers(u).F(z) / cplx(0, 2 * pi)), 1e-8);
}

TEST(Hamiltonian, MixedDerivativeVanishes) {
    // H = f(l) - f(lbar): in real coordinates d^2/dl dlbar = (d_p^2 + d_q^2)/4 with l = p + i q
    const double h = 1e-3;
    for (double u : {0.5, 1.0}) {
        auto H = [u](double p, double q) { return hamiltonian_ff(cplx(p, q), u); };
        const double p = -0.4, q = 0.9;
        const cplx lap = (H(p + h, q) + H(p - h, q) + H(p, q + h) + H(p, q - h) - 4.0 * H(p, q)) / (h * h);
        EXPECT_LT(std::abs(lap), 1e-6);
    }
}

TEST(Hamiltonian, FFReducesToHex) {
    const double u = pi / 2 - 1e-3;
    const cplx l(-1, 0.5);
    EXPECT_LT(std::abs(hamiltonian_ff(l + ff_to_hex_shift(u), u) - hamiltonian_hex(l)), 1e-4);
}

TEST(Hamiltonian, BranchCut) { EXPECT_THROW(hamiltonian_hex(cplx(0.5, 0.0)), BranchCut); }

TEST(Burgers, FromCurves) {
    const auto Fh = burgers_from_curve(hex_curve());
    const double u = 0.6;
    const auto Ff = burgers_from_curve(ff_curve(u));
    for (cplx z : {cplx(0.3, 0.7), cplx(-0.5, 0.2), cplx(1.5, -0.4)}) {
        EXPECT_LT(std::abs(Fh.F(z) - z / (1.0 - z)), 1e-12);
        EXPECT_LT(std::abs(Ff.F(z) + z / ((z * std::cos(u) + std::sin(u)) * (z * std::sin(u) - std::cos(u)))), 1e-12);
        EXPECT_LT(std::abs(Ff.F(z) - ff_burgers(u).F(z)), 1e-12);
    }
}

TEST(Burgers, BranchHints) {
    // P = w^2 - z: two branches
    SpectralCurve P;
    P.add(0, 2, 1);
    P.add(1, 0, -1);
    EXPECT_THROW(burgers_from_curve(P).F(cplx(0.5, 0.1)), BranchAmbiguous);
    const auto F = burgers_from_curve(P, [](cplx z) { return std::sqrt(z); });
    const cplx z(0.5, 0.1);
    // F = (z/w) * (-1) / (2 w) = -z / (2 z) = -1/2
    EXPECT_LT(std::abs(F.F(z) + 0.5), 1e-12);
}

TEST(Burgers, ConstantIsStationary) {
    std::vector<cplx> l0(32, cplx(0.2, pi * 0.4));
    const auto s = burgers_evolve(l0, hex_burgers(), 1.0, 0.7);
    for (int j = 0; j < 32; ++j) {
        EXPECT_NEAR(s.p[j], 0.2, 1e-14);
        EXPECT_NEAR(s.t[j], 0.4, 1e-14);
    }
    EXPECT_LT(std::abs(conserved_In(s, 1) - cplx(0.2, pi * 0.4)), 1e-14);
}

TEST(Burgers, ConservedMomentsHexAndFF) {
    const int n = 64;
    const auto l0 = wave(n, 1.0);
    const auto s0 = flow_state_from_l(l0, 1.0);
    for (const auto& F : {hex_burgers(), ff_burgers(0.6)}) {
        const auto s = burgers_evolve(l0, F, 1.0, 0.1);
        for (int k = 1; k <= 4; ++k) EXPECT_LE(rel_drift(s0, s, k), 1e-6) << F.name << k;
    }
}

TEST(Burgers, DriftDecreasesUnderRefinement) {
    double prev = 1;
    for (int n : {20, 24, 28, 32}) {
        const auto l0 = wave(n, 1.0, 0.2, 1.0 / 3, 0.1);
        const auto s = burgers_evolve(l0, hex_burgers(), 1.0, 0.12);
        const double d = rel_drift(flow_state_from_l(l0, 1.0), s, 4);
        EXPECT_LT(d, prev);
        prev = d;
    }
}

TEST(Burgers, ShockDetected) {
    const auto l0 = wave(64, 1.0, 0.5, 1.0 / 3, 0.2);
    EXPECT_THROW(burgers_evolve(l0, hex_burgers(), 1.0, 3.0), ShockDetected);
}

TEST(Hamilton, ConstantIsFixedPoint) {
    FlowState s{1.0, std::vector<double>(16, 0.1), std::vector<double>(16, 0.3), {}};
    const auto tr = hamilton_evolve(s, hex_density(), 0.5, 20);
    for (int j = 0; j < 16; ++j) {
        EXPECT_NEAR(tr.states.back().p[j], 0.1, 1e-14);
        EXPECT_NEAR(tr.states.back().t[j], 0.3, 1e-14);
    }
}

TEST(Hamilton, AgreesWithCharacteristics) {
    const int n = 64;
    const auto l0 = wave(n, 1.0);
    const auto tr = hamilton_evolve(flow_state_from_l(l0, 1.0), hex_density(), 0.1, 200);
    const auto s = burgers_evolve(l0, hex_burgers(), 1.0, 0.1);
    for (int j = 0; j < n; ++j) {
        EXPECT_NEAR(tr.states.back().p[j], s.p[j], 1e-5);
        EXPECT_NEAR(tr.states.back().t[j], s.t[j], 1e-5);
    }
}

TEST(Hamilton, CasimirInvariant) {
    const auto l0 = wave(64, 1.0);
    const auto s0 = flow_state_from_l(l0, 1.0);
    const auto tr = hamilton_evolve(s0, hex_density(), 0.1, 100, 10);
    for (const auto& s : tr.states) {
        EXPECT_LT(std::abs(conserved_In(s, 1) - conserved_In(s0, 1)), 1e-10);
        EXPECT_LT(std::abs(conserved_In(s, 1, true) - conserved_In(s0, 1, true)), 1e-10);
    }
}

TEST(Hamilton, MixedPartials) {
    // d_x (d_y h) from the t-equation against d_y of the evolved d_x h
    const int n = 64;
    const auto l0 = wave(n, 1.0);
    const auto tr = hamilton_evolve(flow_state_from_l(l0, 1.0), hex_density(), 0.1, 100, 50);
    const auto& a = tr.states[1];
    const auto& b = tr.states[2];
    const double dx = tr.x[2] - tr.x[1];
    std::vector<double> hx(n);
    for (int j = 0; j < n; ++j) hx[j] = (b.h[j] - a.h[j]) / dx;
    const auto dyhx = detail::spectral_dy(hx, 1.0);
    for (int j = 0; j < n; ++j) EXPECT_NEAR((b.t[j] - a.t[j]) / dx, dyhx[j], 1e-9);
}

TEST(Hamilton, SlopeLeavesDomain) {
    FlowState s{1.0, std::vector<double>(16, 0.0), std::vector<double>(16, 1.3), {}};
    EXPECT_THROW(hamilton_evolve(s, hex_density(), 0.1, 2), StepFailure);
}

TEST(Moments, OrderRange) {
    FlowState s{1.0, std::vector<double>(4, 0.0), std::vector<double>(4, 0.5), {}};
    EXPECT_THROW(conserved_In(s, 0), OutOfRange);
    EXPECT_THROW(conserved_In(s, 9), OutOfRange);
}

TEST(Bracket, SameTensionVanishes) {
    const auto r = poisson_bracket_residual(ff_tension(0.5), ff_tension(0.5));
    EXPECT_LT(r.residual, 1e-9);
}

TEST(Bracket, FreeFermionPairsCommute) {
    for (auto [u, v] : std::vector<std::pair<double, double>>{{pi / 6, pi / 3}, {pi / 6, pi / 4}, {pi / 4, pi / 3}}) {
        const auto r = poisson_bracket_residual(ff_tension(u), ff_tension(v));
        EXPECT_LE(r.residual, 1e-6);
        EXPECT_LE(r.factor_gap, 1e-8);
    }
}

TEST(Bracket, UnequalQuadraticsDoNot) {
    BracketGrid g;
    g.xi0 = -1;
    g.xi1 = 1;
    const auto r = poisson_bracket_residual(quadratic_tension(1, 0, 1), quadratic_tension(1, 0, 2), g);
    EXPECT_GE(r.residual, 0.1);
    EXPECT_NEAR(r.residual, r.factored, 1e-8);
}

TEST(Pictures, VariationalMatchesFlow) {
    const int n = 32;
    const double L = 1, T = 0.1;
    const auto l0 = wave(128, L);
    const auto F = hex_burgers();
    const auto sT = burgers_evolve(l0, F, L, T);
    detail::FourierInterp ti(std::vector<cplx>(sT.t.begin(), sT.t.end()), L);
    const CylinderGrid g(T, L, n + 1, n);
    const BoundaryData bd{[&](double y) { return 1.0 / 3 + 0.05 * std::sin(2 * pi * y); },
                          [&](double y) { return ti(cplx(y)).real(); }};
    double meanp = 0;
    for (const auto& v : l0) meanp += v.real() / double(l0.size());
    const auto r = minimize_action(g, hex_tension(), bd, -meanp);
    ASSERT_TRUE(r.converged);
    std::vector<double> xs;
    for (int i = 0; i < g.nx; ++i) xs.push_back(g.x(i));
    const auto hf = reconstruct_height(l0, F, L, xs, g.ny);
    double d = 0;
    for (std::size_t k = 0; k < hf.size(); ++k) d = std::max(d, std::abs(hf[k] - r.field.h[k]));
    EXPECT_LE(d, 1e-3);
}

TEST(Pictures, ReconstructionSatisfiesEulerLagrange) {
    const double L = 1, T = 0.1;
    const auto l0 = wave(128, L);
    double prev = 1;
    for (int n : {16, 32}) {
        const CylinderGrid g(T, L, n + 1, n);
        std::vector<double> xs;
        for (int i = 0; i < g.nx; ++i) xs.push_back(g.x(i));
        HeightField f{g, reconstruct_height(l0, hex_burgers(), L, xs, n), 1.0 / 3};
        const double r = hex_el_residual(f).max_interior();
        EXPECT_LT(r, prev / 3);
        prev = r;
    }
}
