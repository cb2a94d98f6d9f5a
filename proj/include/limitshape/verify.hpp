#pragma once

// Property and oracle checks shared by the acceptance binary and the `verify` command.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dimers.hpp"
#include "flow.hpp"
#include "shapes.hpp"
#include "sixvertex.hpp"
#include "tension.hpp"

namespace limitshape::verify {

struct Check {
    std::string name;
    double value = 0;
    double tol = 0;
    bool upper = true;  // value <= tol, otherwise value >= tol
    std::string inputs;
    bool pass() const { return std::isfinite(value) && (upper ? value <= tol : value >= tol); }
};

struct SuiteResult {
    std::string suite;
    std::vector<int> criteria;
    std::vector<Check> checks;
    double seconds = 0;
    std::string error;  // set when the suite threw
    bool pass() const {
        if (!error.empty() || checks.empty()) return false;
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); });
    }
};

struct Options {
    unsigned seed = 12345;
    int n = 8;          // largest transfer-matrix width for commute
    int max_cells = 9;  // lattice size bound for oracle
    double u = std::numbers::pi / 6, v = std::numbers::pi / 3;
    int grid = 128;                                           // variational grid for pictures
    double tol = std::numeric_limits<double>::quiet_NaN();  // if set, tightens every upper tolerance
    bool timing = true;  // wall-clock checks make reports run-dependent
};

namespace detail {

inline double tight(const Options& o, double t) { return std::isnan(o.tol) ? t : std::min(t, o.tol); }

inline Check le(const Options& o, std::string name, double value, double tol, std::string inputs = {}) {
    return {std::move(name), value, tight(o, tol), true, std::move(inputs)};
}
inline Check ge(std::string name, double value, double tol, std::string inputs = {}) {
    return {std::move(name), value, tol, false, std::move(inputs)};
}

template <class... A>
std::string fmt(const A&... a) {
    std::ostringstream os;
    os.precision(17);
    ((os << a), ...);
    return os.str();
}

inline std::vector<cplx> sine_profile(int n, double L, double p_amp, double t0, double t_amp) {
    std::vector<cplx> l(n);
    for (int j = 0; j < n; ++j) {
        const double y = L * j / n;
        l[j] = cplx(p_amp * std::cos(2 * std::numbers::pi * y / L),
                    std::numbers::pi * (t0 + t_amp * std::sin(2 * std::numbers::pi * y / L)));
    }
    return l;
}

inline double rel_drift(const FlowState& a, const FlowState& b, int k) {
    return std::abs(conserved_In(b, k) - conserved_In(a, k)) / std::abs(conserved_In(a, k));
}

}  // namespace detail

// ---------------------------------------------------------------- 1

inline std::vector<Check> ybe(const Options& o) {
    using detail::fmt;
    struct Case {
        Regime reg;
        const char* name;
        double g, u0, u1;
    };
    const std::vector<Case> cases = {{Regime::A1, "A1", 0.5, 0.1, 1.0},
                                     {Regime::A2, "A2", 0.3, 0.35, 1.2},
                                     {Regime::B1, "B1", 0.3, 0.32, 0.7},
                                     {Regime::B2, "B2", 1.2, 0.05, 0.55},
                                     {Regime::C, "C", 1.5, 0.05, 0.7}};
    std::vector<Check> out;
    for (const auto& c : cases) {
        double mx = 0, au = 0, av = 0;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                const double u = c.u0 + (c.u1 - c.u0) * i / 4, v = c.u0 + (c.u1 - c.u0) * j / 4;
                const double r = yang_baxter_residual(u, v, c.reg, c.g);
                if (r >= mx) {
                    mx = r;
                    au = u;
                    av = v;
                }
            }
        out.push_back(detail::le(o, fmt("ybe_", c.name, "_max_residual"), mx, 1e-12,
                                 fmt("gamma=", c.g, " worst u=", au, " v=", av)));
    }
    out.push_back(detail::ge("ybe_mixed_gamma_control", yang_baxter_residual_mixed(Regime::A1, 0.3, 0.4, 0.5, 0.9, 0.5, false),
                             1e-6, "A1 u=0.3 v=0.4 gamma=(0.5,0.9,0.5)"));
    return out;
}

// ---------------------------------------------------------------- 2

inline std::vector<Check> commute(const Options& o) {
    using detail::fmt;
    if (o.n < 4 || o.n > 12) throw OutOfRange("commute needs 4 <= n <= 12");
    std::vector<double> us;
    for (int k = 1; k <= 4; ++k) us.push_back(std::numbers::pi * k / 10);
    double mx = 0;
    std::string worst;
    for (int N = 1; N <= o.n; ++N) {
        std::vector<TransferOperator> ts;
        for (double u : us) ts.push_back(transfer(N, VertexWeights(std::cos(u), std::sin(u), 1.0)));
        for (std::size_t a = 0; a < ts.size(); ++a)
            for (std::size_t b = a + 1; b < ts.size(); ++b) {
                const double r = commutator_residual(ts[a], ts[b]);
                if (r >= mx) {
                    mx = r;
                    worst = fmt("N=", N, " u=", us[a], ",", us[b]);
                }
            }
    }
    std::vector<Check> out;
    out.push_back(detail::le(o, "commute_ff_max_relative", mx, 1e-10, worst));
    const double ctrl = commutator_residual(transfer(o.n, VertexWeights(1, 1, 1)), transfer(o.n, VertexWeights(2, 1, 1)));
    out.push_back(detail::ge("commute_different_delta_control", ctrl, 1e-4, fmt("N=", o.n, " (1,1,1) vs (2,1,1)")));
    return out;
}

// ---------------------------------------------------------------- 3

inline std::vector<Check> oracle(const Options& o) {
    using detail::fmt;
    if (o.max_cells < 1 || o.max_cells > 9) throw OutOfRange("max-cells must be in 1..9");
    std::mt19937 rng(o.seed);
    std::uniform_real_distribution<double> U(0.3, 2.0), F(-0.6, 0.6);
    double torus = 0, cyl = 0;
    std::string wt, wc;
    std::vector<VertexWeights> ws;
    for (int trial = 0; trial < 20; ++trial) ws.emplace_back(U(rng), U(rng), U(rng), F(rng), F(rng));
    for (int M = 1; M <= o.max_cells; ++M)
        for (int N = 1; M * N <= o.max_cells; ++N) {
            // enumerate once per lattice, then reweight for every tuple
            const IceDomain tor = ice_torus(M, N);
            const auto tstates = enumerate_states(tor);
            const LatticeGrid g{M, N, false, true};
            const IceDomain open = ice_domain(g);
            const auto cstates = enumerate_states(open);
            std::vector<std::pair<std::uint32_t, std::uint32_t>> words;
            for (const auto& st : cstates) {
                std::uint32_t in = 0, out = 0;
                for (int j = 0; j < N; ++j) {
                    in |= std::uint32_t(st[g.hedge(0, j)]) << j;
                    out |= std::uint32_t(st[g.hedge(M, j)]) << j;
                }
                words.emplace_back(out, in);
            }
            for (int trial = 0; trial < 20; ++trial) {
                const auto& w = ws[trial];
                double ze = 0;
                for (const auto& st : tstates) ze += state_weight(tor, st, w);
                const double e = std::abs(torus_partition(M, N, w) - ze) / std::abs(ze);
                if (e >= torus) {
                    torus = e;
                    wt = fmt("trial=", trial, " M=", M, " N=", N);
                }
                const std::size_t d = std::size_t(1) << N;
                Eigen::MatrixXd zo = Eigen::MatrixXd::Zero(d, d);
                for (std::size_t k = 0; k < cstates.size(); ++k)
                    zo(words[k].first, words[k].second) += state_weight(open, cstates[k], w);
                // (psi_out, t^M psi_in) for every pair of boundary words at once
                const Eigen::MatrixXd T = transfer(N, w).matrix();
                Eigen::MatrixXd P = T;
                for (int k = 1; k < M; ++k) P = T * P;
                for (std::uint32_t a = 0; a < d; ++a)
                    for (std::uint32_t b = 0; b < d; ++b) {
                        const double r = zo(a, b) == 0 ? std::abs(P(a, b)) : std::abs(P(a, b) - zo(a, b)) / std::abs(zo(a, b));
                        if (r >= cyl) {
                            cyl = r;
                            wc = fmt("trial=", trial, " M=", M, " N=", N, " words=", a, ",", b);
                        }
                    }
                // the single-pair entry point agrees with the batched power
                BoundaryWord e1(N), e2(N);
                const std::uint32_t a = (trial * 2654435761u) % d, b = a;
                for (int k = 0; k < N; ++k) {
                    e1[k] = (a >> k) & 1;
                    e2[k] = (b >> k) & 1;
                }
                const double zc = cylinder_partition(M, N, w, e1, e2);
                const double r = std::abs(zc - zo(a, b)) / std::abs(zo(a, b));
                if (r >= cyl) {
                    cyl = r;
                    wc = fmt("trial=", trial, " M=", M, " N=", N, " words=", a, ",", b, " (single)");
                }
            }
        }
    // the horizontal field factors out of the cylinder partition function
    double fact = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const double a = U(rng), b = U(rng), c = U(rng), V = F(rng), H = F(rng);
        const int M = 3, N = 3;
        BoundaryWord eta(N);
        for (int k = 0; k < N; ++k) eta[k] = (trial >> k) & 1;
        BoundaryWord eta2 = eta;
        std::rotate(eta2.begin(), eta2.begin() + 1, eta2.end());
        const int m = 2 * int(std::count(eta.begin(), eta.end(), 1)) - N;
        const double z0 = cylinder_partition(M, N, VertexWeights(a, b, c, 0, V), eta, eta2);
        const double zH = cylinder_partition(M, N, VertexWeights(a, b, c, H, V), eta, eta2);
        fact = std::max(fact, std::abs(zH - z0 * std::exp(-M * H * m)) / std::abs(zH));
    }
    return {detail::le(o, "oracle_torus_relative", torus, 1e-12, wt),
            detail::le(o, "oracle_cylinder_relative", cyl, 1e-12, wc),
            detail::le(o, "oracle_field_factorization", fact, 1e-12, "M=3 N=3, 20 tuples")};
}

// ---------------------------------------------------------------- 4

inline std::vector<Check> legendre(const Options& o) {
    using detail::fmt;
    const auto P = hex_curve();
    double ds = 0, dg = 0;
    std::string w1, w2;
    for (int i = 1; i <= 5; ++i)
        for (int j = 1; j <= 5; ++j) {
            // interior points of the triangle s, t > 0, s + t < 1
            const double s = 0.08 * i + 0.01 * j, t = 0.08 * j + 0.01 * i;
            const auto r = legendre_sigma(P, s, t);
            const double e = std::abs(r.sigma - sigma_hex(s, t));
            if (e >= ds) {
                ds = e;
                w1 = fmt("s=", s, " t=", t);
            }
            const double eg = (r.HV - grad_sigma_hex(s, t)).cwiseAbs().maxCoeff();
            if (eg >= dg) {
                dg = eg;
                w2 = fmt("s=", s, " t=", t);
            }
        }
    double inv = 0, inv2 = 0;
    std::string w3;
    for (double u : {std::numbers::pi / 6, std::numbers::pi / 4, std::numbers::pi / 3})
        for (double s : {0.2, 0.45, 0.7})
            for (double t : {0.3, 0.55, 0.8}) {
                const Vec2 HV = grad_sigma_ff(s, t, u);
                const Vec2 st = grad_free_energy_ff(HV[0], HV[1], u);
                const double e = std::max(std::abs(st[0] - s), std::abs(st[1] - t));
                if (e >= inv) {
                    inv = e;
                    w3 = fmt("u=", u, " s=", s, " t=", t);
                }
            }
    // the other direction, through the quadrature pipeline
    for (double u : {std::numbers::pi / 6, std::numbers::pi / 3}) {
        const auto r = legendre_sigma(ff_curve(u), 0.3, 0.4);
        inv2 = std::max(inv2, (r.HV - grad_sigma_ff(0.3, 0.4, u)).cwiseAbs().maxCoeff());
    }
    return {detail::le(o, "legendre_hex_sigma", ds, 1e-4, w1), detail::le(o, "legendre_hex_grad", dg, 1e-4, w2),
            detail::le(o, "legendre_ff_maps_invert", inv, 1e-6, w3),
            detail::le(o, "legendre_ff_numeric_grad", inv2, 1e-6, "s=0.3 t=0.4")};
}

// ---------------------------------------------------------------- 5, 6

inline std::vector<Check> hessian(const Options& o) {
    using detail::fmt;
    double p11 = 0, lem = 0;
    std::string w1, w2;
    const std::vector<std::pair<std::string, SurfaceTension>> Ts = {
        {"hex", hex_tension()}, {"ff u=0.5", ff_tension(0.5)}, {"ff u=1.2", ff_tension(1.2)}};
    for (const auto& [nm, T] : Ts)
        for (double p : {-0.8, -0.4, 0.0, 0.3, 0.6})
            for (double xi : {0.2, 0.3, 0.4, 0.5}) {
                const auto r = partial_legendre(T, p, xi);
                const Mat2 H = T.hess(r.nu, xi);
                const double e1 = std::abs(r.t11 * H(0, 0) - 1.0);
                const double e2 = std::abs(r.t22 / r.t11 + H.determinant()) / std::abs(H.determinant());
                if (e1 >= p11) {
                    p11 = e1;
                    w1 = fmt(nm, " p=", p, " xi=", xi);
                }
                if (e2 >= lem) {
                    lem = e2;
                    w2 = fmt(nm, " p=", p, " xi=", xi);
                }
            }
    double quad = 0;
    const double a = 2.0, b = 0.5, c = 1.5;
    const auto Q = quadratic_tension(a, b, c);
    for (double p : {-1.0, 0.3})
        for (double xi : {-0.4, 0.8}) {
            const auto r = partial_legendre(Q, p, xi);
            const double tau = p * p / (2 * a) - b / a * p * xi + 0.5 * (b * b / a - c) * xi * xi;
            quad = std::max({quad, std::abs(r.tau - tau), std::abs(r.t11 * a - 1), std::abs(r.t22 / r.t11 + (a * c - b * b))});
        }
    double spread = 0;
    const std::vector<double> us{std::numbers::pi / 6, std::numbers::pi / 4, std::numbers::pi / 3};
    for (int i = 1; i <= 5; ++i)
        for (int j = 1; j <= 5; ++j) spread = std::max(spread, hess_spectral_independence(i / 6.0, j / 6.0, us));
    return {detail::le(o, "hessian_p11_identity", p11, 1e-8, w1),
            detail::le(o, "hessian_lemma_relative", lem, 1e-8, w2),
            detail::le(o, "hessian_quadratic_exact", quad, 1e-12, "a=2 b=0.5 c=1.5"),
            detail::le(o, "hessian_det_spread_over_u", spread, 1e-8, "u in {pi/6, pi/4, pi/3}, 25 points")};
}

// ---------------------------------------------------------------- 7

inline std::vector<Check> poisson(const Options& o) {
    using detail::fmt;
    std::vector<Check> out;
    const auto r = poisson_bracket_residual(ff_tension(o.u), ff_tension(o.v));
    out.push_back(detail::le(o, "poisson_ff_residual", r.residual, 1e-6, fmt("u=", o.u, " v=", o.v)));
    double mx = 0;
    for (auto [u, v] : std::vector<std::pair<double, double>>{{0.4, 0.9}, {std::numbers::pi / 4, 1.3}})
        mx = std::max(mx, poisson_bracket_residual(ff_tension(u), ff_tension(v)).residual);
    out.push_back(detail::le(o, "poisson_ff_other_pairs", mx, 1e-6, "(0.4,0.9), (pi/4,1.3)"));
    BracketGrid g;
    g.xi0 = -1;
    g.xi1 = 1;
    const auto q = poisson_bracket_residual(quadratic_tension(1, 0, 1), quadratic_tension(1, 0, 2), g);
    out.push_back(detail::ge("poisson_quadratic_control", q.residual, 0.1, "(1,0,1) vs (1,0,2)"));
    return out;
}

// ---------------------------------------------------------------- 8

inline std::vector<Check> conserve(const Options& o) {
    using detail::fmt;
    std::vector<Check> out;
    const auto l0 = detail::sine_profile(64, 1.0, 0.1, 1.0 / 3, 0.05);
    const auto s0 = flow_state_from_l(l0, 1.0);
    for (const auto& F : {hex_burgers(), ff_burgers(0.6)}) {
        const auto s = burgers_evolve(l0, F, 1.0, 0.1);
        double mx = 0;
        for (int k = 1; k <= 4; ++k) mx = std::max(mx, detail::rel_drift(s0, s, k));
        out.push_back(detail::le(o, "conserve_" + F.name + "_I1_I4_drift", mx, 1e-6, "n=64 x=0.1"));
    }
    // drift of I_4 for n = 20, 24, 28, 32: report the largest successive ratio
    double worst = 0, prev = -1;
    for (int n : {20, 24, 28, 32}) {
        const auto l = detail::sine_profile(n, 1.0, 0.2, 1.0 / 3, 0.1);
        const double d = detail::rel_drift(flow_state_from_l(l, 1.0), burgers_evolve(l, hex_burgers(), 1.0, 0.12), 4);
        if (prev > 0) worst = std::max(worst, d / prev);
        prev = d;
    }
    out.push_back(detail::le(o, "conserve_drift_ratio_under_refinement", worst, 1.0 - 1e-12, "n=20,24,28,32 x=0.12"));
    const auto tr = hamilton_evolve(s0, hex_density(), 0.1, 100, 10);
    double cas = 0;
    for (const auto& s : tr.states)
        cas = std::max({cas, std::abs(conserved_In(s, 1) - conserved_In(s0, 1)),
                        std::abs(conserved_In(s, 1, true) - conserved_In(s0, 1, true))});
    out.push_back(detail::le(o, "conserve_casimir_I1_hamilton", cas, 1e-10, "RK4 100 steps x=0.1"));
    return out;
}

// ---------------------------------------------------------------- 9

struct PictureComparison {
    CylinderGrid grid;
    std::vector<double> variational, flow;
    double sup = 0;
    bool converged = false;
};

// hex test problem: l0 a sinusoid, the variational right column taken from the flow at x = T
inline PictureComparison compare_pictures(const std::vector<cplx>& l0, double L, double T, int n,
                                          const SolveOptions& opt = {}) {
    const auto F = hex_burgers();
    const auto sT = burgers_evolve(l0, F, L, T);
    const limitshape::detail::FourierInterp ti(std::vector<cplx>(sT.t.begin(), sT.t.end()), L);
    const limitshape::detail::FourierInterp t0(
        [&] {
            std::vector<cplx> v(l0.size());
            for (std::size_t j = 0; j < l0.size(); ++j) v[j] = l0[j].imag() / std::numbers::pi;
            return v;
        }(),
        L);
    const CylinderGrid g(T, L, n + 1, n);
    const BoundaryData bd{[t0](double y) { return t0(cplx(y)).real(); }, [ti](double y) { return ti(cplx(y)).real(); }};
    double meanp = 0;
    for (const auto& v : l0) meanp += v.real() / double(l0.size());
    const auto r = minimize_action(g, hex_tension(), bd, -meanp, opt);
    std::vector<double> xs;
    for (int i = 0; i < g.nx; ++i) xs.push_back(g.x(i));
    PictureComparison pc{g, r.field.h, reconstruct_height(l0, F, L, xs, g.ny), 0, r.converged};
    for (std::size_t k = 0; k < pc.flow.size(); ++k) pc.sup = std::max(pc.sup, std::abs(pc.flow[k] - pc.variational[k]));
    return pc;
}

inline std::vector<Check> pictures(const Options& o) {
    using detail::fmt;
    const auto l0 = detail::sine_profile(64, 1.0, 0.1, 1.0 / 3, 0.05);
    const auto tr = hamilton_evolve(flow_state_from_l(l0, 1.0), hex_density(), 0.1, 200);
    const auto s = burgers_evolve(l0, hex_burgers(), 1.0, 0.1);
    double d = 0;
    for (std::size_t j = 0; j < s.p.size(); ++j)
        d = std::max({d, std::abs(tr.states.back().p[j] - s.p[j]), std::abs(tr.states.back().t[j] - s.t[j])});
    const auto pc = compare_pictures(detail::sine_profile(128, 1.0, 0.1, 1.0 / 3, 0.05), 1.0, 0.1, o.grid);
    return {detail::le(o, "pictures_hamilton_vs_characteristics", d, 1e-5, "n=64 x=0.1 RK4 200 steps"),
            detail::le(o, "pictures_variational_vs_flow_sup", pc.converged ? pc.sup : NAN, 1e-3,
                       fmt("grid=", o.grid + 1, "x", o.grid, " T=0.1"))};
}

// ---------------------------------------------------------------- 10

inline std::vector<Check> solver(const Options& o) {
    constexpr double pi = std::numbers::pi;
    const auto S = hex_tension();
    std::vector<Check> out;
    // constant data, no field: h = (x + y)/3
    {
        const CylinderGrid g(1, 1, 17, 16);
        const BoundaryData bd{[](double) { return 1.0 / 3; }, [](double) { return 1.0 / 3; }};
        const auto r = minimize_action(g, S, bd, 0.0);
        double e = 0;
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) e = std::max(e, std::abs(r.field.h[g.idx(i, j)] - (g.x(i) + g.y(j)) / 3));
        out.push_back(detail::le(o, "solver_affine_recovery", r.converged ? e : NAN, 1e-8, "t=1/3 V=0 17x16"));
    }
    // constant data with a field: the slope solves d_s sigma(s, t0) = -V
    {
        const CylinderGrid g(1, 1, 9, 8);
        const double t0 = 0.3, V = 0.4;
        const BoundaryData bd{[=](double) { return t0; }, [=](double) { return t0; }};
        const auto r = minimize_action(g, S, bd, V);
        double lo = 1e-12, hi = 1 - t0 - 1e-12;
        for (int k = 0; k < 200; ++k) {
            const double m = 0.5 * (lo + hi);
            (grad_sigma_hex(m, t0)[0] + V > 0 ? hi : lo) = m;
        }
        const double s = 0.5 * (lo + hi);
        double e = 0;
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                e = std::max(e, std::abs(r.field.h[g.idx(i, j)] - (s * g.x(i) + t0 * g.y(j))));
        out.push_back(detail::le(o, "solver_affine_with_field", r.converged ? e : NAN, 1e-8, "t=0.3 V=0.4"));
    }
    const BoundaryData wavy{[](double y) { return 1.0 / 3 + 0.08 * std::sin(2 * pi * y); },
                            [](double y) { return 1.0 / 3 + 0.08 * std::cos(2 * pi * y); }};
    const auto ms = mesh_study(S, wavy, 0.0, 1.0, 1.0, {16, 32, 64});
    out.push_back(detail::ge("solver_el_order", ms.orders.back(), 1.8, "n=32 -> 64"));
    {
        const CylinderGrid g(1, 1, 25, 24);
        const auto r1 = minimize_action(g, S, wavy, 0.0);
        auto start = initial_field(g, boundary_columns(g, wavy), S, 0.25);
        for (int i = 1; i + 1 < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                start.h[g.idx(i, j)] += 0.01 * std::sin(pi * g.x(i)) * std::cos(2 * pi * g.y(j));
        const auto r2 = minimize_action(g, S, wavy, 0.0, {}, &start);
        double d = 0;
        for (std::size_t k = 0; k < r1.field.h.size(); ++k) d = std::max(d, std::abs(r1.field.h[k] - r2.field.h[k]));
        out.push_back(detail::le(o, "solver_two_start_gap", (r1.converged && r2.converged) ? d : NAN, 1e-8, "25x24"));
    }
    return out;
}

// ---------------------------------------------------------------- 11

inline std::vector<Check> appendixD(const Options& o) {
    using detail::fmt;
    constexpr double pi = std::numbers::pi;
    std::vector<Check> out;
    out.push_back(detail::ge("dimer_hex_curve_match",
                             curves_equal_mod_units(characteristic_polynomial(hex_cell()), hex_curve()).equal ? 1 : 0, 1,
                             "1 - z - w"));
    int ok = 0;
    std::string variants;
    for (double u : {pi / 6, pi / 4, pi / 3}) {
        auto P = characteristic_polynomial(dimer_city(ff_weights_to_city(std::cos(u), std::sin(u), 1.0), true));
        double mp = 0, mq = 0;
        const auto Q = ff_curve(u);
        for (const auto& [k, c] : P.coeff) mp = std::max(mp, std::abs(c));
        for (const auto& [k, c] : Q.coeff) mq = std::max(mq, std::abs(c));
        const auto m = curves_equal_mod_units(P.scaled(mq / mp), Q, true, 1e-12);
        ok += m.equal;
        variants += fmt("u=", u, ":", m.variant, " ");
    }
    out.push_back(detail::ge("dimer_city_ff_curves_matched", ok, 3, variants));
    std::vector<BipartiteGraph> graphs = {honeycomb_patch({{0, 0}}, true, 1), honeycomb_patch({{0, 0}, {1, 0}}, true, 2),
                                          honeycomb_patch({{0, 0}, {1, 0}, {0, 1}}, true, 3),
                                          honeycomb_patch({{0, 0}, {1, 0}, {0, 1}, {1, 1}}, true, 4),
                                          dimer_city({1.1, 0.7, 1.3, 0.9, 0.6, 1.4, 0.8}, false)};
    double werr = 0;
    int nmatch = 0, lr_bad = 0, lr_total = 0;
    for (const auto& g : graphs) {
        const auto pf = planar_faces(g);
        for (const auto& d : enumerate_matchings(g)) {
            const auto th = trivalent_height(g, d, pf);
            const double w = config_weight(g, d);
            werr = std::max(werr, std::abs(weight_from_height(th, g, pf) - w) / w);
            ++nmatch;
            std::vector<int> in(g.edges.size(), 0);
            for (int e : d) in[e] = 1;
            for (std::size_t e = 0; e < g.edges.size(); ++e) {
                const double step = th.at(pf.left[e]) - th.at(pf.right[e]) + 0.5;
                ++lr_total;
                if (step != (in[e] ? 1.5 : 0.0)) ++lr_bad;
            }
        }
    }
    out.push_back(detail::le(o, "dimer_weight_from_height_relative", werr, 1e-10, fmt(nmatch, " matchings on 5 graphs")));
    out.push_back(detail::le(o, "dimer_left_right_violations", lr_bad, 0, fmt(lr_total, " edge crossings")));
    return out;
}

// ---------------------------------------------------------------- 12

inline std::vector<Check> fivevertex(const Options& o) {
    const FiveVertexParams p;
    std::vector<Check> out;
    out.push_back(detail::le(o, "fivevertex_case1_limit", convergence_gap(1, p, 40.0), 1e-10, "gamma=40"));
    out.push_back(detail::le(o, "fivevertex_case2_limit", convergence_gap(2, p, 1e-12), 1e-10, "gamma-u=1e-12"));
    out.push_back(detail::le(o, "fivevertex_case3_limit", convergence_gap(3, p, 40.0), 1e-10, "gamma=40"));
    for (int k : {1, 3}) {
        const double g4 = convergence_gap(k, p, 4), g6 = convergence_gap(k, p, 6), g8 = convergence_gap(k, p, 8);
        out.push_back(detail::le(o, "fivevertex_case" + std::to_string(k) + "_gap_ratio", std::max(g6 / g4, g8 / g6),
                                 1.0 - 1e-12, "gamma=4,6,8"));
    }
    const double u = std::numbers::pi / 2 - 1e-3;
    double mx = 0;
    for (cplx l : {cplx(-1, 0.5), cplx(0.3, 1.2), cplx(-0.2, 2.5)})
        mx = std::max(mx, std::abs(hamiltonian_ff(l + ff_to_hex_shift(u), u) - hamiltonian_hex(l)));
    out.push_back(detail::le(o, "fivevertex_ff_hamiltonian_to_hex", mx, 1e-4, "u=pi/2-1e-3"));
    return out;
}

// ---------------------------------------------------------------- registry

struct SuiteInfo {
    std::string name;
    std::vector<int> criteria;
    double time_limit;  // seconds; 0 = none
    std::function<std::vector<Check>(const Options&)> run;
};

inline const std::vector<SuiteInfo>& suites() {
    static const std::vector<SuiteInfo> s = {
        {"ybe", {1}, 1, ybe},           {"commute", {2}, 30, commute},         {"oracle", {3}, 60, oracle},
        {"legendre", {4}, 60, legendre}, {"hessian", {5, 6}, 0, hessian},      {"poisson", {7}, 0, poisson},
        {"conserve", {8}, 0, conserve},  {"pictures", {9}, 0, pictures},       {"solver", {10}, 0, solver},
        {"appendixD", {11}, 0, appendixD}, {"fivevertex", {12}, 0, fivevertex}};
    return s;
}

inline const SuiteInfo& find_suite(const std::string& name) {
    for (const auto& s : suites())
        if (s.name == name) return s;
    throw OutOfRange("unknown suite: " + name);
}

inline SuiteResult run_suite(const SuiteInfo& info, const Options& o) {
    SuiteResult r{info.name, info.criteria, {}, 0, {}};
    const auto t0 = std::chrono::steady_clock::now();
    try {
        r.checks = info.run(o);
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.timing && info.time_limit > 0 && r.error.empty())
        r.checks.push_back({info.name + "_runtime_s", r.seconds, info.time_limit, true, {}});
    return r;
}

}  // namespace limitshape::verify
