#pragma once
// Hamiltonian picture on the cylinder: x plays the role of time, y is periodic with period L.
// State variables are the momentum p(y) and the slope t(y) = d_y h; l = p + i pi t.
#include <unsupported/Eigen/FFT>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dimers.hpp"
#include "errors.hpp"
#include "special.hpp"
#include "tension.hpp"

namespace limitshape {

struct FlowState {
    double L = 1;
    std::vector<double> p, t;
    std::vector<double> h;  // optional height samples (empty when not tracked)

    int n() const { return int(p.size()); }
    double y(int j) const { return L * j / n(); }
    cplx l(int j) const { return {p[j], std::numbers::pi * t[j]}; }
    std::vector<cplx> l_samples() const {
        std::vector<cplx> v(p.size());
        for (int j = 0; j < n(); ++j) v[j] = l(j);
        return v;
    }
};

inline FlowState flow_state_from_l(const std::vector<cplx>& l, double L) {
    FlowState s;
    s.L = L;
    s.p.resize(l.size());
    s.t.resize(l.size());
    for (std::size_t j = 0; j < l.size(); ++j) {
        s.p[j] = l[j].real();
        s.t[j] = l[j].imag() / std::numbers::pi;
    }
    return s;
}

// ---------------------------------------------------------------- periodic spectral tools

namespace detail {

// trigonometric interpolant of periodic complex samples, continued to complex arguments
class FourierInterp {
  public:
    FourierInterp(const std::vector<cplx>& samples, double L, double drop = 1e-14) : L_(L) {
        const int n = int(samples.size());
        if (n < 4) throw OutOfRange("need at least 4 periodic samples");
        Eigen::FFT<double> fft;
        std::vector<cplx> in(samples), out;
        fft.fwd(out, in);
        double mx = 0;
        for (auto& c : out) {
            c /= double(n);
            mx = std::max(mx, std::abs(c));
        }
        for (int k = 0; k < n; ++k) {
            int m = k <= n / 2 ? k : k - n;
            cplx c = out[k];
            if (std::abs(c) <= drop * mx) continue;
            if (n % 2 == 0 && k == n / 2) {
                // split the Nyquist mode symmetrically
                modes_.push_back({m, 0.5 * c});
                modes_.push_back({-m, 0.5 * c});
                continue;
            }
            modes_.push_back({m, c});
        }
    }
    cplx operator()(cplx zeta) const {
        cplx s = 0;
        const cplx w = cplx(0, 2 * std::numbers::pi / L_);
        for (const auto& [m, c] : modes_) s += c * std::exp(w * double(m) * zeta);
        return s;
    }
    cplx derivative(cplx zeta) const {
        cplx s = 0;
        const cplx w = cplx(0, 2 * std::numbers::pi / L_);
        for (const auto& [m, c] : modes_) s += c * w * double(m) * std::exp(w * double(m) * zeta);
        return s;
    }
    int max_mode() const {
        int m = 0;
        for (const auto& md : modes_) m = std::max(m, std::abs(md.first));
        return m;
    }

  private:
    double L_;
    std::vector<std::pair<int, cplx>> modes_;
};

inline std::vector<double> spectral_dy(const std::vector<double>& f, double L) {
    const int n = int(f.size());
    Eigen::FFT<double> fft;
    std::vector<cplx> F;
    std::vector<double> in(f);
    fft.fwd(F, in);
    for (int k = 0; k < n; ++k) {
        int m = k <= n / 2 ? k : k - n;
        if (n % 2 == 0 && k == n / 2) m = 0;
        F[k] *= cplx(0, 2 * std::numbers::pi * m / L);
    }
    std::vector<double> out;
    fft.inv(out, F);
    return out;
}

// fraction of spectral energy in the top third of the modes
inline double spectral_tail(const std::vector<double>& f) {
    const int n = int(f.size());
    Eigen::FFT<double> fft;
    std::vector<cplx> F;
    std::vector<double> in(f);
    fft.fwd(F, in);
    double all = 0, tail = 0;
    for (int k = 1; k < n; ++k) {
        const int m = std::abs(k <= n / 2 ? k : k - n);
        const double e = std::norm(F[k]);
        all += e;
        if (3 * m > n) tail += e;
    }
    return all > 0 ? tail / all : 0.0;
}

// same, for l = p + i pi t taken together
inline double spectral_tail(const std::vector<double>& p, const std::vector<double>& t) {
    const int n = int(p.size());
    Eigen::FFT<double> fft;
    std::vector<cplx> in(n), F;
    for (int j = 0; j < n; ++j) in[j] = cplx(p[j], std::numbers::pi * t[j]);
    fft.fwd(F, in);
    double all = 0, tail = 0;
    for (int k = 1; k < n; ++k) {
        const int m = std::abs(k <= n / 2 ? k : k - n);
        const double e = std::norm(F[k]);
        all += e;
        if (3 * m > n) tail += e;
    }
    return all > 0 ? tail / all : 0.0;
}

// antiderivative in y of periodic samples with zero mean removed: returns g with g(0) = 0 and mean slope added back
inline std::vector<double> integrate_y(const std::vector<double>& f, double L) {
    const int n = int(f.size());
    Eigen::FFT<double> fft;
    std::vector<cplx> F;
    std::vector<double> in(f);
    fft.fwd(F, in);
    const double mean = F[0].real() / n;
    F[0] = 0;
    for (int k = 1; k < n; ++k) {
        int m = k <= n / 2 ? k : k - n;
        if (n % 2 == 0 && k == n / 2) {
            F[k] = 0;
            continue;
        }
        F[k] /= cplx(0, 2 * std::numbers::pi * m / L);
    }
    std::vector<double> g;
    fft.inv(g, F);
    const double g0 = g[0];
    for (int j = 0; j < n; ++j) g[j] += mean * (L * j / n) - g0;
    return g;
}

}  // namespace detail

// ---------------------------------------------------------------- Burgers functions

struct BurgersFunction {
    std::string name;
    std::function<cplx(cplx)> F;   // F(z)
    std::function<cplx(cplx)> dF;  // dF/dz
    std::function<cplx(cplx)> G;   // antiderivative of F(e^l) in l, as a function of z (may be empty)
    std::string branch;            // branch actually used, for reports
};

inline BurgersFunction hex_burgers() {
    BurgersFunction b;
    b.name = "hex";
    b.F = [](cplx z) { return z / (1.0 - z); };
    b.dF = [](cplx z) { return 1.0 / ((1.0 - z) * (1.0 - z)); };
    b.G = [](cplx z) { return -std::log(1.0 - z); };
    b.branch = "w = 1 - z";
    return b;
}

inline BurgersFunction ff_burgers(double u) {
    if (!(u > 0 && u < std::numbers::pi / 2)) throw OutOfRange("FF needs 0 < u < pi/2");
    const double c = std::cos(u), s = std::sin(u);
    BurgersFunction b;
    b.name = "ff";
    b.F = [=](cplx z) { return -z / ((z * c + s) * (z * s - c)); };
    b.dF = [=](cplx z) {
        const cplx D = (z * c + s) * (z * s - c);
        const cplx Dp = 2.0 * z * c * s + (s * s - c * c);
        return -(D - z * Dp) / (D * D);
    };
    b.G = [=](cplx z) { return std::log(z * c + s) - std::log(c - z * s); };
    b.branch = "w = (cos u - z sin u)/(z cos u + sin u)";
    return b;
}

namespace detail {

// roots in w of P(z, w) = 0 at fixed z
inline std::vector<cplx> w_roots(const SpectralCurve& P, cplx z) {
    int jmin = 0, jmax = 0;
    bool first = true;
    for (const auto& [k, v] : P.coeff) {
        if (first) {
            jmin = jmax = k.second;
            first = false;
        }
        jmin = std::min(jmin, k.second);
        jmax = std::max(jmax, k.second);
    }
    std::vector<cplx> c(jmax - jmin + 1, 0.0);
    for (const auto& [k, v] : P.coeff) c[k.second - jmin] += v * std::pow(z, k.first);
    while (c.size() > 1 && std::abs(c.back()) == 0.0) c.pop_back();
    return poly_roots(c);
}

}  // namespace detail

// F(z) = (z/w) dP/dz / dP/dw on the branch whose w lies nearest the hint (unique root needs no hint)
inline BurgersFunction burgers_from_curve(const SpectralCurve& P, std::optional<std::function<cplx(cplx)>> hint = {}) {
    auto pick = [P, hint](cplx z) {
        const auto r = detail::w_roots(P, z);
        if (r.empty()) throw SingularBranch("curve has no w-dependence");
        if (r.size() == 1) return r[0];
        if (!hint) throw BranchAmbiguous("several w-branches and no hint");
        const cplx h = (*hint)(z);
        std::vector<double> d;
        for (const auto& x : r) d.push_back(std::abs(x - h));
        std::size_t best = 0;
        for (std::size_t i = 1; i < d.size(); ++i)
            if (d[i] < d[best]) best = i;
        for (std::size_t i = 0; i < d.size(); ++i)
            if (i != best && std::abs(d[i] - d[best]) <= 1e-8 * (1 + std::abs(h))) throw BranchAmbiguous("hint equidistant");
        return r[best];
    };
    auto F = [P, pick](cplx z) {
        const cplx w = pick(z);
        const cplx Pw = P.dw(z, w);
        if (std::abs(Pw) < 1e-13) throw SingularBranch("dP/dw vanishes on the branch");
        return (z / w) * P.dz(z, w) / Pw;
    };
    BurgersFunction b;
    b.name = "curve";
    b.F = F;
    b.dF = [F](cplx z) {
        const double h = 1e-5 * (1 + std::abs(z));
        return (F(z + h) - F(z - h)) / (2 * h);
    };
    b.branch = hint ? "nearest to hint" : "unique";
    return b;
}

// ---------------------------------------------------------------- Hamiltonian densities

struct HamiltonianDensity {
    std::string name;
    // tau(p, xi) with first and second partials
    std::function<PartialLegendreResult(double, double)> eval;
};

// from a surface tension via the partial Legendre transform
inline HamiltonianDensity density_from_tension(const SurfaceTension& S, bool want_value = true) {
    return {S.name, [S, want_value](double p, double xi) { return partial_legendre(S, p, xi, want_value); }};
}

// closed form of the hex density through Phi(l) = -log(1 - e^l) = d2 tau + i pi d1 tau
inline HamiltonianDensity hex_density() {
    return {"hex", [](double p, double xi) {
                if (!(xi > 0 && xi < 1)) throw SlopeOutOfDomain("hex density needs 0 < xi < 1");
                const cplx z = std::exp(cplx(p, std::numbers::pi * xi));
                const cplx Phi = -std::log(1.0 - z);
                const cplx F = z / (1.0 - z);
                PartialLegendreResult r;
                r.t1 = r.nu = Phi.imag() / std::numbers::pi;
                r.t2 = Phi.real();
                r.t11 = F.imag() / std::numbers::pi;
                r.t12 = F.real();
                r.t22 = -std::numbers::pi * F.imag();
                r.tau = dilog(z).imag() / std::numbers::pi;
                return r;
            }};
}

inline cplx hamiltonian_hex(cplx l) {
    const cplx z = std::exp(l);
    return (dilog(z) - dilog(std::conj(z))) / cplx(0, 2 * std::numbers::pi);
}

inline cplx hamiltonian_ff(cplx l, double u) {
    if (!(u > 0 && u < std::numbers::pi / 2)) throw OutOfRange("FF needs 0 < u < pi/2");
    const double tu = std::tan(u), cu = 1.0 / tu;
    auto hol = [&](cplx z) { return dilog(z * tu) - dilog(-z * cu); };
    const cplx z = std::exp(l);
    return (hol(z) - hol(std::conj(z))) / cplx(0, 2 * std::numbers::pi);
}

// momentum translation taking the FF Hamiltonian to the hex one as u -> pi/2
inline double ff_to_hex_shift(double u) { return std::log(std::sin(2 * u) / 2); }

inline double hamiltonian(const FlowState& st, const HamiltonianDensity& tau, double V = 0) {
    double s = 0;
    for (int j = 0; j < st.n(); ++j) s += tau.eval(st.p[j] + V, st.t[j]).tau;
    return s * st.L / st.n();
}

inline cplx conserved_In(const FlowState& st, int n, bool conjugate = false) {
    if (n < 1 || n > 8) throw OutOfRange("moment order must be in 1..8");
    cplx s = 0;
    for (int j = 0; j < st.n(); ++j) {
        const cplx l = conjugate ? std::conj(st.l(j)) : st.l(j);
        s += std::pow(l, n);
    }
    return s * st.L / double(st.n());
}

// ---------------------------------------------------------------- Hamiltonian method of lines

struct FlowTrajectory {
    std::vector<double> x;
    std::vector<FlowState> states;
};

// d_x p = d_y (d2 tau), d_x t = d_y (d1 tau), d_x h = d1 tau; classical RK4
inline FlowTrajectory hamilton_evolve(FlowState st, const HamiltonianDensity& tau, double x_span, int steps,
                                      int record_every = 1, double V = 0, double shock_tail = 1e-6) {
    if (steps < 1) throw OutOfRange("need at least one step");
    const int n = st.n();
    if (st.h.empty()) {
        st.h = detail::integrate_y(st.t, st.L);
    }
    const double tail0 = std::max(shock_tail, 100 * detail::spectral_tail(st.p, st.t));
    struct D {
        std::vector<double> p, t, h;
    };
    auto rhs = [&](const FlowState& s) {
        std::vector<double> a(n), b(n);
        for (int j = 0; j < n; ++j) {
            if (!std::isfinite(s.p[j]) || !std::isfinite(s.t[j])) throw StepFailure("non-finite state");
            PartialLegendreResult r;
            try {
                r = tau.eval(s.p[j] + V, s.t[j]);
            } catch (const Error&) {
                throw StepFailure("state left the slope domain");
            }
            a[j] = r.t2;
            b[j] = r.t1;
        }
        return D{detail::spectral_dy(a, s.L), detail::spectral_dy(b, s.L), b};
    };
    auto axpy = [&](const FlowState& s, const D& d, double c) {
        FlowState r = s;
        for (int j = 0; j < n; ++j) {
            r.p[j] += c * d.p[j];
            r.t[j] += c * d.t[j];
            r.h[j] += c * d.h[j];
        }
        return r;
    };
    FlowTrajectory tr;
    tr.x.push_back(0);
    tr.states.push_back(st);
    const double dx = x_span / steps;
    for (int k = 0; k < steps; ++k) {
        const D k1 = rhs(st);
        const D k2 = rhs(axpy(st, k1, dx / 2));
        const D k3 = rhs(axpy(st, k2, dx / 2));
        const D k4 = rhs(axpy(st, k3, dx));
        for (int j = 0; j < n; ++j) {
            st.p[j] += dx / 6 * (k1.p[j] + 2 * k2.p[j] + 2 * k3.p[j] + k4.p[j]);
            st.t[j] += dx / 6 * (k1.t[j] + 2 * k2.t[j] + 2 * k3.t[j] + k4.t[j]);
            st.h[j] += dx / 6 * (k1.h[j] + 2 * k2.h[j] + 2 * k3.h[j] + k4.h[j]);
        }
        // steepening shows up as energy piling into the unresolved modes, well beyond what the data started with
        if (detail::spectral_tail(st.p, st.t) > tail0)
            throw ShockDetected("resolution lost: gradient catastrophe ahead");
        if ((k + 1) % record_every == 0 || k + 1 == steps) {
            tr.x.push_back((k + 1) * dx);
            tr.states.push_back(st);
        }
    }
    return tr;
}

// ---------------------------------------------------------------- characteristics

struct BurgersSolver {
    detail::FourierInterp l0;
    BurgersFunction F;
    double L;
    double sign = 1.0;
    double delta = 1e-3;

    BurgersSolver(const std::vector<cplx>& l0_samples, BurgersFunction f, double L_, double sign_ = 1.0)
        : l0(l0_samples, L_), F(std::move(f)), L(L_), sign(sign_) {}

    // l(x, y) = l0(zeta), zeta = y + sign x F(e^{l0(zeta)}); Newton in zeta started at the previous solution
    cplx solve(double x, double y, cplx& zeta) const {
        for (int it = 0; it < 60; ++it) {
            const cplx l = l0(zeta);
            const cplx z = std::exp(l);
            const cplx Fz = F.F(z);
            const cplx g = zeta - sign * x * Fz - y;
            const cplx gp = 1.0 - sign * x * F.dF(z) * z * l0.derivative(zeta);
            if (std::abs(gp) < delta) throw ShockDetected("characteristics cross");
            const cplx step = g / gp;
            zeta -= step;
            if (!std::isfinite(zeta.real()) || !std::isfinite(zeta.imag())) throw ShockDetected("characteristic solve diverged");
            if (std::abs(step) < 1e-15 * (1 + std::abs(zeta))) {
                const cplx l1 = l0(zeta);
                const cplx gp1 = 1.0 - sign * x * F.dF(std::exp(l1)) * std::exp(l1) * l0.derivative(zeta);
                if (std::abs(gp1) < delta) throw ShockDetected("characteristics cross");
                return l1;
            }
        }
        throw ShockDetected("characteristic solve did not converge");
    }
};

// march x in small increments so each Newton solve starts close to its root
inline FlowState burgers_evolve(const std::vector<cplx>& l0, const BurgersFunction& F, double L, double x,
                                double sign = 1.0, int substeps = 0, double shock_tail = 1e-6) {
    BurgersSolver S(l0, F, L, sign);
    const int n = int(l0.size());
    if (substeps <= 0) substeps = std::max(1, int(std::ceil(std::abs(x) * 64)));
    std::vector<cplx> zeta(n), l(l0);
    for (int j = 0; j < n; ++j) zeta[j] = L * j / n;
    const FlowState st0 = flow_state_from_l(l0, L);
    const double tail0 = std::max(shock_tail, 100 * detail::spectral_tail(st0.p, st0.t));
    for (int k = 1; k <= substeps; ++k) {
        const double xk = x * k / substeps;
        for (int j = 0; j < n; ++j) l[j] = S.solve(xk, L * j / n, zeta[j]);
        // a root that jumped sheets shows up as a disordered zeta grid or an unresolved profile
        for (int j = 0; j < n; ++j) {
            const cplx dz = (j + 1 < n ? zeta[j + 1] : zeta[0] + L) - zeta[j];
            if (!(dz.real() > 0)) throw ShockDetected("characteristics cross");
        }
        const FlowState st = flow_state_from_l(l, L);
        if (detail::spectral_tail(st.p, st.t) > tail0)
            throw ShockDetected("resolution lost: gradient catastrophe ahead");
    }
    return flow_state_from_l(l, L);
}

// h(x, y) from the characteristic solution: d_x h = Im G(e^l)/pi, d_y h = Im l / pi; h(0,0) = 0.
// xs must be increasing; one march through x with warm-started Newton solves.
inline std::vector<double> reconstruct_height(const std::vector<cplx>& l0, const BurgersFunction& F, double L,
                                              const std::vector<double>& xs, int ny, double sign = 1.0) {
    if (!F.G) throw Inconsistent("Burgers function has no antiderivative");
    BurgersSolver S(l0, F, L, sign);
    // 5-point Gauss-Legendre on [0,1]
    static constexpr double gx[5] = {0.046910077030668, 0.230765344947158, 0.5, 0.769234655052842, 0.953089922969332};
    static constexpr double gw[5] = {0.118463442528095, 0.239314335249683, 0.284444444444444, 0.239314335249683,
                                     0.118463442528095};
    std::vector<cplx> zeta(ny);
    for (int j = 0; j < ny; ++j) zeta[j] = L * j / ny;
    cplx zeta0 = 0;
    double xcur = 0, xq = 0, hx0 = 0;
    auto advance = [&](cplx& z, double y, double from, double to) {
        const int m = std::max(1, int(std::ceil(std::abs(to - from) * 64)));
        cplx l = 0;
        for (int k = 1; k <= m; ++k) l = S.solve(from + (to - from) * k / m, y, z);
        return l;
    };
    std::vector<double> out;
    out.reserve(xs.size() * ny);
    for (double x : xs) {
        if (x < xcur) throw OutOfRange("reconstruction abscissae must increase");
        if (x > xcur) {
            // sub-intervals short enough for the quadrature to be exact to round-off
            const int pieces = std::max(1, int(std::ceil((x - xcur) * 256)));
            for (int k = 0; k < pieces; ++k) {
                const double a = xcur + (x - xcur) * k / pieces, b = xcur + (x - xcur) * (k + 1) / pieces;
                for (int q = 0; q < 5; ++q) {
                    const double xn = a + (b - a) * gx[q];
                    const cplx l = advance(zeta0, 0.0, xq, xn);
                    xq = xn;
                    hx0 += (b - a) * gw[q] * sign * F.G(std::exp(l)).imag() / std::numbers::pi;
                }
            }
        }
        std::vector<double> tt(ny);
        for (int j = 0; j < ny; ++j) tt[j] = (x > 0 ? advance(zeta[j], L * j / ny, xcur, x) : S.l0(zeta[j])).imag() / std::numbers::pi;
        xcur = x;
        const auto hy = detail::integrate_y(tt, L);
        for (int j = 0; j < ny; ++j) out.push_back(hx0 + hy[j]);
    }
    return out;
}

// ---------------------------------------------------------------- Poisson commutation certificate

struct BracketGrid {
    double p0 = -1, p1 = 1, xi0 = 0.2, xi1 = 0.8;
    int n = 7;
    double fd = 1e-4;
};

struct BracketResult {
    double residual = 0;  // sup |d2 A - d1 B| by finite differences
    double factored = 0;  // sup |tau11_u tau11_v (det_v - det_u)|
    double factor_gap = 0;
};

inline BracketResult poisson_bracket_residual(const SurfaceTension& Su, const SurfaceTension& Sv, const BracketGrid& g = {}) {
    auto A = [&](double p, double xi) {
        const auto u = partial_legendre(Su, p, xi, false), v = partial_legendre(Sv, p, xi, false);
        return u.t11 * v.t2 - v.t11 * u.t2;
    };
    auto B = [&](double p, double xi) {
        const auto u = partial_legendre(Su, p, xi, false), v = partial_legendre(Sv, p, xi, false);
        return u.t12 * v.t2 - v.t12 * u.t2;
    };
    BracketResult r;
    const double e = g.fd;
    for (int a = 0; a < g.n; ++a)
        for (int b = 0; b < g.n; ++b) {
            const double p = g.p0 + (g.p1 - g.p0) * a / (g.n - 1);
            const double xi = g.xi0 + (g.xi1 - g.xi0) * b / (g.n - 1);
            const double dA = (-A(p, xi + 2 * e) + 8 * A(p, xi + e) - 8 * A(p, xi - e) + A(p, xi - 2 * e)) / (12 * e);
            const double dB = (-B(p + 2 * e, xi) + 8 * B(p + e, xi) - 8 * B(p - e, xi) + B(p - 2 * e, xi)) / (12 * e);
            const double res = dA - dB;
            const auto u = partial_legendre(Su, p, xi, false), v = partial_legendre(Sv, p, xi, false);
            const double du = Su.hess(u.nu, xi).determinant(), dv = Sv.hess(v.nu, xi).determinant();
            const double fac = u.t11 * v.t11 * (dv - du);
            r.residual = std::max(r.residual, std::abs(res));
            r.factored = std::max(r.factored, std::abs(fac));
            r.factor_gap = std::max(r.factor_gap, std::abs(std::abs(res) - std::abs(fac)));
        }
    return r;
}

}  // namespace limitshape
