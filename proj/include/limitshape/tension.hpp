#pragma once
// Free energies of spectral curves and surface tensions.
//
// Convention: sigma is convex and the limit shape minimizes its integral.
#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "dimers.hpp"
#include "errors.hpp"
#include "special.hpp"

namespace limitshape {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

namespace detail {

inline std::vector<cplx> poly_roots(const std::vector<cplx>& c) {
    // c[0] + c[1] z + ... + c[d] z^d, c[d] != 0
    const int d = int(c.size()) - 1;
    if (d <= 0) return {};
    if (d == 1) return {-c[0] / c[1]};
    if (d == 2) {
        const cplx disc = std::sqrt(c[1] * c[1] - 4.0 * c[2] * c[0]);
        // stable pairing
        const cplx q = -0.5 * (c[1] + (std::real(std::conj(c[1]) * disc) >= 0 ? disc : -disc));
        if (q == cplx(0)) return {0.0, 0.0};
        return {q / c[2], c[0] / q};
    }
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 1; i < d; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) C(i, d - 1) = -c[i] / c[d];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    std::vector<cplx> r(d);
    for (int i = 0; i < d; ++i) r[i] = es.eigenvalues()[i];
    return r;
}

// coefficients of P(., w) as a polynomial in z after removing z^{imin}
inline std::vector<cplx> z_coefficients(const SpectralCurve& P, cplx w, int imin, int imax) {
    std::vector<cplx> c(imax - imin + 1, 0.0);
    for (const auto& [k, v] : P.coeff) c[k.first - imin] += v * std::pow(w, k.second);
    return c;
}

struct JensenSlice {
    double mean_log;  // average of log|P(e^{H+i phi}, w)| over phi
    int inside;       // imin + number of z-roots with |z| < e^H
};

inline JensenSlice jensen_slice(const SpectralCurve& P, int imin, int imax, cplx w, double H) {
    auto c = z_coefficients(P, w, imin, imax);
    while (c.size() > 1 && std::abs(c.back()) == 0.0) c.pop_back();
    if (c.size() == 1 && std::abs(c[0]) == 0.0)
        throw SingularLocus("P vanishes identically on a slice");
    double s = std::log(std::abs(c.back())) + imin * H;
    int inside = imin;
    const double r = std::exp(H);
    for (const auto& z : poly_roots(c)) {
        const double az = std::abs(z);
        if (az < r) {
            s += H;
            ++inside;
        } else {
            s += std::log(az);
        }
    }
    return {s, inside};
}

// Jump points in [0, 2 pi] of an integer-valued piecewise-constant function, located by
// bisection after a uniform scan. Returns breakpoints (including 0 and 2 pi) and the value
// on each piece.
template <class F>
std::pair<std::vector<double>, std::vector<int>> step_pieces(F&& count, int n0 = 512) {
    const double twopi = 2 * std::numbers::pi;
    std::vector<double> br{0.0};
    std::vector<int> val;
    double a = 0;
    int ca = count(0.0);
    for (int k = 1; k <= n0; ++k) {
        const double b = twopi * k / n0;
        const int cb = count(b);
        if (cb != ca) {
            // a second jump inside one cell would be missed; fine away from the domain boundary
            double lo = a, hi = b;
            for (int it = 0; it < 60 && hi - lo > 4e-16; ++it) {
                const double mid = 0.5 * (lo + hi);
                (count(mid) == ca ? lo : hi) = mid;
            }
            val.push_back(ca);
            br.push_back(0.5 * (lo + hi));
        }
        a = b;
        ca = cb;
    }
    val.push_back(ca);
    br.push_back(twopi);
    return {br, val};
}

template <class F>
double integrate_steps(F&& count, int n0 = 512) {
    auto [br, val] = step_pieces(count, n0);
    double total = 0;
    for (std::size_t i = 0; i < val.size(); ++i) total += val[i] * (br[i + 1] - br[i]);
    return total / (2 * std::numbers::pi);
}

}  // namespace detail

// f(H,V) = mean over the torus |z| = e^H, |w| = e^V of log|P|. Inner average by Jensen's
// formula, outer one by Gauss-Kronrod on the smooth pieces between root crossings.
inline double free_energy(const SpectralCurve& P, double H, double V, double tol = 1e-14) {
    if (P.is_zero()) throw SingularLocus("zero curve");
    const int imin = P.min_i(), imax = P.max_i();
    auto slice = [&](double psi) { return detail::jensen_slice(P, imin, imax, std::polar(std::exp(V), psi), H); };
    // the integrand is smooth between the points where a root crosses |z| = e^H
    auto [br, val] = detail::step_pieces([&](double psi) { return slice(psi).inside; });
    double I = 0;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        if (br[i + 1] <= br[i]) continue;
        double err = 0;
        I += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [&](double psi) { return slice(psi).mean_log; }, br[i], br[i + 1], 12, tol, &err);
    }
    return I / (2 * std::numbers::pi);
}

inline Vec2 grad_free_energy(const SpectralCurve& P, double H, double V) {
    const int imin = P.min_i(), imax = P.max_i();
    const double dH = detail::integrate_steps(
        [&](double psi) { return detail::jensen_slice(P, imin, imax, std::polar(std::exp(V), psi), H).inside; });
    const SpectralCurve Q = P.transformed(true, 1, 1);
    const int jmin = Q.min_i(), jmax = Q.max_i();
    const double dV = detail::integrate_steps(
        [&](double phi) { return detail::jensen_slice(Q, jmin, jmax, std::polar(std::exp(H), phi), V).inside; });
    return {dH, dV};
}

inline Mat2 hess_free_energy(const SpectralCurve& P, double H, double V, double h = 1e-5) {
    Mat2 M;
    M.col(0) = (grad_free_energy(P, H + h, V) - grad_free_energy(P, H - h, V)) / (2 * h);
    M.col(1) = (grad_free_energy(P, H, V + h) - grad_free_energy(P, H, V - h)) / (2 * h);
    return 0.5 * (M + M.transpose());
}

// tensor-product periodic trapezoid with half-cell offset; independent of the Jensen path
inline double free_energy_trapezoid(const SpectralCurve& P, double H, double V, int n) {
    if (n < 64) throw OutOfRange("quadrature resolution must be at least 64");
    const double twopi = 2 * std::numbers::pi;
    std::vector<double> row(n);
    std::vector<double> col(n);
    for (int a = 0; a < n; ++a) {
        const cplx z = std::polar(std::exp(H), twopi * (a + 0.5) / n);
        for (int b = 0; b < n; ++b) {
            const cplx w = std::polar(std::exp(V), twopi * (b + 0.5) / n);
            const double m = std::abs(P(z, w));
            if (m == 0.0) throw SingularLocus("P vanishes on a quadrature node");
            row[b] = std::log(m);
        }
        double s = 0;
        for (double x : row) s += x;
        col[a] = s / n;
    }
    double s = 0;
    for (double x : col) s += x;
    return s / n;
}

// ---------------------------------------------------------------- closed forms

inline void require_hex_domain(double s, double t) {
    if (!(s > 0 && t > 0 && s + t < 1)) throw DomainBoundary("hex slopes must satisfy s,t > 0, s+t < 1");
}

inline double sigma_hex(double s, double t) {
    require_hex_domain(s, t);
    constexpr double pi = std::numbers::pi;
    return -(lobachevsky(pi * s) + lobachevsky(pi * t) + lobachevsky(pi * (1 - s - t))) / pi;
}

inline Vec2 grad_sigma_hex(double s, double t) {
    require_hex_domain(s, t);
    constexpr double pi = std::numbers::pi;
    const double d = std::log(std::sin(pi * (s + t)));
    return {std::log(std::sin(pi * s)) - d, std::log(std::sin(pi * t)) - d};
}

inline Mat2 hess_sigma_hex(double s, double t) {
    require_hex_domain(s, t);
    constexpr double pi = std::numbers::pi;
    const double k = pi / std::tan(pi * (s + t));
    Mat2 M;
    M << pi / std::tan(pi * s) - k, -k, -k, pi / std::tan(pi * t) - k;
    return M;
}

inline void require_ff(double s, double t, double u) {
    if (!(s > 0 && s < 1 && t > 0 && t < 1)) throw DomainBoundary("FF slopes must lie in (0,1)^2");
    if (!(u > 0 && u < std::numbers::pi / 2)) throw OutOfRange("FF needs 0 < u < pi/2");
}

inline Vec2 grad_sigma_ff(double s, double t, double u) {
    require_ff(s, t, u);
    constexpr double pi = std::numbers::pi;
    const double ps = pi * s, pt = pi * t, s2 = std::sin(2 * u), c2 = std::cos(2 * u);
    const double X = (std::sin(pt) * std::cos(ps) - c2 * std::cos(pt) * std::sin(ps)) / (s2 * std::sin(ps));
    const double Y = (std::sin(ps) * std::cos(pt) - c2 * std::cos(ps) * std::sin(pt)) / (s2 * std::sin(pt));
    return {-std::asinh(X), -std::asinh(Y)};
}

inline Mat2 hess_sigma_ff(double s, double t, double u) {
    require_ff(s, t, u);
    constexpr double pi = std::numbers::pi;
    const double ps = pi * s, pt = pi * t, s2 = std::sin(2 * u), c2 = std::cos(2 * u);
    const double X = (std::sin(pt) / std::tan(ps) - c2 * std::cos(pt)) / s2;
    const double Y = (std::sin(ps) / std::tan(pt) - c2 * std::cos(ps)) / s2;
    const double Xs = -pi * std::sin(pt) / (std::sin(ps) * std::sin(ps) * s2);
    const double Xt = pi * (std::cos(pt) / std::tan(ps) + c2 * std::sin(pt)) / s2;
    const double Yt = -pi * std::sin(ps) / (std::sin(pt) * std::sin(pt) * s2);
    const double Ys = pi * (std::cos(ps) / std::tan(pt) + c2 * std::sin(ps)) / s2;
    const double gx = 1.0 / std::sqrt(1 + X * X), gy = 1.0 / std::sqrt(1 + Y * Y);
    Mat2 M;
    M << -Xs * gx, -Xt * gx, -Ys * gy, -Yt * gy;
    return 0.5 * (M + M.transpose());
}

inline Vec2 grad_free_energy_ff(double H, double V, double u) {
    if (!(u > 0 && u < std::numbers::pi / 2)) throw OutOfRange("FF needs 0 < u < pi/2");
    const double tu = std::tan(u), cu = 1.0 / tu;
    auto acos_checked = [](double x) {
        if (x > 1.0) {
            if (x - 1.0 > 1e-12) throw OutOfRange("arccos argument above 1");
            x = 1.0;
        }
        if (x < -1.0) {
            if (-1.0 - x > 1e-12) throw OutOfRange("arccos argument below -1");
            x = -1.0;
        }
        return std::acos(x) / std::numbers::pi;
    };
    const double a = (std::sinh(V - H) * tu - std::sinh(V + H) * cu) / (2 * std::cosh(H));
    const double b = (std::sinh(H - V) * tu - std::sinh(V + H) * cu) / (2 * std::cosh(V));
    return {acos_checked(a), acos_checked(b)};
}

// ---------------------------------------------------------------- tension bundles

struct SurfaceTension {
    std::string name;
    std::function<double(double, double)> value;
    std::function<Vec2(double, double)> grad;
    std::function<Mat2(double, double)> hess;
    std::function<bool(double, double)> inside;  // open slope domain
    double lo = 0, hi = 1;                       // bounding box of the slope domain
    bool symmetric = true;
};

inline SurfaceTension hex_tension() {
    SurfaceTension T;
    T.name = "hex";
    T.value = sigma_hex;
    T.grad = grad_sigma_hex;
    T.hess = hess_sigma_hex;
    T.inside = [](double s, double t) { return s > 0 && t > 0 && s + t < 1; };
    return T;
}

// sigma(s,t) = s H + t V - f(H,V) at (H,V) = grad sigma, f by quadrature of the FF curve
inline double sigma_ff(double s, double t, double u) {
    const Vec2 g = grad_sigma_ff(s, t, u);
    return s * g[0] + t * g[1] - free_energy(ff_curve(u), g[0], g[1]);
}

inline SurfaceTension ff_tension(double u) {
    if (!(u > 0 && u < std::numbers::pi / 2)) throw OutOfRange("FF needs 0 < u < pi/2");
    SurfaceTension T;
    T.name = "ff";
    T.value = [u](double s, double t) { return sigma_ff(s, t, u); };
    T.grad = [u](double s, double t) { return grad_sigma_ff(s, t, u); };
    T.hess = [u](double s, double t) { return hess_sigma_ff(s, t, u); };
    T.inside = [](double s, double t) { return s > 0 && s < 1 && t > 0 && t < 1; };
    return T;
}

// sigma = (a nu^2 + 2 b nu xi + c xi^2)/2
inline SurfaceTension quadratic_tension(double a, double b, double c) {
    if (!(a > 0 && a * c - b * b > 0)) throw OutOfRange("quadratic tension must be positive definite");
    SurfaceTension T;
    T.name = "quadratic";
    T.value = [=](double s, double t) { return 0.5 * (a * s * s + 2 * b * s * t + c * t * t); };
    T.grad = [=](double s, double t) { return Vec2(a * s + b * t, b * s + c * t); };
    T.hess = [=](double, double) {
        Mat2 M;
        M << a, b, b, c;
        return M;
    };
    T.inside = [](double, double) { return true; };
    T.lo = -std::numeric_limits<double>::infinity();
    T.hi = std::numeric_limits<double>::infinity();
    T.symmetric = (a == c);
    return T;
}

// ---------------------------------------------------------------- Legendre transforms

struct LegendreResult {
    double sigma;
    Vec2 HV;  // maximizer = grad sigma
    int iterations;
};

// sigma(s,t) = max_{H,V} sH + tV - f(H,V), damped Newton on the concave objective
inline LegendreResult legendre_sigma(const SpectralCurve& P, double s, double t, Vec2 start = Vec2::Zero(),
                                     double gtol = 1e-11, int max_iter = 60) {
    Vec2 x = start;
    auto obj = [&](const Vec2& y) { return s * y[0] + t * y[1] - free_energy(P, y[0], y[1]); };
    double fx = obj(x);
    for (int it = 0; it < max_iter; ++it) {
        const Vec2 g = Vec2(s, t) - grad_free_energy(P, x[0], x[1]);
        if (g.norm() < gtol) return {fx, x, it};
        Mat2 Hs = hess_free_energy(P, x[0], x[1]);
        Vec2 step = Hs.ldlt().solve(g);
        if (!step.allFinite() || g.dot(step) <= 0) step = g;
        // cap the step: the free energy is only piecewise smooth far out
        if (step.norm() > 2.0) step *= 2.0 / step.norm();
        double lam = 1.0;
        for (int ls = 0; ls < 40; ++ls) {
            const Vec2 y = x + lam * step;
            const double fy = obj(y);
            if (fy >= fx - 1e-15 * (1 + std::abs(fx))) {
                x = y;
                fx = fy;
                break;
            }
            lam *= 0.5;
            if (ls == 39) {
                const Vec2 g2 = Vec2(s, t) - grad_free_energy(P, x[0], x[1]);
                if (g2.norm() < 1e3 * gtol) return {fx, x, it};
                throw NonConvergence("Legendre line search failed");
            }
        }
    }
    const Vec2 g = Vec2(s, t) - grad_free_energy(P, x[0], x[1]);
    if (g.norm() < 1e3 * gtol) return {fx, x, max_iter};
    throw NonConvergence("Legendre transform did not converge");
}

// f(H,V) = max_{s,t} sH + tV - sigma(s,t), for the involution check; sigma given as a bundle
inline double legendre_conjugate(const SurfaceTension& T, double H, double V, Vec2 start, double gtol = 1e-12) {
    Vec2 x = start;
    for (int it = 0; it < 100; ++it) {
        const Vec2 g = Vec2(H, V) - T.grad(x[0], x[1]);
        if (g.norm() < gtol) return H * x[0] + V * x[1] - T.value(x[0], x[1]);
        Vec2 step = T.hess(x[0], x[1]).ldlt().solve(g);
        double lam = 1.0;
        while (!T.inside(x[0] + lam * step[0], x[1] + lam * step[1]) && lam > 1e-12) lam *= 0.5;
        x += lam * step;
    }
    throw NonConvergence("conjugate did not converge");
}

struct PartialLegendreResult {
    double tau = 0;  // NaN when the value was not requested
    double nu = 0;   // maximizer
    double t1 = 0, t2 = 0;
    double t11 = 0, t12 = 0, t22 = 0;
};

// tau(p, xi) = max_nu p nu - sigma(nu, xi)
inline PartialLegendreResult partial_legendre(const SurfaceTension& T, double p, double xi, bool want_value = true,
                                              double eps = 1e-6) {
    // bracket nu inside the slope domain at this xi
    double lo, hi;
    if (std::isfinite(T.lo)) {
        lo = T.lo;
        hi = T.hi;
        // shrink to the admissible interval for this xi
        const int n = 64;
        double a = std::numeric_limits<double>::quiet_NaN(), b = a;
        for (int k = 1; k < n; ++k) {
            const double nu = lo + (hi - lo) * k / n;
            if (T.inside(nu, xi)) {
                if (std::isnan(a)) a = nu;
                b = nu;
            }
        }
        if (std::isnan(a)) throw DomainBoundary("xi outside the slope domain");
        // extend to the true endpoints by bisection
        double x0 = lo, x1 = a;
        for (int i = 0; i < 60; ++i) {
            const double m = 0.5 * (x0 + x1);
            (T.inside(m, xi) ? x1 : x0) = m;
        }
        lo = x1 + eps;
        x0 = b;
        x1 = hi;
        for (int i = 0; i < 60; ++i) {
            const double m = 0.5 * (x0 + x1);
            (T.inside(m, xi) ? x0 : x1) = m;
        }
        hi = x0 - eps;
        if (T.grad(lo, xi)[0] > p || T.grad(hi, xi)[0] < p)
            throw Unbounded("p outside the range of d1 sigma on the eps-inset domain");
    } else {
        lo = -1.0;
        hi = 1.0;
        for (int i = 0; i < 200 && T.grad(lo, xi)[0] > p; ++i) lo *= 2;
        for (int i = 0; i < 200 && T.grad(hi, xi)[0] < p; ++i) hi *= 2;
    }
    // safeguarded Newton on d1 sigma(nu, xi) = p
    double nu = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double g = T.grad(nu, xi)[0] - p;
        if (g > 0) hi = nu;
        else lo = nu;
        const double h = T.hess(nu, xi)(0, 0);
        double next = nu - g / h;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - nu) < 1e-15 * (1 + std::abs(nu))) {
            nu = next;
            break;
        }
        nu = next;
        if (it == 199) throw NonConvergence("partial Legendre Newton");
    }
    PartialLegendreResult r;
    r.nu = nu;
    const Vec2 g = T.grad(nu, xi);
    const Mat2 Hs = T.hess(nu, xi);
    r.t1 = nu;
    r.t2 = -g[1];
    r.t11 = 1.0 / Hs(0, 0);
    r.t12 = -Hs(0, 1) / Hs(0, 0);
    r.t22 = -Hs.determinant() / Hs(0, 0);
    r.tau = want_value ? p * nu - T.value(nu, xi) : std::numeric_limits<double>::quiet_NaN();
    return r;
}

inline double hess_spectral_independence(double s, double t, const std::vector<double>& us) {
    double mx = 0;
    std::vector<double> dets;
    for (double u : us) dets.push_back(hess_sigma_ff(s, t, u).determinant());
    for (std::size_t i = 0; i < dets.size(); ++i)
        for (std::size_t j = i + 1; j < dets.size(); ++j) mx = std::max(mx, std::abs(dets[i] - dets[j]));
    return mx;
}

}  // namespace limitshape
