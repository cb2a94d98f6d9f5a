#pragma once
// Discrete limit-shape problem on the cylinder [0,T] x (R / L Z).
//
// Each grid cell is split into two triangles with exact (forward difference) gradients, so the
// discrete action is strictly convex up to additive constants. The x = 0 column is pinned to
// the integrated boundary slope with h(0,0) = 0, the x = T column to its profile up to one
// free constant.
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "tension.hpp"

namespace limitshape {

struct CylinderGrid {
    double T = 1, L = 1;
    int nx = 2, ny = 1;

    CylinderGrid() = default;
    CylinderGrid(double T_, double L_, int nx_, int ny_) : T(T_), L(L_), nx(nx_), ny(ny_) {
        if (!(T > 0 && L > 0) || nx < 3 || ny < 3) throw OutOfRange("cylinder grid too small");
    }
    double hx() const { return T / (nx - 1); }
    double hy() const { return L / ny; }
    double x(int i) const { return i * hx(); }
    double y(int j) const { return j * hy(); }
    int idx(int i, int j) const { return i * ny + j; }
};

// values h(i,j); going once around y adds mu (mu = L * mean slope in y)
struct HeightField {
    CylinderGrid grid;
    std::vector<double> h;
    double mu = 0;

    double at(int i, int j) const {
        const int ny = grid.ny;
        const int k = ((j % ny) + ny) % ny;
        return h[grid.idx(i, k)] + mu * ((j - k) / ny);
    }
    double dxf(int i, int j) const { return (at(i + 1, j) - at(i, j)) / grid.hx(); }
    double dyf(int i, int j) const { return (at(i, j + 1) - at(i, j)) / grid.hy(); }
};

struct BoundaryData {
    std::function<double(double)> t_left, t_right;  // periodic profiles of d_y h at x = 0 and x = T
};

inline bool inside_eps(const SurfaceTension& S, double s, double t, double eps) {
    return S.inside(s, t) && S.inside(s - eps, t) && S.inside(s + eps, t) && S.inside(s, t - eps) &&
           S.inside(s, t + eps) && S.inside(s + eps, t + eps) && S.inside(s - eps, t - eps);
}

// admissible nu-interval of the slope domain at fixed xi
inline std::pair<double, double> admissible_interval(const SurfaceTension& S, double xi) {
    if (!std::isfinite(S.lo)) return {-1e6, 1e6};
    double a = std::numeric_limits<double>::quiet_NaN(), b = a;
    const int n = 256;
    for (int k = 1; k < n; ++k) {
        const double nu = S.lo + (S.hi - S.lo) * k / n;
        if (S.inside(nu, xi)) {
            if (std::isnan(a)) a = nu;
            b = nu;
        }
    }
    if (std::isnan(a)) throw DomainBoundary("no admissible slope at this xi");
    double x0 = S.lo, x1 = a;
    for (int i = 0; i < 60; ++i) {
        const double m = 0.5 * (x0 + x1);
        (S.inside(m, xi) ? x1 : x0) = m;
    }
    const double lo = x1;
    x0 = b;
    x1 = S.hi;
    for (int i = 0; i < 60; ++i) {
        const double m = 0.5 * (x0 + x1);
        (S.inside(m, xi) ? x0 : x1) = m;
    }
    return {lo, x0};
}

namespace detail {

// triangles of cell (i,j): s = (h[sp]-h[sm])/hx, t = (h[tp]-h[tm])/hy, with y-wrap offsets
struct Tri {
    int sp_i, sp_j, sm_i, sm_j, tp_i, tp_j, tm_i, tm_j;
};

inline std::array<Tri, 2> cell_triangles(int i, int j) {
    return {Tri{i + 1, j, i, j, i, j + 1, i, j}, Tri{i + 1, j + 1, i, j + 1, i + 1, j + 1, i + 1, j}};
}

inline double tri_s(const HeightField& f, const Tri& t) {
    return (f.at(t.sp_i, t.sp_j) - f.at(t.sm_i, t.sm_j)) / f.grid.hx();
}
inline double tri_t(const HeightField& f, const Tri& t) {
    return (f.at(t.tp_i, t.tp_j) - f.at(t.tm_i, t.tm_j)) / f.grid.hy();
}

inline double integrate_periodic(const std::function<double(double)>& f, double a, double b) {
    if (b <= a) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 6, 1e-12);
}

}  // namespace detail

// P1 discretization of  int int sigma(h_x, h_y) + V h_x  dx dy
inline double action(const HeightField& f, const SurfaceTension& S, double V, double eps = 1e-6) {
    const auto& g = f.grid;
    const double area = 0.5 * g.hx() * g.hy();
    double A = 0;
    for (int i = 0; i + 1 < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (const auto& tr : detail::cell_triangles(i, j)) {
                const double s = detail::tri_s(f, tr), t = detail::tri_t(f, tr);
                if (!inside_eps(S, s, t, eps)) throw SlopeOutOfDomain("slope outside the eps-inset domain");
                A += area * (S.value(s, t) + V * s);
            }
    return A;
}

inline bool feasible(const HeightField& f, const SurfaceTension& S, double eps) {
    const auto& g = f.grid;
    for (int i = 0; i + 1 < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (const auto& tr : detail::cell_triangles(i, j))
                if (!inside_eps(S, detail::tri_s(f, tr), detail::tri_t(f, tr), eps)) return false;
    return true;
}

struct SolveOptions {
    double tol = 1e-12;   // on max |gradient| / cell area
    int max_iter = 100;
    double eps = 1e-6;
    bool record_actions = true;
};

struct SolveResult {
    HeightField field;
    bool converged = false;
    int iterations = 0;
    double grad_norm = 0;
    std::vector<double> actions;
    bool all_iterates_feasible = true;
    std::string message;
};

// boundary columns from the slope profiles; mean slopes must agree
struct BoundaryColumns {
    std::vector<double> left, right;
    double mu = 0;
};

inline BoundaryColumns boundary_columns(const CylinderGrid& g, const BoundaryData& bd) {
    BoundaryColumns bc;
    bc.left.resize(g.ny);
    bc.right.resize(g.ny);
    double accl = 0, accr = 0;
    for (int j = 0; j < g.ny; ++j) {
        bc.left[j] = accl;
        bc.right[j] = accr;
        accl += detail::integrate_periodic(bd.t_left, g.y(j), g.y(j) + g.hy());
        accr += detail::integrate_periodic(bd.t_right, g.y(j), g.y(j) + g.hy());
    }
    if (std::abs(accl - accr) > 1e-10 * std::max(1.0, std::abs(accl)))
        throw Inconsistent("boundary profiles have different monodromy");
    bc.mu = accl;
    return bc;
}

inline HeightField initial_field(const CylinderGrid& g, const BoundaryColumns& bc, const SurfaceTension& S,
                                 double s0 = std::numeric_limits<double>::quiet_NaN()) {
    HeightField f{g, std::vector<double>(std::size_t(g.nx) * g.ny, 0.0), bc.mu};
    if (std::isnan(s0)) {
        auto [lo, hi] = admissible_interval(S, bc.mu / g.L);
        s0 = 0.5 * (lo + hi);
    }
    double dmean = 0;
    for (int j = 0; j < g.ny; ++j) dmean += (bc.right[j] - bc.left[j]) / g.ny;
    const double c = s0 * g.T - dmean;
    for (int i = 0; i < g.nx; ++i) {
        const double lam = double(i) / (g.nx - 1);
        for (int j = 0; j < g.ny; ++j) f.h[g.idx(i, j)] = (1 - lam) * bc.left[j] + lam * (bc.right[j] + c);
    }
    return f;
}

// Newton with feasibility-preserving backtracking. Unknowns: interior nodes and the right-column shift.
inline SolveResult minimize_action(const CylinderGrid& g, const SurfaceTension& S, const BoundaryData& bd, double V,
                                   const SolveOptions& opt = {}, const HeightField* start = nullptr) {
    const BoundaryColumns bc = boundary_columns(g, bd);
    HeightField f = start ? *start : initial_field(g, bc, S);
    f.mu = bc.mu;
    // re-impose the boundary columns on a supplied start, keeping its right-column shift
    {
        double shift = 0;
        for (int j = 0; j < g.ny; ++j) shift += (f.h[g.idx(g.nx - 1, j)] - bc.right[j]) / g.ny;
        for (int j = 0; j < g.ny; ++j) {
            f.h[g.idx(0, j)] = bc.left[j];
            f.h[g.idx(g.nx - 1, j)] = bc.right[j] + shift;
        }
    }
    SolveResult res;
    if (!feasible(f, S, opt.eps)) throw SlopeOutOfDomain("starting field is not feasible");

    const int nint = (g.nx - 2) * g.ny;
    const int n = nint + 1;
    auto unknown = [&](int i) -> int {
        // -1 fixed; -2 right column (maps to the shift)
        if (i == 0) return -1;
        if (i == g.nx - 1) return -2;
        return 0;
    };
    auto uidx = [&](int i, int j) -> int {
        const int u = unknown(i);
        if (u == -1) return -1;
        if (u == -2) return nint;
        return (i - 1) * g.ny + ((j % g.ny) + g.ny) % g.ny;
    };
    const double hx = g.hx(), hy = g.hy(), area = 0.5 * hx * hy;

    auto assemble = [&](const HeightField& F, Eigen::VectorXd& grad, Eigen::SparseMatrix<double>* Hm) {
        grad.setZero(n);
        std::vector<Eigen::Triplet<double>> trip;
        if (Hm) trip.reserve(std::size_t(g.nx) * g.ny * 2 * 16);
        for (int i = 0; i + 1 < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                for (const auto& tr : detail::cell_triangles(i, j)) {
                    const double s = detail::tri_s(F, tr), t = detail::tri_t(F, tr);
                    const Vec2 gs = S.grad(s, t);
                    const int k[4] = {uidx(tr.sp_i, tr.sp_j), uidx(tr.sm_i, tr.sm_j), uidx(tr.tp_i, tr.tp_j),
                                      uidx(tr.tm_i, tr.tm_j)};
                    const double ds[4] = {1 / hx, -1 / hx, 0, 0};
                    const double dt[4] = {0, 0, 1 / hy, -1 / hy};
                    for (int a = 0; a < 4; ++a)
                        if (k[a] >= 0) grad[k[a]] += area * ((gs[0] + V) * ds[a] + gs[1] * dt[a]);
                    if (Hm) {
                        const Mat2 Hs = S.hess(s, t);
                        for (int a = 0; a < 4; ++a) {
                            if (k[a] < 0) continue;
                            for (int b = 0; b < 4; ++b) {
                                if (k[b] < 0) continue;
                                const double v = area * (Hs(0, 0) * ds[a] * ds[b] + Hs(0, 1) * (ds[a] * dt[b] + dt[a] * ds[b]) +
                                                         Hs(1, 1) * dt[a] * dt[b]);
                                if (v != 0.0) trip.emplace_back(k[a], k[b], v);
                            }
                        }
                    }
                }
        if (Hm) {
            Hm->resize(n, n);
            Hm->setFromTriplets(trip.begin(), trip.end());
        }
    };
    auto apply_step = [&](const HeightField& F, const Eigen::VectorXd& d, double lam) {
        HeightField G = F;
        for (int i = 1; i + 1 < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) G.h[g.idx(i, j)] += lam * d[(i - 1) * g.ny + j];
        for (int j = 0; j < g.ny; ++j) G.h[g.idx(g.nx - 1, j)] += lam * d[nint];
        return G;
    };

    double A = action(f, S, V, opt.eps);
    if (opt.record_actions) res.actions.push_back(A);
    Eigen::VectorXd grad;
    Eigen::SparseMatrix<double> Hm;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool analyzed = false;
    for (int it = 0; it < opt.max_iter; ++it) {
        assemble(f, grad, &Hm);
        res.grad_norm = grad.cwiseAbs().maxCoeff() / (hx * hy);
        res.iterations = it;
        if (res.grad_norm <= opt.tol) {
            res.converged = true;
            break;
        }
        if (!analyzed) {
            ldlt.analyzePattern(Hm);
            analyzed = true;
        }
        ldlt.factorize(Hm);
        if (ldlt.info() != Eigen::Success) {
            res.message = "Hessian factorization failed";
            break;
        }
        const Eigen::VectorXd d = ldlt.solve(-grad);
        double lam = 1.0;
        bool moved = false;
        // below this decrement the action change is lost in round-off; the Newton step is then taken as is
        const bool tiny = -grad.dot(d) < 1e-13 * (1 + std::abs(A));
        for (int ls = 0; ls < 60; ++ls, lam *= 0.5) {
            HeightField G = apply_step(f, d, lam);
            if (!feasible(G, S, opt.eps)) continue;
            const double AG = action(G, S, V, opt.eps);
            if (tiny || AG <= A + 1e-4 * lam * grad.dot(d)) {
                f = std::move(G);
                A = AG;
                moved = true;
                break;
            }
        }
        if (opt.record_actions) res.actions.push_back(A);
        if (!moved) {
            // at round-off level no descent is measurable; accept if the Newton step is negligible
            if (d.cwiseAbs().maxCoeff() < 1e-12) {
                res.converged = true;
            } else {
                res.message = "line search failed";
            }
            break;
        }
        if (d.cwiseAbs().maxCoeff() < 1e-14) {
            assemble(f, grad, nullptr);
            res.grad_norm = grad.cwiseAbs().maxCoeff() / (hx * hy);
            res.converged = true;
            res.iterations = it + 1;
            break;
        }
    }
    if (!res.converged && res.message.empty()) res.message = "iteration cap reached";
    res.field = std::move(f);
    return res;
}

// ---------------------------------------------------------------- residuals

struct ResidualField {
    int nx = 0, ny = 0;          // residual defined on interior columns i = 1..nx-2
    std::vector<double> values;  // index i*ny + j; zero on the boundary columns
    double max_interior(int margin = 1) const {
        double m = 0;
        for (int i = margin; i < nx - margin; ++i)
            for (int j = 0; j < ny; ++j) m = std::max(m, std::abs(values[std::size_t(i) * ny + j]));
        return m;
    }
};

struct CentralDerivs {
    double s, t, hxx, hxy, hyy;
};

inline CentralDerivs central(const HeightField& f, int i, int j) {
    const double hx = f.grid.hx(), hy = f.grid.hy();
    CentralDerivs d;
    d.s = (f.at(i + 1, j) - f.at(i - 1, j)) / (2 * hx);
    d.t = (f.at(i, j + 1) - f.at(i, j - 1)) / (2 * hy);
    d.hxx = (f.at(i + 1, j) - 2 * f.at(i, j) + f.at(i - 1, j)) / (hx * hx);
    d.hyy = (f.at(i, j + 1) - 2 * f.at(i, j) + f.at(i, j - 1)) / (hy * hy);
    d.hxy = (f.at(i + 1, j + 1) - f.at(i + 1, j - 1) - f.at(i - 1, j + 1) + f.at(i - 1, j - 1)) / (4 * hx * hy);
    return d;
}

template <class Pointwise>
ResidualField residual_field(const HeightField& f, Pointwise&& fn) {
    ResidualField r{f.grid.nx, f.grid.ny, std::vector<double>(std::size_t(f.grid.nx) * f.grid.ny, 0.0)};
    for (int i = 1; i + 1 < f.grid.nx; ++i)
        for (int j = 0; j < f.grid.ny; ++j) r.values[std::size_t(i) * f.grid.ny + j] = fn(central(f, i, j));
    return r;
}

// sigma_11 h_xx + 2 sigma_12 h_xy + sigma_22 h_yy
inline double el_pointwise(const SurfaceTension& S, const CentralDerivs& d) {
    if (!S.inside(d.s, d.t)) throw SlopeOutOfDomain("slope outside the domain in residual");
    const Mat2 H = S.hess(d.s, d.t);
    return H(0, 0) * d.hxx + 2 * H(0, 1) * d.hxy + H(1, 1) * d.hyy;
}

inline ResidualField el_residual(const HeightField& f, const SurfaceTension& S) {
    return residual_field(f, [&](const CentralDerivs& d) { return el_pointwise(S, d); });
}

// the hexagonal form: sin(pi t)/sin(pi s) h_xx - 2 cos(pi(s+t)) h_xy + sin(pi s)/sin(pi t) h_yy
inline double hex_el_pointwise(const CentralDerivs& d) {
    constexpr double pi = std::numbers::pi;
    if (!(d.s > 0 && d.t > 0 && d.s + d.t < 1)) throw SlopeOutOfDomain("hex residual outside the triangle");
    return std::sin(pi * d.t) / std::sin(pi * d.s) * d.hxx - 2 * std::cos(pi * (d.s + d.t)) * d.hxy +
           std::sin(pi * d.s) / std::sin(pi * d.t) * d.hyy;
}

// free-fermion three-term form; defined for u in (0, pi/2]
inline double ff_el_pointwise(const CentralDerivs& d, double u) {
    constexpr double pi = std::numbers::pi;
    if (!(d.s > 0 && d.s < 1 && d.t > 0 && d.t < 1)) throw SlopeOutOfDomain("FF residual outside (0,1)^2");
    const double ps = pi * d.s, pt = pi * d.t;
    return std::sin(pt) / std::sin(ps) * d.hxx -
           2 * (std::cos(ps) * std::cos(pt) + std::cos(2 * u) * std::sin(ps) * std::sin(pt)) * d.hxy +
           std::sin(ps) / std::sin(pt) * d.hyy;
}

inline ResidualField hex_el_residual(const HeightField& f) { return residual_field(f, hex_el_pointwise); }
inline ResidualField ff_el_residual(const HeightField& f, double u) {
    return residual_field(f, [u](const CentralDerivs& d) { return ff_el_pointwise(d, u); });
}

// positive factors relating the printed forms to the generic residual
inline double hex_form_factor(double s, double t) { return std::sin(std::numbers::pi * (s + t)) / std::numbers::pi; }
inline double ff_form_factor(double s, double t, double u) {
    constexpr double pi = std::numbers::pi;
    const double ps = pi * s, pt = pi * t;
    const double N = std::sin(pt) * std::cos(ps) - std::cos(2 * u) * std::cos(pt) * std::sin(ps);
    const double R = std::sin(2 * u) * std::sin(2 * u) * std::sin(ps) * std::sin(ps) + N * N;
    return std::sqrt(R) / pi;
}

// nodes touching a triangle whose slope lies within tol of the eps-inset boundary
inline std::vector<char> facet_mask(const HeightField& f, const SurfaceTension& S, double eps = 1e-6,
                                    double tol = 1e-6) {
    const auto& g = f.grid;
    std::vector<char> m(std::size_t(g.nx) * g.ny, 0);
    for (int i = 0; i + 1 < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (const auto& tr : detail::cell_triangles(i, j)) {
                if (inside_eps(S, detail::tri_s(f, tr), detail::tri_t(f, tr), eps + tol)) continue;
                m[g.idx(i, j)] = m[g.idx(i + 1, j)] = 1;
                m[g.idx(i, (j + 1) % g.ny)] = m[g.idx(i + 1, (j + 1) % g.ny)] = 1;
            }
    return m;
}

// EL residual decay under halving h. The max is taken over nodes at distance >= T/8 from
// both ends (the columns next to the pinned ends carry a slower boundary layer) and off facets.
struct MeshStudy {
    std::vector<int> n;
    std::vector<double> residuals, orders;
    std::vector<bool> converged;
};

inline MeshStudy mesh_study(const SurfaceTension& S, const BoundaryData& bd, double V, double T, double L,
                            const std::vector<int>& ns, const SolveOptions& opt = {}) {
    MeshStudy ms;
    for (int n : ns) {
        const CylinderGrid g(T, L, n + 1, n);
        const auto r = minimize_action(g, S, bd, V, opt);
        const auto R = el_residual(r.field, S);
        const auto facets = facet_mask(r.field, S, opt.eps);
        const int margin = std::max(1, n / 8);
        double mx = 0;
        for (int i = margin; i <= g.nx - 1 - margin; ++i)
            for (int j = 0; j < g.ny; ++j)
                if (!facets[g.idx(i, j)]) mx = std::max(mx, std::abs(R.values[std::size_t(i) * g.ny + j]));
        ms.n.push_back(n);
        ms.residuals.push_back(mx);
        ms.converged.push_back(r.converged);
    }
    for (std::size_t k = 1; k < ms.residuals.size(); ++k)
        ms.orders.push_back(std::log2(ms.residuals[k - 1] / ms.residuals[k]));
    return ms;
}

// affine field s0 x + t0 y
inline HeightField affine_field(const CylinderGrid& g, double s0, double t0) {
    HeightField f{g, std::vector<double>(std::size_t(g.nx) * g.ny), t0 * g.L};
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) f.h[g.idx(i, j)] = s0 * g.x(i) + t0 * g.y(j);
    return f;
}

}  // namespace limitshape
