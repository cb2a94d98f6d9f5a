#pragma once
// Finite-size 6-vertex model: weights, R-matrices, transfer matrices,
// partition functions, enumeration oracle and height functions.
//
// Orientation: paths run W->E and N->S. A vertex takes (W,N) to (E,S);
// in the tensor basis the first factor is the horizontal edge.
#include <Eigen/Dense>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <vector>

#include "errors.hpp"

namespace limitshape {

struct VertexWeights {
    double a = 1, b = 1, c = 1;
    double H = 0, V = 0;

    VertexWeights() = default;
    VertexWeights(double a_, double b_, double c_, double H_ = 0, double V_ = 0)
        : a(a_), b(b_), c(c_), H(H_), V(V_) {
        if (!(a > 0 && b > 0 && c > 0) || !std::isfinite(a) || !std::isfinite(b) ||
            !std::isfinite(c) || !std::isfinite(H) || !std::isfinite(V))
            throw OutOfRange("vertex weights must be positive and finite");
    }
};

inline double anisotropy_delta(const VertexWeights& w) {
    return (w.a * w.a + w.b * w.b - w.c * w.c) / (2 * w.a * w.b);
}

enum class Regime { A1, A2, B1, B2, C };

struct BaxterParam {
    Regime regime;
    double u;
    double gamma;
    double r = 1.0;
};

// unchecked (a,b,c) formulas, analytic in u
inline std::array<double, 3> baxter_abc(Regime reg, double u, double g, double r = 1.0) {
    switch (reg) {
        case Regime::A1: return {r * std::sinh(u + g), r * std::sinh(u), r * std::sinh(g)};
        case Regime::A2: return {r * std::sinh(u - g), r * std::sinh(u), r * std::sinh(g)};
        case Regime::B1: return {r * std::sin(u - g), r * std::sin(u), r * std::sin(g)};
        case Regime::B2: return {r * std::sin(g - u), r * std::sin(u), r * std::sin(g)};
        case Regime::C: return {r * std::sinh(g - u), r * std::sinh(u), r * std::sinh(g)};
    }
    return {0, 0, 0};
}

inline bool baxter_in_window(const BaxterParam& p) {
    constexpr double hp = std::numbers::pi / 2;
    const double u = p.u, g = p.gamma;
    if (!(p.r > 0)) return false;
    switch (p.regime) {
        case Regime::A1: return g > 0 && u > 0;
        case Regime::A2: return g > 0 && g < u;
        case Regime::B1: return g > 0 && g < hp && u > g && u < hp;
        case Regime::B2: return g > 0 && g < hp && u > 0 && u < g;
        case Regime::C: return u > 0 && u < g;
    }
    return false;
}

inline VertexWeights weights_from_baxter(const BaxterParam& p) {
    if (!baxter_in_window(p)) throw OutOfRange("Baxter parameters outside the regime window");
    auto [a, b, c] = baxter_abc(p.regime, p.u, p.gamma, p.r);
    return VertexWeights(a, b, c);
}

// Delta as stated for each regime, with the sign actually produced by the formulas
inline double regime_delta(Regime reg, double g) {
    switch (reg) {
        case Regime::A1:
        case Regime::A2: return std::cosh(g);
        case Regime::B1: return std::cos(g);
        case Regime::B2: return -std::cos(g);
        case Regime::C: return -std::cosh(g);
    }
    return 0;
}

using Mat4 = Eigen::Matrix4d;
using Mat8 = Eigen::Matrix<double, 8, 8>;

inline Mat4 r_matrix_abc(double a, double b, double c, double H = 0, double V = 0) {
    Mat4 R = Mat4::Zero();
    R(0, 0) = a * std::exp(H + V);
    R(1, 1) = b * std::exp(H - V);
    R(1, 2) = c;
    R(2, 1) = c;
    R(2, 2) = b * std::exp(V - H);
    R(3, 3) = a * std::exp(-H - V);
    return R;
}

inline Mat4 r_matrix(const VertexWeights& w) { return r_matrix_abc(w.a, w.b, w.c, w.H, w.V); }

inline Eigen::Matrix2d field_diag(double F) {
    Eigen::Matrix2d D = Eigen::Matrix2d::Zero();
    D(0, 0) = std::exp(F / 2);
    D(1, 1) = std::exp(-F / 2);
    return D;
}

inline Mat4 kron2(const Eigen::Matrix2d& A, const Eigen::Matrix2d& B) {
    Mat4 K;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) K(2 * i + k, 2 * j + l) = A(i, j) * B(k, l);
    return K;
}

// place a two-site operator on tensor factors (i,j) of C^2 x C^2 x C^2
inline Mat8 embed3(const Mat4& R, int i, int j) {
    Mat8 out = Mat8::Zero();
    const int k = 3 - i - j;
    auto bit = [](int x, int pos) { return (x >> (2 - pos)) & 1; };
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y) {
            if (bit(x, k) != bit(y, k)) continue;
            out(x, y) = R(2 * bit(x, i) + bit(x, j), 2 * bit(y, i) + bit(y, j));
        }
    return out;
}

// For A2 and B1 the middle factor needs the sigma_z gauge c -> -c
inline bool ybe_needs_gauge(Regime reg) { return reg == Regime::A2 || reg == Regime::B1; }

inline double yang_baxter_residual_mixed(Regime reg, double u, double v, double g1, double g13,
                                         double g2, bool gauge) {
    auto R = [&](double s, double g, bool flip) {
        auto [a, b, c] = baxter_abc(reg, s, g);
        return r_matrix_abc(a, b, flip ? -c : c);
    };
    const Mat8 R12 = embed3(R(u, g1, false), 0, 1);
    const Mat8 R13 = embed3(R(u + v, g13, gauge), 0, 2);
    const Mat8 R23 = embed3(R(v, g2, false), 1, 2);
    return (R12 * R13 * R23 - R23 * R13 * R12).cwiseAbs().maxCoeff();
}

inline double yang_baxter_residual(double u, double v, Regime reg, double gamma) {
    return yang_baxter_residual_mixed(reg, u, v, gamma, gamma, gamma, ybe_needs_gauge(reg));
}

// ---------------------------------------------------------------- transfer

using BoundaryWord = std::vector<int>;

inline int magnetization(std::uint32_t eta, int N) {
    const int occ = std::popcount(eta);
    return occ - (N - occ);
}

inline std::uint32_t word_to_index(const BoundaryWord& w) {
    std::uint32_t x = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i]) x |= (1u << i);
    return x;
}

class TransferOperator {
public:
    static constexpr int dense_cap = 12;

    TransferOperator(int N, const VertexWeights& w, bool dense = true) : N_(N), w_(w), R_(r_matrix(w)) {
        if (N < 1) throw OutOfRange("N must be positive");
        if (N > 24) throw TooLarge("N too large even for matrix-free use");
        if (dense) {
            if (N > dense_cap) throw TooLarge("dense transfer matrix requested above N = 12");
            const std::size_t d = std::size_t(1) << N;
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(d, d);
            for (std::uint32_t eta = 0; eta < d; ++eta)
                for_each_entry(eta, [&](std::uint32_t out, double val) { T(out, eta) += val; });
            dense_ = std::move(T);
        }
    }

    int n_rows() const { return N_; }
    std::size_t dim() const { return std::size_t(1) << N_; }
    const VertexWeights& weights() const { return w_; }
    bool has_dense() const { return dense_.has_value(); }
    const Eigen::MatrixXd& matrix() const {
        if (!dense_) throw TooLarge("no dense representation");
        return *dense_;
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
        if (std::size_t(v.size()) != dim()) throw DimensionMismatch("vector size");
        if (dense_) return (*dense_) * v;
        Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
        for (std::uint32_t eta = 0; eta < dim(); ++eta) {
            if (v[eta] == 0.0) continue;
            for_each_entry(eta, [&](std::uint32_t o, double val) { out[o] += val * v[eta]; });
        }
        return out;
    }

    // visits nonzero t[out, eta]; the auxiliary line enters at row N-1 and leaves at row 0
    template <class Fn>
    void for_each_entry(std::uint32_t eta, Fn&& fn) const {
        for (int top = 0; top < 2; ++top) walk(eta, N_ - 1, top, top, 0u, 1.0, fn);
    }

private:
    template <class Fn>
    void walk(std::uint32_t eta, int row, int aux, int top, std::uint32_t out, double wt, Fn& fn) const {
        if (row < 0) {
            if (aux == top) fn(out, wt);
            return;
        }
        const int h = (eta >> row) & 1;
        const int in = 2 * h + aux;
        for (int e = 0; e < 2; ++e)
            for (int s = 0; s < 2; ++s) {
                const double r = R_(2 * e + s, in);
                if (r == 0.0) continue;
                walk(eta, row - 1, s, top, out | (std::uint32_t(e) << row), wt * r, fn);
            }
    }

    int N_;
    VertexWeights w_;
    Mat4 R_;
    std::optional<Eigen::MatrixXd> dense_;
};

inline TransferOperator transfer(int N, const VertexWeights& w) { return TransferOperator(N, w, true); }

inline std::vector<std::vector<std::uint32_t>> magnetization_sectors(int N) {
    std::vector<std::vector<std::uint32_t>> s(N + 1);
    for (std::uint32_t x = 0; x < (1u << N); ++x) s[std::popcount(x)].push_back(x);
    return s;
}

inline Eigen::MatrixXd sector_block(const Eigen::MatrixXd& T, const std::vector<std::uint32_t>& idx) {
    const int n = int(idx.size());
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B(i, j) = T(idx[i], idx[j]);
    return B;
}

// max |t1 t2 - t2 t1| / max |t1 t2|, sector by sector
inline double commutator_residual(const TransferOperator& t1, const TransferOperator& t2) {
    if (t1.n_rows() != t2.n_rows()) throw DimensionMismatch("transfer operators of different N");
    double num = 0, den = 0;
    for (const auto& idx : magnetization_sectors(t1.n_rows())) {
        const Eigen::MatrixXd A = sector_block(t1.matrix(), idx);
        const Eigen::MatrixXd B = sector_block(t2.matrix(), idx);
        const Eigen::MatrixXd AB = A * B;
        num = std::max(num, (AB - B * A).cwiseAbs().maxCoeff());
        den = std::max(den, AB.cwiseAbs().maxCoeff());
    }
    return num / std::max(den, 1e-300);
}

// (psi_eta1, t^M psi_eta2): eta2 enters on the west side, eta1 leaves on the east
inline double cylinder_partition(int M, int N, const VertexWeights& w, const BoundaryWord& eta1,
                                 const BoundaryWord& eta2) {
    if (M < 1) throw OutOfRange("M must be positive");
    if (int(eta1.size()) != N || int(eta2.size()) != N) throw DimensionMismatch("boundary word length");
    const std::uint32_t i1 = word_to_index(eta1), i2 = word_to_index(eta2);
    if (std::popcount(i1) != std::popcount(i2)) return 0.0;
    const TransferOperator t(N, w, N <= TransferOperator::dense_cap);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(t.dim());
    v[i2] = 1.0;
    for (int k = 0; k < M; ++k) v = t.apply(v);
    return v[i1];
}

inline double torus_partition(int M, int N, const VertexWeights& w) {
    if (M < 1) throw OutOfRange("M must be positive");
    const TransferOperator t(N, w, true);
    double z = 0;
    for (const auto& idx : magnetization_sectors(N)) {
        const Eigen::MatrixXd B = sector_block(t.matrix(), idx);
        Eigen::MatrixXd P = Eigen::MatrixXd::Identity(B.rows(), B.cols());
        for (int k = 0; k < M; ++k) P = P * B;
        z += P.trace();
    }
    return z;
}

// ---------------------------------------------------------------- enumeration oracle

// vertex = edge ids (W, N, E, S); fixed[e] = -1 free, else 0/1
struct IceDomain {
    int n_edges = 0;
    std::vector<std::array<int, 4>> vertices;
    std::vector<int> fixed;
};

// six admissible local configurations, indexed w1..w6 (0-based):
// empty, full, horizontal line (W->E), vertical line (N->S), turn W->S, turn N->E
inline int vertex_type(int W, int N, int E, int S) {
    if (W + N != E + S) return -1;
    if (!W && !N) return 0;
    if (W && N) return 1;
    if (W && E) return 2;
    if (N && S) return 3;
    if (W && S) return 4;
    return 5;
}

inline std::array<double, 6> six_weights(const VertexWeights& w) {
    const Mat4 R = r_matrix(w);
    return {R(0, 0), R(3, 3), R(2, 2), R(1, 1), R(1, 2), R(2, 1)};
}

inline double state_weight(const IceDomain& d, const std::vector<int>& state, const VertexWeights& w) {
    const auto ws = six_weights(w);
    double prod = 1.0;
    for (const auto& v : d.vertices) {
        const int t = vertex_type(state[v[0]], state[v[1]], state[v[2]], state[v[3]]);
        if (t < 0) return 0.0;
        prod *= ws[t];
    }
    return prod;
}

inline std::vector<std::vector<int>> enumerate_states(const IceDomain& d) {
    if (d.n_edges > 36) throw TooLarge("enumeration capped at 36 edges");
    // a vertex is checked once its last edge (in edge order) is assigned
    std::vector<std::vector<int>> ready(d.n_edges);
    for (std::size_t k = 0; k < d.vertices.size(); ++k) {
        int mx = -1;
        for (int e : d.vertices[k]) mx = std::max(mx, e);
        if (mx >= 0) ready[mx].push_back(int(k));
    }
    std::vector<std::vector<int>> out;
    std::vector<int> st(d.n_edges, 0);
    std::function<void(int)> rec = [&](int e) {
        if (e == d.n_edges) {
            out.push_back(st);
            return;
        }
        for (int val = 0; val < 2; ++val) {
            if (d.fixed.size() && d.fixed[e] >= 0 && d.fixed[e] != val) continue;
            st[e] = val;
            bool ok = true;
            for (int k : ready[e]) {
                const auto& v = d.vertices[k];
                if (vertex_type(st[v[0]], st[v[1]], st[v[2]], st[v[3]]) < 0) {
                    ok = false;
                    break;
                }
            }
            if (ok) rec(e + 1);
        }
        st[e] = 0;
    };
    rec(0);
    return out;
}

inline double enumerated_partition(const IceDomain& d, const VertexWeights& w) {
    double z = 0;
    for (const auto& s : enumerate_states(d)) z += state_weight(d, s, w);
    return z;
}

// M columns, N rows. Horizontal edge (i,j): west of vertex (i,j), i = 0..M.
// Vertical edge (i,j): south of vertex (i,j), j = 0..N; periodic_y identifies j=N with j=0.
struct LatticeGrid {
    int M = 0, N = 0;
    bool periodic_x = false, periodic_y = false;

    int n_hcols() const { return periodic_x ? M : M + 1; }
    int n_vrows() const { return periodic_y ? N : N + 1; }
    int n_horizontal() const { return n_hcols() * N; }
    int n_edges() const { return n_horizontal() + M * n_vrows(); }
    int hedge(int i, int j) const {
        if (periodic_x) i = ((i % M) + M) % M;
        return i * N + j;
    }
    int vedge(int i, int j) const {
        if (periodic_y) j = ((j % N) + N) % N;
        return n_horizontal() + i * n_vrows() + j;
    }
};

inline IceDomain ice_domain(const LatticeGrid& g) {
    IceDomain d;
    d.n_edges = g.n_edges();
    d.fixed.assign(d.n_edges, -1);
    // column-major vertex order keeps edge ids local for pruning
    for (int i = 0; i < g.M; ++i)
        for (int j = 0; j < g.N; ++j)
            d.vertices.push_back({g.hedge(i, j), g.vedge(i, j + 1), g.hedge(i + 1, j), g.vedge(i, j)});
    return d;
}

inline IceDomain ice_block(int M, int N) { return ice_domain(LatticeGrid{M, N, false, false}); }
inline IceDomain ice_torus(int M, int N) { return ice_domain(LatticeGrid{M, N, true, true}); }

// west boundary eta_in, east boundary eta_out
inline IceDomain ice_cylinder(int M, int N, const BoundaryWord& eta_out, const BoundaryWord& eta_in) {
    const LatticeGrid g{M, N, false, true};
    IceDomain d = ice_domain(g);
    for (int j = 0; j < N; ++j) {
        d.fixed[g.hedge(0, j)] = eta_in[j];
        d.fixed[g.hedge(M, j)] = eta_out[j];
    }
    return d;
}

// ---------------------------------------------------------------- heights

// faces (p,q), p = 0..M, q = 0..N; face (p,q) has horizontal edge (p,q-1) below it
// and vertical edge (p-1,q) to its left. For periodic_y, row q = N is the sheet above row 0.
struct LatticeHeight {
    int M = 0, N = 0;
    bool periodic_y = false;
    std::vector<double> values;  // (M+1)*(N+1), index p*(N+1)+q
    double& at(int p, int q) { return values[std::size_t(p) * (N + 1) + q]; }
    double at(int p, int q) const { return values[std::size_t(p) * (N + 1) + q]; }
};

inline double edge_step(int occ) { return occ ? 0.5 : -0.5; }

// heights for a state on a block or cylinder (periodic_x not allowed)
inline LatticeHeight state_to_height(const LatticeGrid& g, const std::vector<int>& st, int ref_p = 0,
                                     int ref_q = 0, double ref_value = 0.0) {
    if (g.periodic_x) throw OutOfRange("heights need a simply connected domain or a cylinder cut");
    LatticeHeight h{g.M, g.N, g.periodic_y, std::vector<double>(std::size_t(g.M + 1) * (g.N + 1), 0.0)};
    // walk up the first column then rightwards along rows
    std::vector<double> col0(g.N + 1, 0.0);
    for (int q = 1; q <= g.N; ++q) col0[q] = col0[q - 1] + edge_step(st[g.hedge(0, q - 1)]);
    for (int q = 0; q <= g.N; ++q) {
        double v = col0[q];
        h.at(0, q) = v;
        for (int p = 1; p <= g.M; ++p) {
            // crossing vertical edge (p-1, q) rightwards; in the top face row of a block this
            // is the top leg, in a cylinder row N reuses edge row 0
            v += edge_step(st[g.vedge(p - 1, q)]);
            h.at(p, q) = v;
        }
    }
    const double shift = ref_value - h.at(ref_p, ref_q);
    for (auto& x : h.values) x += shift;
    return h;
}

inline std::vector<int> height_to_state(const LatticeGrid& g, const LatticeHeight& h) {
    std::vector<int> st(g.n_edges(), -1);
    auto decode = [](double d) -> int {
        if (std::abs(d - 0.5) < 1e-12) return 1;
        if (std::abs(d + 0.5) < 1e-12) return 0;
        throw Inconsistent("height step is not +-1/2");
    };
    auto set = [&](int e, int v) {
        if (st[e] >= 0 && st[e] != v) throw Inconsistent("edge read two different ways");
        st[e] = v;
    };
    for (int p = 0; p <= g.M; ++p)
        for (int q = 1; q <= g.N; ++q) set(g.hedge(p, q - 1), decode(h.at(p, q) - h.at(p, q - 1)));
    for (int p = 1; p <= g.M; ++p)
        for (int q = 0; q <= g.N; ++q) set(g.vedge(p - 1, q), decode(h.at(p, q) - h.at(p - 1, q)));
    for (int e = 0; e < g.n_edges(); ++e)
        if (st[e] < 0) throw Inconsistent("edge not determined by the height");
    // ice rule at every vertex
    for (const auto& v : ice_domain(g).vertices)
        if (vertex_type(st[v[0]], st[v[1]], st[v[2]], st[v[3]]) < 0) throw Inconsistent("ice rule violated");
    return st;
}

// ---------------------------------------------------------------- 5-vertex limits

struct FiveVertexParams {
    double xi = 0.5, l = 0.1, m = -0.2, u = 0.7;
};

inline Mat4 normalize_by_largest(const Mat4& A) {
    Eigen::Index r, c;
    A.cwiseAbs().maxCoeff(&r, &c);
    return A / A(r, c);
}

inline Mat4 five_vertex_limit_r(int kase, const FiveVertexParams& p) {
    Mat4 R = Mat4::Zero();
    switch (kase) {
        case 1:
            R(0, 0) = 2 * std::sinh(p.xi) * std::exp(p.l + p.m);
            R(1, 1) = std::exp(p.xi + p.l - p.m);
            R(2, 2) = std::exp(p.xi - p.l + p.m);
            R(1, 2) = R(2, 1) = 1;
            break;
        case 2:
            if (!(p.u > 0 && p.u < std::numbers::pi / 2)) throw OutOfRange("case 2 needs 0 < u < pi/2");
            R(0, 0) = std::exp(p.l + p.m);
            R(1, 1) = std::sin(p.u) * std::exp(p.l - p.m);
            R(2, 2) = std::sin(p.u) * std::exp(-p.l + p.m);
            R(1, 2) = R(2, 1) = std::sin(p.u);
            break;
        case 3:
            R(0, 0) = 2 * std::sinh(p.xi) * std::exp(p.l + p.m);
            R(1, 1) = std::exp(-p.xi + p.l - p.m);
            R(2, 2) = std::exp(-p.xi - p.l + p.m);
            R(1, 2) = R(2, 1) = 1;
            break;
        default: throw OutOfRange("case must be 1, 2 or 3");
    }
    return R;
}

// finite-parameter 6-vertex R-matrix along the approach to the limit; for case 2 the
// argument is gamma - u > 0
inline Mat4 five_vertex_approach_r(int kase, const FiveVertexParams& p, double param) {
    switch (kase) {
        case 1: {
            const double g = param, u = g + p.xi;
            return r_matrix_abc(std::sinh(u - g), std::sinh(u), std::sinh(g), g / 2 + p.l, g / 2 + p.m);
        }
        case 2: {
            const double eps = param, g = p.u + eps;
            const double f = -0.5 * std::log(eps);
            return r_matrix_abc(std::sin(eps), std::sin(p.u), std::sin(g), f + p.l, f + p.m);
        }
        case 3: {
            const double g = param, u = g - p.xi;
            return r_matrix_abc(std::sinh(g - u), std::sinh(u), std::sinh(g), g / 2 + p.l, g / 2 + p.m);
        }
        default: throw OutOfRange("case must be 1, 2 or 3");
    }
}

inline double convergence_gap(int kase, const FiveVertexParams& p, double param) {
    if (kase == 2 && !(param > 0)) throw OutOfRange("case 2 needs gamma - u > 0");
    if (kase != 2 && !(param > 0)) throw OutOfRange("gamma must be positive");
    const Mat4 A = normalize_by_largest(five_vertex_approach_r(kase, p, param));
    const Mat4 B = normalize_by_largest(five_vertex_limit_r(kase, p));
    return (A - B).cwiseAbs().maxCoeff();
}

}  // namespace limitshape
