#pragma once
// Bipartite dimers: matchings, planar faces and heights, toric cells and
// their characteristic polynomials, the dimer city gadget.
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace limitshape {

enum class Color { Black, White };

struct DimerVertex {
    Color color = Color::Black;
    double x = 0, y = 0;
    bool boundary = false;
};

// black endpoint first; kz, kw = signed crossings with the two cycles of a toric cell
struct DimerEdge {
    int black = 0, white = 0;
    double weight = 1.0;
    int kz = 0, kw = 0;
};

struct BipartiteGraph {
    std::vector<DimerVertex> vertices;
    std::vector<DimerEdge> edges;

    int add_vertex(Color c, double x = 0, double y = 0, bool boundary = false) {
        vertices.push_back({c, x, y, boundary});
        return int(vertices.size()) - 1;
    }
    int add_edge(int u, int v, double w = 1.0, int kz = 0, int kw = 0) {
        if (vertices.at(u).color == vertices.at(v).color) throw Inconsistent("edge joins equal colors");
        if (!(w > 0)) throw NegativeWeight("edge weights must be positive");
        if (vertices[u].color == Color::White) std::swap(u, v);
        edges.push_back({u, v, w, kz, kw});
        return int(edges.size()) - 1;
    }
    std::vector<std::vector<int>> incidence() const {
        std::vector<std::vector<int>> inc(vertices.size());
        for (std::size_t e = 0; e < edges.size(); ++e) {
            inc[edges[e].black].push_back(int(e));
            inc[edges[e].white].push_back(int(e));
        }
        return inc;
    }
    int other(int e, int v) const { return edges[e].black == v ? edges[e].white : edges[e].black; }
};

using DimerConfig = std::vector<int>;  // sorted edge ids

inline bool is_matching(const BipartiteGraph& g, const DimerConfig& d) {
    std::vector<int> cover(g.vertices.size(), 0);
    for (int e : d) {
        ++cover[g.edges[e].black];
        ++cover[g.edges[e].white];
    }
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
        if (g.vertices[v].boundary ? cover[v] > 1 : cover[v] != 1) return false;
    }
    return true;
}

inline std::vector<DimerConfig> enumerate_matchings(const BipartiteGraph& g) {
    if (g.edges.size() > 40) throw TooLarge("matching enumeration capped at 40 edges");
    const auto inc = g.incidence();
    const int nv = int(g.vertices.size());
    std::vector<int> covered(nv, 0);
    std::vector<int> chosen;
    std::vector<DimerConfig> out;
    std::vector<int> bb;  // edges between two boundary vertices are optional
    for (std::size_t e = 0; e < g.edges.size(); ++e)
        if (g.vertices[g.edges[e].black].boundary && g.vertices[g.edges[e].white].boundary) bb.push_back(int(e));

    std::function<void(std::size_t)> finish = [&](std::size_t k) {
        if (k == bb.size()) {
            DimerConfig d = chosen;
            std::sort(d.begin(), d.end());
            out.push_back(std::move(d));
            return;
        }
        finish(k + 1);
        const auto& E = g.edges[bb[k]];
        if (!covered[E.black] && !covered[E.white]) {
            covered[E.black] = covered[E.white] = 1;
            chosen.push_back(bb[k]);
            finish(k + 1);
            chosen.pop_back();
            covered[E.black] = covered[E.white] = 0;
        }
    };
    std::function<void()> rec = [&]() {
        int v = -1;
        for (int i = 0; i < nv; ++i)
            if (!g.vertices[i].boundary && !covered[i]) {
                v = i;
                break;
            }
        if (v < 0) {
            finish(0);
            return;
        }
        for (int e : inc[v]) {
            const int u = g.other(e, v);
            if (covered[u]) continue;
            covered[u] = covered[v] = 1;
            chosen.push_back(e);
            rec();
            chosen.pop_back();
            covered[u] = covered[v] = 0;
        }
    };
    rec();
    return out;
}

inline double config_weight(const BipartiteGraph& g, const DimerConfig& d) {
    double w = 1.0;
    for (int e : d) w *= g.edges[e].weight;
    return w;
}

// ---------------------------------------------------------------- planar faces

// Faces of the planar embedding given by vertex coordinates. Boundary vertices are
// joined in angular order by arcs; the face outside the arcs is dropped.
struct PlanarFaces {
    int n_faces = 0;
    std::vector<int> left, right;  // per graph edge, oriented black -> white
    int outer = -1;                // unbounded face when there are no boundary vertices
};

inline PlanarFaces planar_faces(const BipartiteGraph& g) {
    const int nv = int(g.vertices.size());
    // half-edges: 2k = black->white of edge k, 2k+1 = reverse; arcs appended after
    std::vector<int> from, to;
    for (const auto& e : g.edges) {
        from.push_back(e.black);
        to.push_back(e.white);
        from.push_back(e.white);
        to.push_back(e.black);
    }
    std::vector<int> bnd;
    for (int v = 0; v < nv; ++v)
        if (g.vertices[v].boundary) bnd.push_back(v);
    double cx = 0, cy = 0;
    for (const auto& v : g.vertices) {
        cx += v.x;
        cy += v.y;
    }
    cx /= std::max(nv, 1);
    cy /= std::max(nv, 1);
    std::sort(bnd.begin(), bnd.end(), [&](int a, int b) {
        return std::atan2(g.vertices[a].y - cy, g.vertices[a].x - cx) <
               std::atan2(g.vertices[b].y - cy, g.vertices[b].x - cx);
    });
    const int nb = int(bnd.size());
    if (nb == 1) throw Inconsistent("a single boundary vertex cannot be closed by arcs");
    const int first_arc = int(from.size());
    // arc k joins bnd[k] -> bnd[k+1] (counterclockwise), half-edges first_arc + 2k (+1 reverse)
    for (int k = 0; k < nb; ++k) {
        from.push_back(bnd[k]);
        to.push_back(bnd[(k + 1) % nb]);
        from.push_back(bnd[(k + 1) % nb]);
        to.push_back(bnd[k]);
    }
    const int nh = int(from.size());
    auto twin = [](int h) { return h ^ 1; };

    // rotation systems (outgoing half-edges counterclockwise)
    std::vector<std::vector<int>> rot(nv);
    for (int h = 0; h < first_arc; ++h) rot[from[h]].push_back(h);
    for (int v = 0; v < nv; ++v) {
        if (g.vertices[v].boundary) continue;
        const double x = g.vertices[v].x, y = g.vertices[v].y;
        std::sort(rot[v].begin(), rot[v].end(), [&](int a, int b) {
            return std::atan2(g.vertices[to[a]].y - y, g.vertices[to[a]].x - x) <
                   std::atan2(g.vertices[to[b]].y - y, g.vertices[to[b]].x - x);
        });
    }
    for (int k = 0; k < nb; ++k) {
        const int b = bnd[k];
        if (rot[b].size() != 1) throw Inconsistent("boundary vertices must be 1-valent");
        const int next_arc = first_arc + 2 * k;                          // b -> bnd[k+1]
        const int prev_arc = first_arc + 2 * ((k - 1 + nb) % nb) + 1;    // b -> bnd[k-1]
        rot[b] = {rot[b][0], prev_arc, next_arc};
    }
    std::vector<int> pos(nh);
    for (int v = 0; v < nv; ++v)
        for (std::size_t i = 0; i < rot[v].size(); ++i) pos[rot[v][i]] = int(i);

    // face to the left of each half-edge
    std::vector<int> face(nh, -1);
    int nf = 0;
    for (int h0 = 0; h0 < nh; ++h0) {
        if (face[h0] >= 0) continue;
        int h = h0;
        while (face[h] < 0) {
            face[h] = nf;
            const int t = twin(h);
            const auto& r = rot[to[h]];
            h = r[(pos[t] - 1 + int(r.size())) % int(r.size())];
        }
        ++nf;
    }
    PlanarFaces pf;
    int exterior = -1;
    if (nb >= 2) exterior = face[first_arc + 1];  // left of a clockwise arc
    std::vector<int> remap(nf, -1);
    int n = 0;
    for (int f = 0; f < nf; ++f)
        if (f != exterior) remap[f] = n++;
    pf.n_faces = n;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        pf.left.push_back(remap[face[2 * e]]);
        pf.right.push_back(remap[face[2 * e + 1]]);
        if (pf.left.back() < 0 || pf.right.back() < 0) throw Inconsistent("graph edge touches the exterior");
        if (pf.left.back() == pf.right.back()) throw Inconsistent("bridge edge: heights undefined");
    }
    if (nb == 0) {
        // unbounded face: the one left of the half-edge on the convex hull going clockwise
        int vmin = 0;
        for (int v = 1; v < nv; ++v)
            if (g.vertices[v].y < g.vertices[vmin].y ||
                (g.vertices[v].y == g.vertices[vmin].y && g.vertices[v].x < g.vertices[vmin].x))
                vmin = v;
        // the lowest vertex: the unbounded face lies below it, between its last and first
        // outgoing half-edge in counterclockwise order starting from angle -pi
        if (!rot[vmin].empty()) pf.outer = remap[face[twin(rot[vmin].front())]];
    }
    return pf;
}

// integer face function, step across edge e from right to left = 1_D(e) - 1_D0(e)
inline std::vector<int> relative_height(const BipartiteGraph& g, const DimerConfig& d, const DimerConfig& d0,
                                        const PlanarFaces& pf, int ref_face = 0) {
    std::vector<int> in(g.edges.size(), 0);
    for (int e : d) in[e] += 1;
    for (int e : d0) in[e] -= 1;
    std::vector<std::vector<std::pair<int, int>>> adj(pf.n_faces);  // (face, step)
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        adj[pf.right[e]].push_back({pf.left[e], in[e]});
        adj[pf.left[e]].push_back({pf.right[e], -in[e]});
    }
    std::vector<int> h(pf.n_faces, 0);
    std::vector<char> seen(pf.n_faces, 0);
    std::vector<int> stack{ref_face};
    seen[ref_face] = 1;
    while (!stack.empty()) {
        const int f = stack.back();
        stack.pop_back();
        for (auto [nf, s] : adj[f]) {
            if (!seen[nf]) {
                seen[nf] = 1;
                h[nf] = h[f] + s;
                stack.push_back(nf);
            } else if (h[nf] != h[f] + s) {
                throw Inconsistent("relative height is multivalued");
            }
        }
    }
    return h;
}

// ---------------------------------------------------------------- trivalent heights

// theta in units of 1/2: step across e from right to left is 3*1_D(e) - 1
struct TrivalentHeight {
    std::vector<int> twice;
    double at(int f) const { return 0.5 * twice[f]; }
};

inline void require_trivalent(const BipartiteGraph& g) {
    std::vector<int> deg(g.vertices.size(), 0);
    for (const auto& e : g.edges) {
        ++deg[e.black];
        ++deg[e.white];
    }
    for (std::size_t v = 0; v < g.vertices.size(); ++v)
        if (!g.vertices[v].boundary && deg[v] != 3) throw NotTrivalent("internal vertex of valence != 3");
}

inline TrivalentHeight trivalent_height(const BipartiteGraph& g, const DimerConfig& d, const PlanarFaces& pf,
                                        int ref_face = 0, int ref_twice = 0) {
    require_trivalent(g);
    std::vector<int> in(g.edges.size(), 0);
    for (int e : d) in[e] = 1;
    std::vector<std::vector<std::pair<int, int>>> adj(pf.n_faces);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const int k = 3 * in[e] - 1;
        adj[pf.right[e]].push_back({pf.left[e], k});
        adj[pf.left[e]].push_back({pf.right[e], -k});
    }
    TrivalentHeight th{std::vector<int>(pf.n_faces, 0)};
    std::vector<char> seen(pf.n_faces, 0);
    std::vector<int> stack{ref_face};
    seen[ref_face] = 1;
    th.twice[ref_face] = ref_twice;
    while (!stack.empty()) {
        const int f = stack.back();
        stack.pop_back();
        for (auto [nf, s] : adj[f]) {
            if (!seen[nf]) {
                seen[nf] = 1;
                th.twice[nf] = th.twice[f] + s;
                stack.push_back(nf);
            } else if (th.twice[nf] != th.twice[f] + s) {
                throw Inconsistent("trivalent height is multivalued (not a matching?)");
            }
        }
    }
    return th;
}

// prod_e w^{1/3} prod_f q_f^{2 theta_f / 3}, q_f = prod w(e)^{eps(e,f)}, eps = +1 on the left face
inline double weight_from_height(const TrivalentHeight& th, const BipartiteGraph& g, const PlanarFaces& pf) {
    double lg = 0;
    std::vector<double> logq(pf.n_faces, 0.0);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const double lw = std::log(g.edges[e].weight);
        lg += lw / 3.0;
        logq[pf.left[e]] += lw;
        logq[pf.right[e]] -= lw;
    }
    for (int f = 0; f < pf.n_faces; ++f) lg += (2.0 / 3.0) * th.at(f) * logq[f];
    return std::exp(lg);
}

inline double height_relation_6v_dimer(double theta6v, double x, double y) { return theta6v + x / 2 + y / 2; }

// ---------------------------------------------------------------- spectral curves

struct SpectralCurve {
    std::map<std::pair<int, int>, double> coeff;  // (i,j) -> c_ij for z^i w^j

    void add(int i, int j, double c) {
        if (std::abs(i) > 8 || std::abs(j) > 8) throw OutOfRange("curve exponents limited to |i|,|j| <= 8");
        coeff[{i, j}] += c;
    }
    void prune(double tol = 0.0) {
        for (auto it = coeff.begin(); it != coeff.end();)
            it = (std::abs(it->second) <= tol) ? coeff.erase(it) : std::next(it);
    }
    bool is_zero() const {
        for (const auto& [k, c] : coeff)
            if (c != 0.0) return false;
        return true;
    }
    std::complex<double> operator()(std::complex<double> z, std::complex<double> w) const {
        std::complex<double> s = 0;
        for (const auto& [k, c] : coeff) s += c * std::pow(z, k.first) * std::pow(w, k.second);
        return s;
    }
    std::complex<double> dz(std::complex<double> z, std::complex<double> w) const {
        std::complex<double> s = 0;
        for (const auto& [k, c] : coeff)
            if (k.first) s += c * double(k.first) * std::pow(z, k.first - 1) * std::pow(w, k.second);
        return s;
    }
    std::complex<double> dw(std::complex<double> z, std::complex<double> w) const {
        std::complex<double> s = 0;
        for (const auto& [k, c] : coeff)
            if (k.second) s += c * double(k.second) * std::pow(z, k.first) * std::pow(w, k.second - 1);
        return s;
    }
    int min_i() const {
        int m = 1 << 20;
        for (const auto& [k, c] : coeff) m = std::min(m, k.first);
        return m;
    }
    int max_i() const {
        int m = -(1 << 20);
        for (const auto& [k, c] : coeff) m = std::max(m, k.first);
        return m;
    }
    SpectralCurve transformed(bool swap, int sz, int sw) const {
        SpectralCurve out;
        for (const auto& [k, c] : coeff) {
            int i = k.first * sz, j = k.second * sw;
            if (swap) std::swap(i, j);
            out.coeff[{i, j}] += c;
        }
        return out;
    }
    // z -> -z and/or w -> -w
    SpectralCurve sign_flipped(bool fz, bool fw) const {
        SpectralCurve out = *this;
        for (auto& [k, c] : out.coeff)
            if (((fz ? k.first : 0) + (fw ? k.second : 0)) % 2) c = -c;
        return out;
    }
    SpectralCurve scaled(double s) const {
        SpectralCurve out = *this;
        for (auto& [k, c] : out.coeff) c *= s;
        return out;
    }
};

inline SpectralCurve hex_curve() {
    SpectralCurve P;
    P.add(0, 0, 1);
    P.add(1, 0, -1);
    P.add(0, 1, -1);
    return P;
}

// (wz - 1) cos u + (z + w) sin u
inline SpectralCurve ff_curve(double u) {
    SpectralCurve P;
    P.add(1, 1, std::cos(u));
    P.add(0, 0, -std::cos(u));
    P.add(1, 0, std::sin(u));
    P.add(0, 1, std::sin(u));
    return P;
}

struct UnitMatch {
    bool equal = false;
    std::string variant;  // "identity", "swap", "invert-z", ...
    int sign = 0, a = 0, b = 0;
};

namespace detail {
inline bool equal_up_to_sign_monomial(const SpectralCurve& p, const SpectralCurve& q, double rtol, UnitMatch& m) {
    SpectralCurve P = p, Q = q;
    P.prune();
    Q.prune();
    if (P.coeff.size() != Q.coeff.size() || P.coeff.empty()) return false;
    const auto [p0, pc] = *P.coeff.begin();
    const auto [q0, qc] = *Q.coeff.begin();
    const int a = q0.first - p0.first, b = q0.second - p0.second;
    const double s = qc / pc;
    if (std::abs(std::abs(s) - 1.0) > rtol) return false;
    const double sg = s > 0 ? 1.0 : -1.0;
    double scale = 0;
    for (const auto& [k, c] : P.coeff) scale = std::max(scale, std::abs(c));
    for (const auto& [k, c] : P.coeff) {
        auto it = Q.coeff.find({k.first + a, k.second + b});
        if (it == Q.coeff.end()) return false;
        if (std::abs(it->second - sg * c) > rtol * scale) return false;
    }
    m.equal = true;
    m.sign = int(sg);
    m.a = a;
    m.b = b;
    return true;
}
}  // namespace detail

// q = +-z^a w^b p; with variants, also after swapping z,w and/or inverting z or w
inline UnitMatch curves_equal_mod_units(const SpectralCurve& p, const SpectralCurve& q, bool allow_variants = false,
                                        double rtol = 1e-12) {
    UnitMatch m;
    if (detail::equal_up_to_sign_monomial(p, q, rtol, m)) {
        m.variant = "identity";
        return m;
    }
    if (!allow_variants) return m;
    for (int swap = 0; swap < 2; ++swap)
        for (int sz : {1, -1})
            for (int sw : {1, -1}) {
                if (!swap && sz == 1 && sw == 1) continue;
                if (detail::equal_up_to_sign_monomial(p.transformed(swap, sz, sw), q, rtol, m)) {
                    m.variant = std::string(swap ? "swap" : "") + (sz < 0 ? (swap ? "+invert-z" : "invert-z") : "") +
                                (sw < 0 ? ((swap || sz < 0) ? "+invert-w" : "invert-w") : "");
                    return m;
                }
            }
    // a change of reference matching multiplies P by a unit and flips the signs of z and/or w
    for (int f = 1; f < 4; ++f)
        if (detail::equal_up_to_sign_monomial(p.sign_flipped(f & 1, f & 2), q, rtol, m)) {
            m.variant = std::string(f & 1 ? "flip-z" : "") + (f == 3 ? "+" : "") + (f & 2 ? "flip-w" : "");
            return m;
        }
    return m;
}

// P = sum_D W(D) z^{dz} w^{dw} (-1)^{dz dw + dz + dw}, homology relative to the reference matching
inline SpectralCurve characteristic_polynomial(const BipartiteGraph& cell, int ref_index = 0) {
    const auto ms = enumerate_matchings(cell);
    if (ms.empty()) throw Inconsistent("cell has no toric matchings");
    const auto& d0 = ms.at(ref_index);
    int z0 = 0, w0 = 0;
    for (int e : d0) {
        z0 += cell.edges[e].kz;
        w0 += cell.edges[e].kw;
    }
    SpectralCurve P;
    for (const auto& d : ms) {
        int dz = -z0, dw = -w0;
        for (int e : d) {
            dz += cell.edges[e].kz;
            dw += cell.edges[e].kw;
        }
        const int par = dz * dw + dz + dw;
        const double sign = (((par % 2) + 2) % 2) ? -1.0 : 1.0;
        P.add(dz, dw, sign * config_weight(cell, d));
    }
    P.prune();
    return P;
}

// ---------------------------------------------------------------- cells and gadgets

inline BipartiteGraph hex_cell(double w0 = 1, double w1 = 1, double w2 = 1) {
    BipartiteGraph g;
    const int b = g.add_vertex(Color::Black), w = g.add_vertex(Color::White, 1, 0);
    g.add_edge(b, w, w0, 0, 0);
    g.add_edge(b, w, w1, 1, 0);
    g.add_edge(b, w, w2, 0, 1);
    return g;
}

struct CityWeights {
    double a1 = 1, a2 = 1, a3 = 1, a4 = 1;
    double b1 = 1, b2 = 1;
    double g = 1;
};

// the dimer city gadget; with legs it is a planar trivalent patch, without legs the
// opposite legs are glued into the two wrap edges of the toric cell
inline BipartiteGraph dimer_city(const CityWeights& c, bool toric) {
    BipartiteGraph G;
    const int d0 = G.add_vertex(Color::Black, 1, 0);
    const int d1 = G.add_vertex(Color::White, 0, 1);
    const int d2 = G.add_vertex(Color::White, -1, 0);
    const int d3 = G.add_vertex(Color::Black, 0, -1);
    const int d4 = G.add_vertex(Color::White, 0.5, -0.5);
    const int d5 = G.add_vertex(Color::Black, -0.5, 0.5);
    G.add_edge(d0, d1, c.b2);
    G.add_edge(d3, d2, c.b1);
    G.add_edge(d5, d4, c.g);
    G.add_edge(d5, d1, c.a1);
    G.add_edge(d5, d2, c.a2);
    G.add_edge(d3, d4, c.a3);
    G.add_edge(d0, d4, c.a4);
    if (toric) {
        G.add_edge(d0, d2, 1.0, 0, 1);   // horizontal wrap
        G.add_edge(d3, d1, 1.0, -1, 0);  // vertical wrap
    } else {
        const int e0 = G.add_vertex(Color::White, 2, 0, true);
        const int e1 = G.add_vertex(Color::Black, 0, 2, true);
        const int e2 = G.add_vertex(Color::Black, -2, 0, true);
        const int e3 = G.add_vertex(Color::White, 0, -2, true);
        G.add_edge(d0, e0);
        G.add_edge(e1, d1);
        G.add_edge(e2, d2);
        G.add_edge(d3, e3);
    }
    return G;
}

inline std::array<double, 6> city_vertex_weights(const CityWeights& c) {
    return {c.b1 * c.b2 * c.g + c.b2 * c.a2 * c.a3 + c.b1 * c.a1 * c.a4,
            c.g,
            c.a1 * c.a3,
            c.a4 * c.a2,
            c.a2 * c.a3 + c.b1 * c.g,
            c.a1 * c.a4 + c.b2 * c.g};
}

inline CityWeights ff_weights_to_city(double a, double b, double c) {
    if (!(a > 0 && b > 0 && c > 0)) throw OutOfRange("weights must be positive");
    if (c < b) throw NegativeWeight("c < b gives a negative beta");
    const double al = std::sqrt(b), be = (c - b) / a;
    return {al, al, al, al, be, be, a};
}

// Hexagonal gadget: black d0 with legs W (beta) and S (gamma), white d1 with
// legs E (beta) and N (gamma), d0-d1 weight alpha
inline BipartiteGraph five_vertex_hex_gadget(double alpha, double beta, double gamma) {
    BipartiteGraph G;
    const int d0 = G.add_vertex(Color::Black, -0.4, -0.4);
    const int d1 = G.add_vertex(Color::White, 0.4, 0.4);
    G.add_edge(d0, d1, alpha);
    G.add_edge(d0, G.add_vertex(Color::White, -1.15, -0.4, true), beta);   // W
    G.add_edge(d0, G.add_vertex(Color::White, -0.4, -1.15, true), gamma);  // S
    G.add_edge(G.add_vertex(Color::Black, 1.15, 0.4, true), d1, beta);     // E
    G.add_edge(G.add_vertex(Color::Black, 0.4, 1.15, true), d1, gamma);    // N
    return G;
}

// honeycomb patch: union of hexagons with centers i*a1 + j*a2, degree-2 vertices get legs
inline BipartiteGraph honeycomb_patch(const std::vector<std::pair<int, int>>& cells, bool legs = true,
                                      unsigned seed_weights = 0) {
    const double s3 = std::sqrt(3.0);
    std::vector<std::array<double, 2>> pts;
    std::vector<int> kind;  // 0 black, 1 white
    auto find_or_add = [&](double x, double y, int k) {
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (std::abs(pts[i][0] - x) < 1e-9 && std::abs(pts[i][1] - y) < 1e-9) return int(i);
        pts.push_back({x, y});
        kind.push_back(k);
        return int(pts.size()) - 1;
    };
    std::vector<std::pair<int, int>> links;
    for (auto [i, j] : cells) {
        const double cx = i * s3 + j * s3 / 2, cy = j * 1.5;
        int ids[6];
        for (int k = 0; k < 6; ++k) {
            const double ang = std::numbers::pi / 6 + k * std::numbers::pi / 3;
            ids[k] = find_or_add(cx + std::cos(ang), cy + std::sin(ang), (k % 2 == 1) ? 0 : 1);
        }
        for (int k = 0; k < 6; ++k) {
            auto pr = std::minmax(ids[k], ids[(k + 1) % 6]);
            if (std::find(links.begin(), links.end(), std::pair<int, int>(pr.first, pr.second)) == links.end())
                links.push_back({pr.first, pr.second});
        }
    }
    BipartiteGraph G;
    for (std::size_t i = 0; i < pts.size(); ++i)
        G.add_vertex(kind[i] ? Color::White : Color::Black, pts[i][0], pts[i][1]);
    unsigned st = seed_weights * 2654435761u + 12345u;
    auto rnd = [&]() {
        st = st * 1664525u + 1013904223u;
        return 0.5 + 1.5 * double(st >> 8) / double(1u << 24);
    };
    for (auto [a, b] : links) G.add_edge(a, b, seed_weights ? rnd() : 1.0);
    if (legs) {
        std::vector<std::vector<int>> nb(pts.size());
        for (auto [a, b] : links) {
            nb[a].push_back(b);
            nb[b].push_back(a);
        }
        for (std::size_t v = 0; v < pts.size(); ++v) {
            if (nb[v].size() != 2) continue;
            double dx = 2 * pts[v][0] - pts[nb[v][0]][0] - pts[nb[v][1]][0];
            double dy = 2 * pts[v][1] - pts[nb[v][0]][1] - pts[nb[v][1]][1];
            const double n = std::hypot(dx, dy);
            const int leg = G.add_vertex(kind[v] ? Color::Black : Color::White, pts[v][0] + 0.5 * dx / n,
                                         pts[v][1] + 0.5 * dy / n, true);
            G.add_edge(int(v), leg, seed_weights ? rnd() : 1.0);
        }
    }
    return G;
}

}  // namespace limitshape
