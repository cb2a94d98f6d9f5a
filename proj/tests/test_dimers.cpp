#include <gtest/gtest.h>

#include <limitshape/dimers.hpp>
#include <random>

using namespace limitshape;
constexpr double pi = std::numbers::pi;

TEST(Matchings, SingleEdge) {
    BipartiteGraph g;
    g.add_edge(g.add_vertex(Color::Black), g.add_vertex(Color::White, 1, 0), 2.5);
    const auto ms = enumerate_matchings(g);
    ASSERT_EQ(ms.size(), 1u);
    EXPECT_DOUBLE_EQ(config_weight(g, ms[0]), 2.5);
}

TEST(Matchings, ToricCells) {
    EXPECT_EQ(enumerate_matchings(hex_cell()).size(), 3u);
    EXPECT_EQ(enumerate_matchings(dimer_city({}, true)).size(), 6u);
}

TEST(Matchings, CoverEveryInternalVertexOnce) {
    const auto g = honeycomb_patch({{0, 0}, {1, 0}, {0, 1}}, true, 3);
    for (const auto& d : enumerate_matchings(g)) EXPECT_TRUE(is_matching(g, d));
}

TEST(Matchings, EdgeCap) {
    const auto g = honeycomb_patch({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {-1, 1}, {2, 0}, {-1, 2}}, true);
    ASSERT_GT(g.edges.size(), 40u);
    EXPECT_THROW(enumerate_matchings(g), TooLarge);
}

TEST(Curves, HexagonalCell) {
    const auto m = curves_equal_mod_units(characteristic_polynomial(hex_cell()), hex_curve());
    EXPECT_TRUE(m.equal);
}

TEST(Curves, DoublingWeightsScalesCurve) {
    const auto P = characteristic_polynomial(hex_cell());
    const auto Q = characteristic_polynomial(hex_cell(2, 2, 2));
    for (const auto& [k, c] : P.coeff) EXPECT_DOUBLE_EQ(Q.coeff.at(k), 2 * c);
}

TEST(Curves, ReferenceIndependence) {
    const CityWeights c{1.1, 0.7, 1.3, 0.9, 0.6, 1.4, 0.8};
    const auto g = dimer_city(c, true);
    const auto P0 = characteristic_polynomial(g, 0);
    for (int r = 1; r < 6; ++r) {
        const auto m = curves_equal_mod_units(P0, characteristic_polynomial(g, r), true);
        EXPECT_TRUE(m.equal);
        EXPECT_TRUE(m.variant == "identity" || m.variant.starts_with("flip")) << m.variant;
    }
}

TEST(Curves, UnitEquality) {
    SpectralCurve q;
    q.add(-1, 0, -1);
    q.add(0, 0, 1);
    q.add(-1, 1, 1);
    EXPECT_TRUE(curves_equal_mod_units(hex_curve(), q).equal);
    SpectralCurve r = hex_curve();
    r.coeff[{0, 1}] = -2;
    EXPECT_FALSE(curves_equal_mod_units(hex_curve(), r, true).equal);
}

TEST(Curves, DimerCitySymbolic) {
    const CityWeights c{1.1, 0.7, 1.3, 0.9, 0.6, 1.4, 0.8};
    SpectralCurve expect;
    expect.add(0, 0, c.b1 * c.b2 * c.g + c.a1 * c.a4 * c.b1 + c.a2 * c.a3 * c.b2);
    expect.add(0, 1, -c.a1 * c.a3);
    expect.add(-1, 0, -c.a2 * c.a4);
    expect.add(-1, 1, -c.g);
    EXPECT_TRUE(curves_equal_mod_units(characteristic_polynomial(dimer_city(c, true)), expect).equal);
}

TEST(Curves, FreeFermionCity) {
    for (double u : {pi / 6, pi / 4, pi / 3}) {
        const auto cw = ff_weights_to_city(std::cos(u), std::sin(u), 1.0);
        auto P = characteristic_polynomial(dimer_city(cw, true));
        // normalize the overall constant before comparing up to units
        double mx = 0;
        for (const auto& [k, v] : P.coeff) mx = std::max(mx, std::abs(v));
        SpectralCurve Q = ff_curve(u);
        double mq = 0;
        for (const auto& [k, v] : Q.coeff) mq = std::max(mq, std::abs(v));
        const auto m = curves_equal_mod_units(P.scaled(mq / mx), Q, true, 1e-12);
        EXPECT_TRUE(m.equal) << u;
        EXPECT_FALSE(m.variant.empty());
    }
}

TEST(City, FreeFermionWeights) {
    const auto c = ff_weights_to_city(std::cos(pi / 4), std::sin(pi / 4), 1.0);
    EXPECT_NEAR(c.a1, std::pow(2.0, -0.25), 1e-15);
    EXPECT_NEAR(c.b1, (1 - std::sqrt(2.0) / 2) / (std::sqrt(2.0) / 2), 1e-15);
    EXPECT_NEAR(c.g, std::sqrt(2.0) / 2, 1e-15);
    EXPECT_EQ(ff_weights_to_city(0.5, 0.7, 0.7).b1, 0.0);
    EXPECT_THROW(ff_weights_to_city(0.5, 0.9, 0.7), NegativeWeight);
}

TEST(City, VertexWeightsAllOnes) {
    const auto w = city_vertex_weights({});
    const std::array<double, 6> expect{3, 1, 1, 1, 2, 2};
    EXPECT_EQ(w, expect);
}

TEST(City, VertexWeightsFreeFermion) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(0.1, 2.0);
    for (int k = 0; k < 10; ++k) {
        const CityWeights c{U(rng), U(rng), U(rng), U(rng), U(rng), U(rng), U(rng)};
        const auto w = city_vertex_weights(c);
        EXPECT_NEAR(w[0] * w[1] + w[2] * w[3] - w[4] * w[5], 0.0, 1e-12 * w[0] * w[1]);
        const auto f = ff_weights_to_city(U(rng), U(rng), 3.0);
        const auto v = city_vertex_weights(f);
        EXPECT_NEAR(v[0] * v[1] + v[2] * v[3] - v[4] * v[5], 0.0, 1e-12 * v[0] * v[1]);
    }
    EXPECT_EQ(city_vertex_weights({1, 1, 1, 1, 0, 0, 1})[0], 0.0);
}

TEST(Heights, RelativeHeightBasics) {
    const auto g = honeycomb_patch({{0, 0}, {1, 0}}, true, 5);
    const auto pf = planar_faces(g);
    const auto ms = enumerate_matchings(g);
    ASSERT_GT(ms.size(), 1u);
    for (int f : relative_height(g, ms[0], ms[0], pf)) EXPECT_EQ(f, 0);
    for (const auto& d : ms) {
        const auto h = relative_height(g, d, ms[0], pf);
        for (std::size_t e = 0; e < g.edges.size(); ++e)
            EXPECT_LE(std::abs(h[pf.left[e]] - h[pf.right[e]]), 1);
    }
}

TEST(Heights, LeftRightLemmaExhaustive) {
    for (const auto& cells : std::vector<std::vector<std::pair<int, int>>>{{{0, 0}}, {{0, 0}, {1, 0}}, {{0, 0}, {1, 0}, {0, 1}}}) {
        const auto g = honeycomb_patch(cells, true, 9);
        const auto pf = planar_faces(g);
        for (const auto& d : enumerate_matchings(g)) {
            const auto th = trivalent_height(g, d, pf);
            std::vector<int> in(g.edges.size(), 0);
            for (int e : d) in[e] = 1;
            for (std::size_t e = 0; e < g.edges.size(); ++e) {
                const double step = th.at(pf.left[e]) - th.at(pf.right[e]) + 0.5;
                EXPECT_DOUBLE_EQ(step, in[e] ? 1.5 : 0.0);
            }
        }
    }
}

TEST(Heights, WeightFromHeightMatchesProduct) {
    std::vector<BipartiteGraph> graphs = {honeycomb_patch({{0, 0}}, true, 1), honeycomb_patch({{0, 0}, {1, 0}}, true, 2),
                                          honeycomb_patch({{0, 0}, {1, 0}, {0, 1}}, true, 3),
                                          honeycomb_patch({{0, 0}, {1, 0}, {0, 1}, {1, 1}}, true, 4),
                                          dimer_city({1.1, 0.7, 1.3, 0.9, 0.6, 1.4, 0.8}, false)};
    for (const auto& g : graphs) {
        ASSERT_LE(g.edges.size(), 40u);
        const auto pf = planar_faces(g);
        for (const auto& d : enumerate_matchings(g)) {
            const double w = weight_from_height(trivalent_height(g, d, pf), g, pf);
            EXPECT_NEAR(w, config_weight(g, d), 1e-10 * config_weight(g, d));
        }
    }
}

TEST(Heights, UnitWeightsGiveOne) {
    const auto g = honeycomb_patch({{0, 0}, {1, 0}}, true, 0);
    const auto pf = planar_faces(g);
    for (const auto& d : enumerate_matchings(g)) EXPECT_NEAR(weight_from_height(trivalent_height(g, d, pf), g, pf), 1.0, 1e-14);
}

TEST(Heights, ReferenceShiftIsGlobal) {
    const auto g = honeycomb_patch({{0, 0}, {1, 0}}, true, 2);
    const auto pf = planar_faces(g);
    const auto d = enumerate_matchings(g).front();
    const auto a = trivalent_height(g, d, pf, 0, 0), b = trivalent_height(g, d, pf, 1, 7);
    const int shift = b.twice[0] - a.twice[0];
    for (int f = 0; f < pf.n_faces; ++f) EXPECT_EQ(b.twice[f] - a.twice[f], shift);
}

TEST(Heights, SingleEdgeStep) {
    BipartiteGraph g;
    g.add_edge(g.add_vertex(Color::Black), g.add_vertex(Color::White, 1, 0));
    EXPECT_THROW(require_trivalent(g), NotTrivalent);
}

TEST(Heights, FiveVertexGadget) {
    const double l = 0.3, m = -0.2;
    const double al = std::exp(l + m), be = std::exp((l - m) / 2), ga = std::exp((m - l) / 2);
    const auto g = five_vertex_hex_gadget(al, be, ga);
    const auto pf = planar_faces(g);
    std::vector<double> ws;
    for (const auto& d : enumerate_matchings(g)) {
        const double w = config_weight(g, d);
        EXPECT_NEAR(weight_from_height(trivalent_height(g, d, pf), g, pf), w, 1e-12 * w);
        ws.push_back(w);
    }
    std::sort(ws.begin(), ws.end());
    std::vector<double> expect{1.0, 1.0, std::exp(m - l), std::exp(l - m), std::exp(l + m)};
    std::sort(expect.begin(), expect.end());
    ASSERT_EQ(ws.size(), expect.size());
    for (std::size_t i = 0; i < ws.size(); ++i) EXPECT_NEAR(ws[i], expect[i], 1e-14);
}

TEST(Heights, SixVertexToDimerShift) {
    EXPECT_DOUBLE_EQ(height_relation_6v_dimer(0, 2, 3), 2.5);
    EXPECT_DOUBLE_EQ(height_relation_6v_dimer(0.5, 1, 0) - 0.5, 0.5);
}
