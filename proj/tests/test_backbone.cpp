#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ksrg/backbone.hpp"
#include "ksrg/components.hpp"
#include "ksrg/exponents.hpp"

using namespace ksrg;

namespace {
ModelParams ref() {
    ModelParams mp;
    mp.d = 1;
    mp.sigma = 1;
    mp.tau = 2.2;
    mp.alpha = 3.0;
    return mp;
}

double c1_oracle(const ModelParams& mp) {
    int d = mp.d;
    double s = mp.sigma, t = mp.tau.value();
    if (mp.alpha.is_inf()) return std::pow(mp.beta * std::pow(d, -d / 2.0) * std::pow(2.0, -d - 2 * s), (t - 1) / (1 + s));
    double a = mp.alpha.value();
    double lhs = mp.p / 16 * std::pow(mp.beta, a) * std::pow(2.0, -a * d) * std::pow(d, -a * d / 2.0);
    return std::pow(lhs / (2 * std::log(2.0)), (t - 1) / ((1 + s) * a - (t - 1)));
}
}  // namespace

TEST_CASE("survival constant") {
    CHECK(lambda_star(0.5) == doctest::Approx(1.386294).epsilon(1e-6));
    CHECK(lambda_star(0.5) == doctest::Approx(2 * std::log(2.0)));
    for (double r : {0.1, 0.3, 0.9}) CHECK(1 - r == doctest::Approx(std::exp(-lambda_star(r) * r)));
}

TEST_CASE("threshold C1") {
    ModelParams mp;
    mp.alpha = kInf;
    mp.sigma = 1;
    mp.beta = 2;
    mp.tau = 2.9;
    // tau = 3 sits outside the backbone regime; C1 itself only needs the formula
    auto bp = backbone_constants(mp, 64, 1024);
    CHECK(bp.C1 == doctest::Approx(c1_oracle(mp)));
    mp.tau = 3.0;
    CHECK(c1_oracle(mp) == doctest::Approx(0.25));
    CHECK_THROWS_AS(backbone_constants(mp, 64, 1024), ParamError);
}

TEST_CASE("reference constants") {
    auto mp = ref();
    auto bp = backbone_constants(mp, 65536, 262144);
    CHECK(bp.C1 == doctest::Approx(c1_oracle(mp)).epsilon(1e-12));
    CHECK(bp.C1 == doctest::Approx(0.2739893256).epsilon(1e-9));
    CHECK(bp.w_hh == doctest::Approx(298.828445).epsilon(1e-8));
    CHECK(bp.s_k == doctest::Approx(4.38382921).epsilon(1e-8));
    CHECK(bp.r_k_conn == doctest::Approx(0.1462480205).epsilon(1e-8));
    CHECK(bp.num_boxes() == 4);
    CHECK(bp.s_ceil() == 5);
    CHECK(bp.k_above_k1());
    // both forms of s_k
    CHECK(bp.s_k == doctest::Approx(65536 * std::pow(bp.w_hh, -1.2) / 16).epsilon(1e-12));
    CHECK(bp.r_k_conn == doctest::Approx(1 - std::pow(2.0, -1 / bp.s_k)));
    CHECK(bp.lambda_star_half == doctest::Approx(1.386294).epsilon(1e-6));
}

TEST_CASE("n prime") {
    ModelParams mp = ref();
    mp.d = 2;
    mp.tau = 2.3;
    auto bp = backbone_constants(mp, 10, 1000);
    CHECK(bp.n_prime == 1000);
    CHECK(bp.boxes_per_side == 10);
    auto bq = backbone_constants(mp, 10, 990);
    CHECK(bq.boxes_per_side == 9);
    CHECK(bq.n_prime == 810);
    CHECK_THROWS_AS(backbone_constants(mp, 2000, 1000), ParamError);
}

TEST_CASE("s_k = 1 connection level") {
    BackboneParams bp;
    bp.s_k = 1;
    CHECK(1 - std::pow(2.0, -1 / bp.s_k) == 0.5);
}

TEST_CASE("snake order is face adjacent") {
    for (int d = 1; d <= 3; ++d)
        for (long m : {1L, 2L, 3L, 4L}) {
            auto o = snake_order(d, m);
            CHECK(o.size() == std::size_t(std::pow(m, d)));
            std::set<std::vector<long>> u(o.begin(), o.end());
            CHECK(u.size() == o.size());
            for (std::size_t i = 1; i < o.size(); ++i) CHECK(face_adjacent(o[i - 1], o[i]));
        }
    CHECK_FALSE(face_adjacent({0, 0}, {1, 1}));
}

TEST_CASE("empty band") {
    ModelParams mp = ref();
    auto vs = sample_vertices(mp, 4096, 1);
    auto bp = backbone_constants(mp, 1024, 4096);
    vs.erase(std::remove_if(vs.begin(), vs.end(), [&](auto& v) { return v.w >= bp.w_hh; }), vs.end());
    auto r = construct_backbone(vs, mp, 4096, 1024, coin_oracle(vs, mp, 1));
    CHECK_FALSE(r.holds_A_bb);
    CHECK(r.band.empty());
    CHECK_THROWS_AS(nearest_backbone_set(vs, r, 0), std::logic_error);
}

TEST_CASE("single subbox") {
    ModelParams mp = ref();
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        double n = 16384;
        auto g = sample_graph(mp, n, seed);
        auto r = construct_backbone(g, n);
        REQUIRE(r.boxes.size() == 1);
        // oracle: largest component of the band subgraph
        std::vector<std::uint32_t> idx(g.vertices.size(), UINT32_MAX);
        std::size_t m = 0;
        for (std::size_t i = 0; i < g.vertices.size(); ++i)
            if (g.vertices[i].w >= r.bp.w_hh && g.vertices[i].w < 2 * r.bp.w_hh) idx[i] = std::uint32_t(m++);
        std::vector<Edge> es;
        for (auto [u, v] : g.edges)
            if (idx[u] != UINT32_MAX && idx[v] != UINT32_MAX) es.push_back({idx[u], idx[v]});
        std::size_t largest = m ? cluster_stats(m, es).largest : 0;
        CHECK(r.holds_A_bb == (largest >= r.bp.s_k));
        CHECK(r.band.size() == m);
    }
}

TEST_CASE("coin and graph oracles agree") {
    ModelParams mp = ref();
    auto g = sample_graph(mp, 3000, 9, false, Method::exact);
    auto a = coin_oracle(g.vertices, mp, 9), b = graph_oracle(g);
    for (std::size_t u = 0; u < 200; ++u)
        for (std::size_t v = u + 1; v < 200; ++v) CHECK(a(u, v) == b(u, v));
}

TEST_CASE("backbone sets") {
    ModelParams mp = ref();
    double n = 262144, k = 32768;
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        auto vs = sample_vertices(mp, n, seed);
        auto r = construct_backbone(vs, mp, n, k, coin_oracle(vs, mp, seed));
        CHECK(r.bp.s_ceil() == 4);
        if (!r.holds_A_bb) continue;
        for (std::size_t c : r.per_box_counts) CHECK(c >= r.bp.s_k);
        const double lim = 2 * std::sqrt(1.0) * k;
        for (std::size_t u = 0; u < vs.size(); u += 997) {
            auto S = nearest_backbone_set(vs, r, u);
            CHECK(S.size() == 4);
            std::size_t q = r.box_of(vs[u].x);
            auto mem = r.per_box_members[q];
            std::sort(mem.begin(), mem.end(), [&](auto a, auto b) { return vs[a].w > vs[b].w; });
            std::set<std::size_t> top(mem.begin(), mem.begin() + 4);
            CHECK(std::set<std::size_t>(S.begin(), S.end()) == top);
            for (auto v : S) CHECK(std::fabs(vs[u].x[0] - vs[v].x[0]) <= lim);
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("box lookup outside the tessellation") {
    ModelParams mp = ref();
    mp.d = 2;
    mp.tau = 2.3;
    std::vector<MarkedVertex> vs;
    auto r = construct_backbone(vs, mp, 990, 10, coin_oracle(vs, mp, 1));
    // n' = 810, half side 14.23; the box half side is 15.73
    std::vector<double> x{15.5, -15.5};
    std::size_t q = r.box_of(x);
    CHECK(r.box_distance(x, q) > 0);
    CHECK(r.box_distance(x, q) <= 2 * std::sqrt(2.0) * std::sqrt(10.0));
    for (std::size_t i = 0; i < r.boxes.size(); ++i) CHECK(r.box_distance(x, q) <= r.box_distance(x, i) + 1e-12);
}

TEST_CASE("ladder geometry") {
    CHECK(ladder_top(8, 298.8) == 4);
    CHECK(ladder_top(100, 150) == -1);
    CHECK(ladder_top(75, 150) == -1);
    CHECK(ladder_top(74, 150) == 0);
    ModelParams mp = ref();
    double prev = 0;
    for (int j = 0; j < 6; ++j) {
        auto b = ladder_box({0.0}, j, 2, mp, 1e12);
        double v = b.hi[0] - b.lo[0];
        if (j) CHECK(v / prev == doctest::Approx(4));  // 2^{sigma+1}
        prev = v;
        CHECK(b.wlo == std::ldexp(2.0, j));
        CHECK(b.whi == std::ldexp(2.0, j + 1));
    }
}

TEST_CASE("threshold example with the band sampler") {
    // n = 2^18 cannot host s_k >= 4 here (C1 = 1, zeta_hh = 1/4 needs k >= 2^24)
    ModelParams mp;
    mp.d = 1;
    mp.sigma = 1;
    mp.tau = 2.5;
    mp.alpha = kInf;
    mp.beta = 8;
    double k = std::ldexp(1.0, 24), n = 4 * k;
    auto bp = backbone_constants(mp, k, n);
    CHECK(bp.C1 == doctest::Approx(1.0));
    CHECK(bp.s_k == doctest::Approx(4.0));
    int hits = 0;
    for (int s = 0; s < 100; ++s) {
        auto vs = sample_vertices_band(mp, n, s, bp.w_hh, 2 * bp.w_hh);
        hits += construct_backbone(vs, mp, n, k, coin_oracle(vs, mp, s)).holds_A_bb;
    }
    CHECK(hits >= 90);
}

TEST_CASE("ladder success is stable in n") {
    ModelParams mp = ref();
    const double k = 65536, m_w = 8;
    double freq[2];
    for (int t = 0; t < 2; ++t) {
        double n = t ? 524288 : 262144;
        int ok = 0, tried = 0;
        for (std::uint64_t seed = 0; seed < 12; ++seed) {
            auto vs = sample_vertices(mp, n, seed);
            auto adj = coin_oracle(vs, mp, seed);
            auto r = construct_backbone(vs, mp, n, k, adj);
            if (!r.holds_A_bb) continue;
            int taken = 0;
            for (std::size_t u = 0; u < vs.size() && taken < 10; u += 101) {
                if (vs[u].w < m_w || vs[u].w >= 2 * m_w) continue;
                ++taken;
                ++tried;
                auto p = mark_ladder_path(vs, mp, n, r, u, m_w, adj);
                if (!p) continue;
                ++ok;
                CHECK(p->size() == std::size_t(ladder_top(m_w, r.bp.w_hh) + 2));
                for (std::size_t i = 1; i < p->size(); ++i) CHECK(adj((*p)[i - 1], (*p)[i]));
            }
        }
        REQUIRE(tried > 50);
        freq[t] = double(ok) / tried;
    }
    MESSAGE("ladder success " << freq[0] << " " << freq[1]);
    CHECK(std::min(freq[0], freq[1]) >= 0.3);
    CHECK(std::fabs(freq[0] - freq[1]) <= 0.2);
}
