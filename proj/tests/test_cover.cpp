#include <doctest.h>

#include <cmath>
#include <random>

#include "ksrg/cover.hpp"

using namespace ksrg;

namespace {
const double E = std::exp(1.0);

// every integer centre near the cloud, every breakpoint s' >= s
bool expandable_oracle(const std::vector<Point>& pts, double s, int d) {
    if (pts.empty()) return true;
    double R = 0.5 * std::pow(pts.size() / E + 1, 1.0 / d) + 1;
    std::vector<long> lo(d), hi(d);
    for (int k = 0; k < d; ++k) {
        double a = pts[0][k], b = pts[0][k];
        for (auto& p : pts) a = std::min(a, p[k]), b = std::max(b, p[k]);
        lo[k] = long(std::floor(a - R));
        hi[k] = long(std::ceil(b + R));
    }
    std::vector<long> x(lo);
    while (true) {
        std::vector<double> t;
        for (auto& p : pts) {
            double m = 0;
            for (int k = 0; k < d; ++k) m = std::max(m, std::fabs(p[k] - x[k]));
            t.push_back(std::pow(2 * m, d));
        }
        std::vector<double> cand{s};
        for (double v : t)
            if (v >= s) cand.push_back(v);
        for (double sp : cand) {
            std::size_t c = 0;
            for (double v : t) c += v <= sp;
            if (c > E * sp) return false;
        }
        int k = 0;
        while (k < d && ++x[k] > hi[k]) x[k] = lo[k], ++k;
        if (k == d) return true;
    }
}

std::vector<Point> blob(std::mt19937_64& g, int d, std::size_t m, std::vector<double> c, double r) {
    std::uniform_real_distribution<double> u(-r, r);
    std::vector<Point> out;
    for (std::size_t i = 0; i < m; ++i) {
        Point p(d);
        for (int k = 0; k < d; ++k) p[k] = c[k] + u(g);
        out.push_back(p);
    }
    return out;
}
}  // namespace

TEST_CASE("constants") {
    CHECK(cover_nu(1) == doctest::Approx(8 * E));
    CHECK(cover_nu(2) == doctest::Approx(2 * 64 * E));
    ModelParams mp;
    mp.alpha = 2.0;
    mp.beta = 1;
    CHECK(s_of_wbar(8, mp) == doctest::Approx(256));
    mp.alpha = kInf;
    CHECK(s_of_wbar(8, mp) == doctest::Approx(16));
    mp.d = 2;
    mp.beta = 0.5;
    CHECK(wbar_lower_bound(mp) == doctest::Approx(16));
}

TEST_CASE("expandability examples") {
    CHECK(is_expandable({}, 3, 1));
    std::vector<Point> pts;
    for (int i = 0; i < 30; ++i) pts.push_back({-0.45 + 0.03 * i});
    CHECK_FALSE(is_expandable(pts, 10, 1));
    CHECK(is_expandable(pts, 12, 1));
    CHECK(expandability_threshold(pts, 1) == doctest::Approx(30 / E));
}

TEST_CASE("expandability against brute force") {
    std::mt19937_64 g(4);
    for (int t = 0; t < 40; ++t) {
        int d = 1 + t % 2;
        std::vector<Point> pts = blob(g, d, 5 + g() % 60, std::vector<double>(d, 0.0), 0.5 + (g() % 8));
        double thr = expandability_threshold(pts, d);
        for (double s : {0.5, 1.0, 3.0, 7.5, 20.0, thr * 0.999, thr * 1.001 + 1e-9})
            if (s > 0) CHECK(is_expandable(pts, s, d) == expandable_oracle(pts, s, d));
    }
}

TEST_CASE("subsets of expandable sets are expandable") {
    std::mt19937_64 g(6);
    for (int t = 0; t < 30; ++t) {
        int d = 1 + t % 2;
        auto pts = blob(g, d, 40, std::vector<double>(d, 0.0), 3);
        double s = expandability_threshold(pts, d) + 0.5;
        REQUIRE(is_expandable(pts, s, d));
        std::vector<Point> sub;
        for (auto& p : pts)
            if (g() % 2) sub.push_back(p);
        CHECK(is_expandable(sub, s, d));
    }
}

TEST_CASE("pigeonhole") {
    auto a = pigeonhole_split({10, 1}, 2, 0.5);
    REQUIRE(a.has_value());
    CHECK(*a == std::vector<std::size_t>{0});
    CHECK_FALSE(pigeonhole_split({5, 5, 1}, 2, 0.5).has_value());
    CHECK_FALSE(pigeonhole_split({2, 2, 2, 2}, 2, 0.5).has_value());
}

TEST_CASE("cells") {
    auto cells = occupied_cells({{0.5}, {0.49}, {-3.2}}, 16, 1);
    REQUIRE(cells.size() == 2);
    CHECK(cells[0].z == std::vector<long>{-3});
    // face x = 0.5 goes to the cell with the smaller centre
    CHECK(cells[1].z == std::vector<long>{0});
    CHECK(cells[1].points.size() == 2);
    for (long z = -8; z <= 8; ++z) {
        Box b = cell_region({z}, 16, 1);
        CHECK(b.volume() >= 0.5);
        CHECK(b.volume() <= 2);
    }
}

TEST_CASE("two dense neighbouring cells merge into one box") {
    std::vector<Point> pts;
    for (int i = 0; i < 22; ++i) pts.push_back({-0.4 + 0.035 * i});
    for (int i = 0; i < 22; ++i) pts.push_back({0.6 + 0.035 * i});
    auto r = cover_expansion(pts, 16, 1);
    CHECK(r.kind == CoverResult::Kind::expanded);
    CHECK(r.rounds == 1);
    REQUIRE(r.boxes.size() == 1);
    CHECK(r.box_volume[0] == doctest::Approx(44 / (8 * E)));
    CHECK(r.allocation == std::vector<long>{0, 0});
    CHECK(certify(r, pts, std::nullopt).all());
}

TEST_CASE("spread points give a proper cover") {
    ModelParams mp;
    mp.alpha = 2.0;
    std::vector<Point> pts;
    for (int i = -5; i <= 5; ++i) pts.push_back({double(i)});
    auto r = cover(pts, 1024, 2.5, mp);
    CHECK(r.kind == CoverResult::Kind::proper);
    CHECK(r.rounds == 0);
    CHECK(r.covered_region_volume >= 11 * 0.5);
    CHECK(r.covered_region_volume >= 11 / (32 * E));
    CHECK(certify(r, pts, s_of_wbar(2.5, mp)).all());
}

TEST_CASE("cover preconditions") {
    ModelParams mp;
    mp.alpha = 2.0;
    std::vector<Point> pts(50, Point{0.0});
    CHECK_THROWS_AS(cover(pts, 1024, 1.5, mp), CoverError);   // w_bar too small
    CHECK_THROWS_AS(cover(pts, 100, 8, mp), CoverError);      // s > n
    CHECK_THROWS_AS(cover({{600.0}}, 1024, 3, mp), CoverError);
    std::vector<Point> dense(200, Point{0.0});
    CHECK_THROWS_AS(cover(dense, 1024, 2.5, mp), CoverError);  // 200 points, s = 25
}

TEST_CASE("fuzzed expansions satisfy the certificate") {
    std::mt19937_64 g(12);
    int used = 0;
    for (int t = 0; t < 80; ++t) {
        int d = 1 + t % 2;
        double n = 4096;
        std::vector<Point> pts;
        int blobs = 1 + g() % 4;
        for (int b = 0; b < blobs; ++b) {
            std::vector<double> c(d);
            for (auto& x : c) x = double(long(g() % 40) - 20);
            // d = 2 needs far more points per cell to reach nu
            auto part = d == 1 ? blob(g, d, 200 + g() % 400, c, 0.2 + (g() % 10) * 0.1)
                               : blob(g, d, 1500 + g() % 2500, c, 0.2 + (g() % 10) * 0.05);
            pts.insert(pts.end(), part.begin(), part.end());
        }
        // the volume floor is only promised when no proper cover exists
        if (double(occupied_cells(pts, n, d).size()) >= double(pts.size()) / (2 * cover_nu(d))) continue;
        ++used;
        double s = std::max(1.0, expandability_threshold(pts, d));
        auto r = cover_expansion(pts, n, d);
        auto cert = certify(r, pts, s);
        CHECK(cert.all());
        CHECK(double(r.rounds) <= cert.rounds_limit);
    }
    CHECK(used >= 50);
}

TEST_CASE("threshold connection within a cell") {
    std::mt19937_64 g(2);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int d = 1; d <= 3; ++d) {
        ModelParams mp;
        mp.d = d;
        mp.alpha = kInf;
        mp.beta = 1.5;
        mp.p = 0.8;
        double wbar = wbar_lower_bound(mp);
        for (int i = 0; i < 500; ++i) {
            MarkedVertex a, b;
            a.x.resize(d);
            b.x.resize(d);
            for (int k = 0; k < d; ++k) a.x[k] = u(g), b.x[k] = u(g);
            b.w = wbar;
            b.id = 1;
            CHECK(connection_prob(a, b, mp) == mp.p);
        }
    }
}

TEST_CASE("dense cell guarantee") {
    ModelParams mp;
    mp.alpha = 2.0;
    mp.p = 1;
    std::vector<Point> pts;
    for (int i = 0; i < 20; ++i) pts.push_back({-0.4 + 0.04 * i});
    auto r = cover(pts, 1024, 3, mp);
    std::vector<MarkedVertex> L;
    for (std::size_t i = 0; i < pts.size(); ++i) L.push_back({pts[i], 1, i});
    auto gr = connection_guarantee_check(r, L, 3, mp, 2000, 5);
    CHECK(gr.frequency == 1);
    CHECK(gr.min_probability == 1);
}

TEST_CASE("clustered guarantee") {
    ModelParams mp;
    mp.alpha = 2.0;
    mp.p = 0.6;
    std::mt19937_64 g(8);
    auto pts = blob(g, 1, 25, {3.0}, 0.45);
    double wbar = 2.2;
    auto r = cover(pts, 1024, wbar, mp);
    std::vector<MarkedVertex> L;
    for (std::size_t i = 0; i < pts.size(); ++i) L.push_back({pts[i], 1, i});
    auto gr = connection_guarantee_check(r, L, wbar, mp, 10000, 3);
    CHECK(gr.frequency >= mp.p / 2 - 3 * gr.stderr_);
}
