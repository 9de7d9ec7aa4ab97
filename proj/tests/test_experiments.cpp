#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ksrg/experiments.hpp"

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

// expected downward neighbours of (x, w) beyond |y| > a, d = 1, by brute quadrature
double far_oracle(double x, double w, const ModelParams& mp, double a) {
    const double t1 = mp.tau.value() - 1;
    auto inner = [&](double r) {
        // integral over w' in [1, w] of the mark density times the connection probability
        const int M = 400;
        double lo = 0, hi = std::log(w), h = (hi - lo) / M, s = 0;
        for (int i = 0; i <= M; ++i) {
            double wp = std::exp(lo + i * h);
            double dens = t1 * std::pow(wp, -t1 - 1) * wp;  // d w' = w' d log w'
            double v = dens * connection_prob_at(r, kernel_value(w, wp, mp), mp);
            s += (i == 0 || i == M ? 0.5 : 1.0) * v;
        }
        return s * h;
    };
    auto side = [&](double r0) {
        const int N = 4000;
        double lo = std::log(r0), hi = std::log(r0 * 1e9), h = (hi - lo) / N, s = 0;
        for (int i = 0; i <= N; ++i) {
            double r = std::exp(lo + i * h);
            s += (i == 0 || i == N ? 0.5 : 1.0) * inner(r) * r;
        }
        return s * h;
    };
    return side(a - x) + side(a + x);
}
}  // namespace

TEST_CASE("power law fit") {
    std::vector<double> x, y;
    for (int i = 1; i <= 10; ++i) x.push_back(i), y.push_back(3.0 * i * i);
    auto f = fit_slope(x, y, Transform::log, Transform::log, 0);
    CHECK(f.slope == doctest::Approx(2));
    CHECK(f.intercept == doctest::Approx(std::log(3.0)));
    CHECK(f.r_squared == doctest::Approx(1));
    CHECK(f.points == 10);
    auto g = fit_slope(x, y, Transform::log, Transform::log);
    CHECK(g.points == 8);
    CHECK(g.slope == doctest::Approx(2));
}

TEST_CASE("constant and noisy data") {
    std::vector<double> x{1, 2, 3, 4, 5}, y(5, 7.0);
    auto f = fit_slope(x, y, Transform::identity, Transform::identity, 0);
    CHECK(f.slope == 0);
    CHECK(f.r_squared == 1);
    std::mt19937_64 g(3);
    std::normal_distribution<double> nz(0, 1);
    std::vector<double> xs, ys;
    for (double v = 10; v < 1e5; v *= 1.25) xs.push_back(v), ys.push_back(std::sqrt(v) * (1 + 0.1 * nz(g)));
    auto h = fit_slope(xs, ys, Transform::log, Transform::log);
    CHECK(std::fabs(h.slope - 0.5) <= 0.05);
    CHECK(h.r_squared >= 0);
    CHECK(h.r_squared <= 1);
}

TEST_CASE("fit errors") {
    CHECK_THROWS_AS(fit_slope({1, 2, 3}, {1, 2, 3}, Transform::identity, Transform::identity, 0), std::invalid_argument);
    CHECK_THROWS_AS(fit_slope({1, 1, 1, 1}, {1, 2, 3, 4}, Transform::identity, Transform::identity, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(fit_slope({1, 2, 3, 4}, {1, 0, 3, 4}, Transform::identity, Transform::log, 0),
                    std::invalid_argument);
    auto ll = fit_slope({std::exp(std::exp(1.0)), std::exp(std::exp(2.0)), std::exp(std::exp(3.0)), std::exp(std::exp(4.0))},
                        {1, 2, 3, 4}, Transform::loglog, Transform::identity, 0);
    CHECK(ll.slope == doctest::Approx(1));
}

TEST_CASE("wilson") {
    auto w = wilson_interval(50, 100);
    CHECK(w.lo == doctest::Approx(0.4038).epsilon(1e-3));
    CHECK(w.hi == doctest::Approx(0.5962).epsilon(1e-3));
    auto z = wilson_interval(0, 20);
    CHECK(z.lo == 0);
    CHECK(z.hi > 0);
}

TEST_CASE("downward predicate") {
    MarkedVertex u{{1.0}, 3, 0}, v{{9.0}, 2, 1};
    CHECK(is_downward(u, v, 4));
    CHECK_FALSE(is_downward(v, u, 4));
    MarkedVertex w{{1.5}, 2, 2};
    CHECK_FALSE(is_downward(u, w, 4));  // both inside
    MarkedVertex e{{9.0}, 3, 3};
    CHECK(is_downward(u, e, 4));  // equal marks count
}

TEST_CASE("far field against quadrature") {
    auto mp = ref();
    for (auto [x, w, a] : {std::tuple{0.0, 5.0, 50.0}, {30.0, 40.0, 64.0}, {-10.0, 1.0, 20.0}, {0.0, 3000.0, 128.0}}) {
        double got = far_field_mass({x}, w, mp, a), want = far_oracle(x, w, mp, a);
        CHECK(got == doctest::Approx(want).epsilon(2e-3));
    }
    ModelParams t;
    t.d = 2;
    t.tau = kInf;
    t.alpha = kInf;
    CHECK(far_field_mass({0.0, 0.0}, 1, t, 10) == 0);
}

TEST_CASE("boundary means match the semi-analytic values") {
    // from an independent computation of the expectation, d = 1 reference parameters
    auto mp = ref();
    auto res = estimate_downward_boundary(mp, {256, 1024}, 300, 17, {Method::automatic, 1});
    REQUIRE(res.rows.size() == 2);
    CHECK(std::fabs(res.rows[0].mean - 39.126) < 4 * res.rows[0].stderr_);
    CHECK(std::fabs(res.rows[1].mean - 82.244) < 4 * res.rows[1].stderr_);
}

TEST_CASE("decay estimates are monotone and thread independent") {
    auto mp = ref();
    std::vector<double> ks{1, 2, 4, 8, 16};
    auto a = estimate_cluster_decay(mp, 4096, ks, 40, 5, {Method::automatic, 1});
    auto b = estimate_cluster_decay(mp, 4096, ks, 40, 5, {Method::automatic, 3});
    CHECK(a.monotone);
    REQUIRE(a.rows.size() == ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
        CHECK(a.rows[i].hits == b.rows[i].hits);
        CHECK(a.rows[i].ci.lo <= a.rows[i].p_hat);
        CHECK(a.rows[i].ci.hi >= a.rows[i].p_hat);
        if (i) CHECK(a.rows[i].p_hat <= a.rows[i - 1].p_hat);
    }
    for (std::size_t r = 0; r < a.reps.size(); ++r) {
        CHECK(a.reps[r].origin_size == b.reps[r].origin_size);
        CHECK(a.reps[r].second <= a.reps[r].largest);
    }
}

TEST_CASE("component sizes and summaries") {
    auto mp = ref();
    auto rows = sample_component_sizes(mp, {1024, 2048}, 12, 3, {Method::automatic, 2});
    CHECK(rows.size() == 24);
    for (auto& r : rows) {
        CHECK(r.second <= r.largest);
        CHECK(r.largest <= r.vertices);
    }
    auto again = sample_component_sizes(mp, {1024, 2048}, 12, 3, {Method::automatic, 1});
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].largest == again[i].largest);

    std::vector<SizeRep> fake;
    for (int i = 0; i < 5; ++i) fake.push_back({100, i, 0, 100, 50, std::size_t(i + 1)});
    auto s = summarize_second(fake);
    REQUIRE(s.size() == 1);
    CHECK(s[0].median == 3);
    CHECK(s[0].q25 == 2);
    CHECK(s[0].q75 == 4);
    auto gnt = summarize_giant(fake);
    CHECK(gnt[0].mean == doctest::Approx(0.5));
    CHECK(gnt[0].stddev == doctest::Approx(0));
}

TEST_CASE("seeds and output") {
    CHECK(replicate_seed(1, 256, 0) != replicate_seed(1, 256, 1));
    CHECK(replicate_seed(1, 256, 0) != replicate_seed(1, 512, 0));
    CHECK(replicate_seed(1, 256, 0) == replicate_seed(1, 256, 0));
    CHECK(fmt_num(0.5) == "0.5");
    CHECK(fmt_num(INFINITY) == "inf");
    CHECK(fmt_num(-INFINITY) == "-inf");
    std::ostringstream os;
    write_csv(os, {"a", "b"}, {{"1", "2"}, {"3", "4"}});
    CHECK(os.str() == "a,b\n1,2\n3,4\n");
    std::ostringstream sv;
    write_fit_svg(sv, "t", {{1, 2, 3, 4}, {1, 2, 3, 4}},
                  fit_slope({1, 2, 3, 4}, {1, 2, 3, 4}, Transform::identity, Transform::identity, 0));
    CHECK(sv.str().find("<svg") != std::string::npos);
}
