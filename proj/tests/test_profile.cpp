#include <doctest.h>

#include <cmath>
#include <random>

#include "ksrg/experiments.hpp"
#include "ksrg/exponents.hpp"
#include "ksrg/profile.hpp"

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
}  // namespace

TEST_CASE("three pieces") {
    SuppressedProfile pr{0.5, 100, 4, 1};
    CHECK(f_gamma(2, pr) == 1);
    CHECK(f_gamma(16, pr) == doctest::Approx(2));
    CHECK(f_gamma(400, pr) == doctest::Approx(20));
    CHECK(f_gamma(4, pr) == 1);
    CHECK(f_gamma(4 + 1e-9, pr) == doctest::Approx(1));
    CHECK(f_gamma(100, pr) == doctest::Approx(5));
    CHECK(f_gamma(100 + 1e-9, pr) == doctest::Approx(5));
}

TEST_CASE("constructed profile") {
    ModelParams mp;
    mp.d = 2;
    mp.beta = 2;
    auto pr = make_suppressed_profile(mp, 40, 0.3, 0.1);
    CHECK(pr.r_k == doctest::Approx(20 * std::sqrt(2.0)));
    CHECK(pr.C_beta == doctest::Approx(2));
    CHECK(pr.gamma == 0.3);
}

TEST_CASE("monotone in z, ordered in gamma") {
    std::mt19937_64 g(1);
    std::uniform_real_distribution<double> u(0, 3);
    for (int d = 1; d <= 3; ++d) {
        SuppressedProfile lo{0.2, 500, 1.7, d}, hi{0.45, 500, 1.7, d};
        double prev = 0;
        for (double z = 0; z < 3000; z += 0.37) {
            double f = f_gamma(z, lo);
            CHECK(f >= 1);
            CHECK(f >= prev);
            prev = f;
            if (z > lo.C_beta && z <= lo.r_k) CHECK(f <= f_gamma(z, hi));
        }
    }
}

TEST_CASE("classification") {
    SuppressedProfile pr{0.4, 50, 2, 2};
    CHECK(classify({0.0, 0.0}, 1, pr) == ProfileClass::in_below);
    CHECK(classify({50.0, 0.0}, 2, pr) == ProfileClass::in_above);
    // the collar is always above, also for mark 1
    CHECK(classify({0.0, 51.0}, 1, pr) == ProfileClass::out_above);
    CHECK(classify({0.0, 49.0}, 1, pr) == ProfileClass::in_above);
    CHECK(classify({0.0, 53.0}, 1, pr) == ProfileClass::out_below);
    // equality is below
    double f = f_gamma(20, pr);
    CHECK(classify({30.0, 0.0}, f, pr) == ProfileClass::in_below);
    CHECK(classify({30.0, 0.0}, f * (1 + 1e-12), pr) == ProfileClass::in_above);

    ModelParams mp;
    mp.d = 2;
    auto vs = sample_vertices(mp, 20000, 3);
    auto part = classify_against_profile(vs, pr);
    CHECK(part.in_below.size() + part.in_above.size() + part.out_below.size() + part.out_above.size() == vs.size());
}

TEST_CASE("cross-boundary bound") {
    for (int d = 1; d <= 3; ++d) {
        for (double sigma : {0.0, 1.0, 2.5}) {
            ModelParams mp;
            mp.d = d;
            mp.sigma = sigma;
            mp.tau = 2.4;
            mp.alpha = 2.5;
            mp.beta = 1.3;
            double gmax = 1 / (sigma + 1);
            auto pr = make_suppressed_profile(mp, 4096, gmax, 0.1);
            auto rep = cross_boundary_edge_bound_check(pr, mp, 5000, 7);
            CHECK(rep.ratio_violations == 0);
            CHECK(rep.prob_violations == 0);
            CHECK(rep.max_ratio <= 0.5);
            CHECK(rep.max_prob <= std::pow(2.0, -2.5) + 1e-15);
            mp.alpha = kInf;
            auto t = cross_boundary_edge_bound_check(pr, mp, 5000, 7);
            CHECK(t.max_prob == 0);
            CHECK(t.prob_violations == 0);
            pr.gamma = gmax * 1.01;
            CHECK_THROWS_AS(cross_boundary_edge_bound_check(pr, mp, 10, 1), ParamError);
        }
    }
}

TEST_CASE("collar pair ratio") {
    for (int d = 1; d <= 3; ++d) {
        double beta = 1.7, C = std::pow(2 * beta, 1.0 / d);
        CHECK(beta / std::pow(2 * C, d) == doctest::Approx(std::pow(2.0, -d - 1)));
    }
}

TEST_CASE("tail beyond the window") {
    // d = 1: two half lines, P(W > f) = f^{-(tau-1)}
    ModelParams mp = ref();
    auto pr = make_suppressed_profile(mp, 256, 0.4, 0.1);
    double R = 3 * pr.r_k;
    const int N = 200000;
    double a = std::log(R - pr.r_k), b = std::log(1e12 * pr.r_k), h = (b - a) / N, s = 0;
    for (int i = 0; i <= N; ++i) {
        double z = std::exp(a + i * h);
        double v = std::pow(f_gamma(z, pr), -1.2) * z;
        s += (i == 0 || i == N ? 0.5 : 1.0) * v;
    }
    // past r_k, f = K z with K = C^{-1} (r_k / C)^{-(1-gamma)}; the z^{-1.2}
    // tail past the cutoff is closed form
    double T = 1e12 * pr.r_k, K = std::pow(pr.r_k / pr.C_beta, -0.6) / pr.C_beta;
    double oracle = 2 * s * h + 2 * std::pow(K, -1.2) * std::pow(T, -0.2) / 0.2;
    CHECK(expected_above_beyond(pr, mp, R) == doctest::Approx(oracle).epsilon(1e-4));
    mp.tau = kInf;
    CHECK(expected_above_beyond(pr, mp, R) == 0);
}

TEST_CASE("constant marks: only the collar is above") {
    ModelParams mp;
    mp.tau = kInf;
    mp.alpha = kInf;
    auto rows = profile_count_slopes(mp, {64, 256}, 0.5, 200, 3, 0.1, 3.0, 1);
    for (double k : {64.0, 256.0}) {
        double s = 0;
        int m = 0;
        for (auto& r : rows)
            if (r.k == k) s += r.count_above, ++m;
        // two collars of length 2 C_beta = 4
        CHECK(std::fabs(s / m - 8) < 4 * std::sqrt(8.0 / m));
    }
}

TEST_CASE("gamma zero: everything off the collar with a mark above 1 counts") {
    auto mp = ref();
    std::vector<double> ks{64, 128, 256, 512, 1024};
    auto rows = profile_count_slopes(mp, ks, 0.0, 10, 4, 0.1, 3.0, 1);
    std::vector<double> m(ks.size(), 0);
    for (auto& r : rows)
        for (std::size_t i = 0; i < ks.size(); ++i)
            if (r.k == ks[i]) m[i] += r.count_above / 10;
    auto f = fit_slope(ks, m, Transform::log, Transform::log, 0);
    CHECK(f.slope == doctest::Approx(1).epsilon(0.05));
}

TEST_CASE("reference above-count slope") {
    auto mp = ref();
    double g = exponent_report(mp).xg.gamma_star;
    std::vector<double> ks{64, 128, 256, 512, 1024, 2048};
    const int reps = 30;
    auto rows = profile_count_slopes(mp, ks, g, reps, 11, 0.1, 3.0, 1);
    std::vector<double> m(ks.size(), 0);
    for (auto& r : rows)
        for (std::size_t i = 0; i < ks.size(); ++i)
            if (r.k == ks[i]) m[i] += r.count_above / reps;
    auto f = fit_slope(ks, m, Transform::log, Transform::log);
    MESSAGE("above slope " << f.slope);
    CHECK(std::fabs(f.slope - 0.5) <= 0.1);
}

TEST_CASE("profile rows are reproducible and thread independent") {
    auto mp = ref();
    auto a = profile_count_slopes(mp, {64, 128}, 0.3, 4, 9, 0.1, 3.0, 1);
    auto b = profile_count_slopes(mp, {64, 128}, 0.3, 4, 9, 0.1, 3.0, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].count_above == b[i].count_above);
        CHECK(a[i].edges_below_cross == b[i].edges_below_cross);
    }
}
