#include "ksrg/profile.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "ksrg/parallel.hpp"
#include "ksrg/rng.hpp"

namespace ksrg {

SuppressedProfile make_suppressed_profile(const ModelParams& mp, double k, double gamma, double rho) {
    if (!(k > 0)) throw ParamError("profile needs k > 0");
    if (!(rho > 0)) throw ParamError("profile needs rho > 0");
    if (!(gamma >= 0)) throw ParamError("profile needs gamma >= 0");
    SuppressedProfile p;
    p.gamma = gamma;
    p.d = mp.d;
    p.r_k = std::pow(k / rho, 1.0 / mp.d) * std::sqrt(double(mp.d));
    p.C_beta = std::pow(2 * mp.beta, 1.0 / mp.d);
    return p;
}

double f_gamma(double z, const SuppressedProfile& p) {
    const double d = p.d, C = p.C_beta;
    if (z <= C) return 1.0;
    if (z <= p.r_k) return std::pow(z / C, p.gamma * d);
    return std::pow(z / C, d) * std::pow(p.r_k / C, -d * (1 - p.gamma));
}

ProfileClass classify(const std::vector<double>& x, double w, const SuppressedProfile& prof) {
    double r = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    double z = std::fabs(r - prof.r_k);
    bool in = r <= prof.r_k;
    bool below = z > prof.C_beta && w <= f_gamma(z, prof);
    if (in) return below ? ProfileClass::in_below : ProfileClass::in_above;
    return below ? ProfileClass::out_below : ProfileClass::out_above;
}

ProfilePartition classify_against_profile(const std::vector<MarkedVertex>& vs, const SuppressedProfile& prof) {
    ProfilePartition out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        switch (classify(vs[i].x, vs[i].w, prof)) {
            case ProfileClass::in_below: out.in_below.push_back(i); break;
            case ProfileClass::in_above: out.in_above.push_back(i); break;
            case ProfileClass::out_below: out.out_below.push_back(i); break;
            case ProfileClass::out_above: out.out_above.push_back(i); break;
        }
    }
    return out;
}

CrossBoundaryReport cross_boundary_edge_bound_check(const SuppressedProfile& prof, const ModelParams& mp,
                                                    std::size_t trials, std::uint64_t seed) {
    const double s = mp.sigma_eff();
    if (prof.gamma > 1 / (s + 1) * (1 + 1e-12))
        throw ParamError("cross-boundary bound needs gamma <= 1/(sigma+1)");
    if (!(prof.r_k > 2 * prof.C_beta)) throw ParamError("cross-boundary check needs r_k > 2 C_beta");
    const int d = mp.d;
    const double C = prof.C_beta, r = prof.r_k;
    const double cap = mp.alpha.is_inf() ? 0.0 : mp.p * std::pow(2.0, -mp.alpha.value());

    SplitMix64 g(hash_key(seed, kSaltTrial));
    std::normal_distribution<double> normal;
    auto direction = [&] {
        std::vector<double> u(d);
        double n2 = 0;
        do {
            n2 = 0;
            for (auto& c : u) {
                c = normal(g);
                n2 += c * c;
            }
        } while (n2 == 0);
        for (auto& c : u) c /= std::sqrt(n2);
        return u;
    };
    // log-uniform distance to the boundary in [lo, hi]
    auto logu = [&](double lo, double hi) { return lo * std::exp(g.uniform() * std::log(hi / lo)); };

    CrossBoundaryReport rep;
    rep.trials = trials;
    MarkedVertex u, v;
    u.x.resize(d);
    v.x.resize(d);
    for (std::size_t t = 0; t < trials; ++t) {
        double zu, zv;
        std::vector<double> du, dv;
        double wu, wv;
        if (t == 0) {
            // both vertices on the edge of the collar, unit marks
            zu = zv = C;
            du = direction();
            dv = du;
            wu = wv = 1.0;
        } else {
            const bool worst = t % 2 == 1;
            zu = std::nextafter(logu(C, r), r);
            zv = logu(C, 100 * r);
            if (zu <= C) zu = std::nextafter(C, r);
            if (zv <= C) zv = std::nextafter(C, 2 * C);
            du = direction();
            dv = worst ? du : direction();
            double fu = f_gamma(zu, prof), fv = f_gamma(zv, prof);
            wu = worst ? fu : std::pow(fu, g.uniform());
            wv = worst ? fv : std::pow(fv, g.uniform());
        }
        for (int c = 0; c < d; ++c) {
            u.x[c] = (r - zu) * du[c];
            v.x[c] = (r + zv) * dv[c];
        }
        u.w = wu;
        v.w = wv;
        double dp = dist_pow_d(u.x, v.x, d);
        double ratio = mp.beta * kernel_value(wu, wv, mp) / dp;
        double pr = connection_prob(u, v, mp);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
        rep.max_prob = std::max(rep.max_prob, pr);
        if (ratio > 0.5) ++rep.ratio_violations;
        if (pr > cap) ++rep.prob_violations;
    }
    return rep;
}

double expected_above_beyond(const SuppressedProfile& prof, const ModelParams& mp, double R) {
    if (mp.tau.is_inf()) return 0.0;
    if (!(R > prof.r_k + prof.C_beta)) throw ParamError("window must extend past the collar");
    const double d = mp.d, t1 = mp.tau.value() - 1;
    const double omega = std::pow(std::numbers::pi, d / 2) / std::tgamma(d / 2 + 1);
    auto f = [&](double t) {
        double rho = R + t;
        double fz = f_gamma(rho - prof.r_k, prof);
        return d * omega * std::pow(rho, d - 1) * std::pow(fz, -t1);
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate(f);
}

std::vector<ProfileCountRow> profile_count_slopes(const ModelParams& mp, const std::vector<double>& k_grid,
                                                  double gamma, int reps, std::uint64_t seed, double rho,
                                                  double window, unsigned threads) {
    mp.validate();
    if (reps < 1) throw ParamError("reps must be positive");
    if (!(window > 1)) throw ParamError("window must exceed 1");
    std::vector<ProfileCountRow> rows(k_grid.size() * reps);
    parallel_for(rows.size(), threads, [&](std::size_t idx) {
        const std::size_t ki = idx / reps;
        const int rep = static_cast<int>(idx % reps);
        const double k = k_grid[ki];
        SuppressedProfile prof = make_suppressed_profile(mp, k, gamma, rho);
        const double R = window * prof.r_k;
        const std::uint64_t rs = hash_key(seed, kSaltRep, std::bit_cast<std::uint64_t>(k), rep);

        auto all = sample_vertices(mp, std::pow(2 * R, mp.d), rs);
        std::vector<MarkedVertex> below;
        std::vector<char> inside;
        std::size_t above = 0;
        for (auto& v : all) {
            if (std::inner_product(v.x.begin(), v.x.end(), v.x.begin(), 0.0) > R * R) continue;
            ProfileClass c = classify(v.x, v.w, prof);
            if (c == ProfileClass::in_above || c == ProfileClass::out_above) {
                ++above;
            } else {
                inside.push_back(c == ProfileClass::in_below);
                below.push_back(std::move(v));
            }
        }
        all.clear();
        all.shrink_to_fit();

        std::size_t cross = 0;
        for_each_edge(below, mp, std::pow(2 * R, mp.d), rs, Method::automatic,
                      [&](std::uint32_t a, std::uint32_t b) { cross += inside[a] != inside[b]; });

        ProfileCountRow& row = rows[idx];
        row.k = k;
        row.rep = rep;
        row.count_above = static_cast<double>(above) + expected_above_beyond(prof, mp, R);
        row.edges_below_cross = cross;
    });
    return rows;
}

}  // namespace ksrg
