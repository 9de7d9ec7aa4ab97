#include "ksrg/experiments.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "ksrg/components.hpp"
#include "ksrg/parallel.hpp"
#include "ksrg/rng.hpp"

namespace ksrg {

std::string to_string(Transform t) {
    switch (t) {
        case Transform::identity: return "identity";
        case Transform::log: return "log";
        case Transform::loglog: return "loglog";
    }
    return "?";
}

namespace {

double apply(Transform t, double v) {
    switch (t) {
        case Transform::identity: return v;
        case Transform::log: return std::log(v);
        case Transform::loglog: return std::log(std::log(v));
    }
    return v;
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    double h = (v.size() - 1) * q;
    std::size_t lo = static_cast<std::size_t>(std::floor(h));
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

}  // namespace

SlopeFit fit_slope(std::vector<double> x, std::vector<double> y, Transform xt, Transform yt, double exclude_frac) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_slope: x and y differ in length");
    if (x.size() < 4) throw std::invalid_argument("fit_slope: needs at least 4 points");
    std::vector<std::size_t> order(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::size_t drop = static_cast<std::size_t>(std::floor(std::clamp(exclude_frac, 0.0, 1.0) * x.size()));
    if (x.size() - drop < 2) throw std::invalid_argument("fit_slope: too few points after exclusion");

    std::vector<double> X, Y;
    for (std::size_t i = drop; i < order.size(); ++i) {
        double a = apply(xt, x[order[i]]), b = apply(yt, y[order[i]]);
        if (!std::isfinite(a) || !std::isfinite(b))
            throw std::invalid_argument("fit_slope: non-finite transformed value");
        X.push_back(a);
        Y.push_back(b);
    }
    const double m = X.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        mx += X[i];
        my += Y[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        sxx += (X[i] - mx) * (X[i] - mx);
        sxy += (X[i] - mx) * (Y[i] - my);
        syy += (Y[i] - my) * (Y[i] - my);
    }
    double span = *std::max_element(X.begin(), X.end()) - *std::min_element(X.begin(), X.end());
    if (!(span > 1e-12 * std::max(1.0, std::fabs(mx)))) throw std::invalid_argument("fit_slope: degenerate x range");

    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        double e = Y[i] - (f.intercept + f.slope * X[i]);
        ssr += e * e;
    }
    f.r_squared = syy > 0 ? std::clamp(1 - ssr / syy, 0.0, 1.0) : 1.0;
    f.x_transform = xt;
    f.y_transform = yt;
    f.points = X.size();
    return f;
}

Interval wilson_interval(std::size_t hits, std::size_t n, double z) {
    if (n == 0) return {0, 1};
    double ph = double(hits) / n, z2 = z * z;
    double den = 1 + z2 / n;
    double c = (ph + z2 / (2 * n)) / den;
    double h = z * std::sqrt(ph * (1 - ph) / n + z2 / (4.0 * n * n)) / den;
    return {std::max(0.0, c - h), std::min(1.0, c + h)};
}

std::uint64_t replicate_seed(std::uint64_t seed, double grid_value, int rep) {
    return hash_key(seed, kSaltRep, std::bit_cast<std::uint64_t>(grid_value), static_cast<std::uint64_t>(rep));
}

// --- decay

DecayResult estimate_cluster_decay(const ModelParams& mp, double n, const std::vector<double>& k_grid, int reps,
                                   std::uint64_t seed, const RunOptions& opt) {
    mp.validate();
    if (reps < 1) throw ParamError("reps must be positive");
    DecayResult res;
    res.reps.resize(reps);
    parallel_for(reps, opt.threads, [&](std::size_t r) {
        DecayRep& row = res.reps[r];
        row.rep = static_cast<int>(r);
        row.seed = replicate_seed(seed, n, row.rep);
        auto vs = sample_vertices(mp, n, row.seed);
        std::size_t origin = palm_insert(vs, mp, row.seed);
        UnionFind uf(vs.size());
        for_each_edge(vs, mp, n, row.seed, opt.method, [&](std::uint32_t a, std::uint32_t b) { uf.unite(a, b); });
        ClusterStats st = cluster_stats(uf, origin);
        row.origin_size = st.origin_cluster;
        row.largest = st.largest;
        row.second = st.second_largest;
        row.origin_in_giant = st.origin_in_largest;
    });
    for (double k : k_grid) {
        DecayRow d;
        d.k = k;
        d.reps = res.reps.size();
        for (auto& r : res.reps)
            if (static_cast<double>(r.origin_size) > k && !r.origin_in_giant) ++d.hits;
        d.p_hat = double(d.hits) / d.reps;
        d.ci = wilson_interval(d.hits, d.reps);
        res.rows.push_back(d);
    }
    std::vector<DecayRow> sorted = res.rows;
    std::stable_sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.k < b.k; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].hits > sorted[i - 1].hits) res.monotone = false;
    return res;
}

SlopeFit fit_decay(const std::vector<DecayRow>& rows, double exclude_frac) {
    std::vector<double> x, y;
    for (auto& r : rows)
        if (r.p_hat > 0 && r.p_hat < 1 && r.k > 0) {
            x.push_back(r.k);
            y.push_back(-std::log(r.p_hat));
        }
    return fit_slope(x, y, Transform::log, Transform::log, exclude_frac);
}

// --- component sizes

std::vector<SizeRep> sample_component_sizes(const ModelParams& mp, const std::vector<double>& n_grid, int reps,
                                            std::uint64_t seed, const RunOptions& opt) {
    mp.validate();
    if (reps < 1) throw ParamError("reps must be positive");
    std::vector<SizeRep> out(n_grid.size() * reps);
    parallel_for(out.size(), opt.threads, [&](std::size_t idx) {
        SizeRep& row = out[idx];
        row.n = n_grid[idx / reps];
        row.rep = static_cast<int>(idx % reps);
        row.seed = replicate_seed(seed, row.n, row.rep);
        auto vs = sample_vertices(mp, row.n, row.seed);
        UnionFind uf(vs.size());
        for_each_edge(vs, mp, row.n, row.seed, opt.method, [&](std::uint32_t a, std::uint32_t b) { uf.unite(a, b); });
        ClusterStats st = cluster_stats(uf);
        row.vertices = vs.size();
        row.largest = st.largest;
        row.second = st.second_largest;
    });
    return out;
}

std::vector<SecondRow> summarize_second(const std::vector<SizeRep>& rows) {
    std::map<double, std::vector<double>> by;
    for (auto& r : rows) by[r.n].push_back(static_cast<double>(r.second));
    std::vector<SecondRow> out;
    for (auto& [n, v] : by) {
        SecondRow s;
        s.n = n;
        s.reps = v.size();
        s.median = quantile(v, 0.5);
        s.q25 = quantile(v, 0.25);
        s.q75 = quantile(v, 0.75);
        out.push_back(s);
    }
    return out;
}

std::vector<SecondRow> estimate_second_largest(const ModelParams& mp, const std::vector<double>& n_grid, int reps,
                                               std::uint64_t seed, const RunOptions& opt) {
    return summarize_second(sample_component_sizes(mp, n_grid, reps, seed, opt));
}

SlopeFit fit_second(const std::vector<SecondRow>& rows, double exclude_frac) {
    std::vector<double> x, y;
    for (auto& r : rows) {
        x.push_back(r.n);
        y.push_back(r.median);
    }
    return fit_slope(x, y, Transform::loglog, Transform::log, exclude_frac);
}

std::vector<GiantRow> summarize_giant(const std::vector<SizeRep>& rows) {
    std::map<double, std::vector<double>> by;
    for (auto& r : rows) by[r.n].push_back(static_cast<double>(r.largest) / r.n);
    std::vector<GiantRow> out;
    for (auto& [n, v] : by) {
        GiantRow g;
        g.n = n;
        g.reps = v.size();
        double m = 0;
        for (double x : v) m += x;
        m /= v.size();
        double s2 = 0;
        for (double x : v) s2 += (x - m) * (x - m);
        g.mean = m;
        g.stddev = v.size() > 1 ? std::sqrt(s2 / (v.size() - 1)) : 0.0;
        out.push_back(g);
    }
    return out;
}

std::vector<GiantRow> estimate_giant_fraction(const ModelParams& mp, const std::vector<double>& n_grid, int reps,
                                              std::uint64_t seed, const RunOptions& opt) {
    return summarize_giant(sample_component_sizes(mp, n_grid, reps, seed, opt));
}

// --- downward boundary

namespace {

bool in_cube(const std::vector<double>& x, double a) {
    for (double c : x)
        if (c < -a || c > a) return false;
    return true;
}

// expected neighbours at |y|^d >= R for connection strength s: the integral
// of p rho(s / t) over t >= R
double tail_mass(double R, double s, const ModelParams& mp) {
    if (mp.alpha.is_inf()) return mp.p * std::max(0.0, s - R);
    const double a = mp.alpha.value();
    if (s <= R) return mp.p * std::pow(s, a) * std::pow(R, 1 - a) / (a - 1);
    return mp.p * ((s - R) + s / (a - 1));
}

}  // namespace

bool is_downward(const MarkedVertex& u, const MarkedVertex& v, double k) {
    const double a = half_side(k, static_cast<int>(u.x.size()));
    return u.w >= v.w && in_cube(u.x, a) && !in_cube(v.x, a);
}

double far_field_mass(const std::vector<double>& x, double w, const ModelParams& mp, double a) {
    const int d = mp.d;
    // distances (as volumes |y|^d) to the outside, with their weights
    std::vector<std::pair<double, double>> sides;
    if (d == 1) {
        sides = {{a - x[0], 1.0}, {a + x[0], 1.0}};
    } else {
        double m = 0;
        for (double c : x) m = std::max(m, std::fabs(c));
        double omega = std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1);
        sides = {{std::pow(a - m, d), omega}};
    }
    for (auto& sd : sides) sd.first = std::max(sd.first, 0.0);

    auto at = [&](double wp) {
        double s = mp.beta * kernel_value(w, wp, mp), acc = 0;
        for (auto [R, c] : sides) acc += c * tail_mass(R, s, mp);
        return acc;
    };
    if (mp.tau.is_inf()) return w >= 1 ? at(1.0) : 0.0;
    const double t1 = mp.tau.value() - 1;
    if (w <= 1) return 0.0;

    double Rmin = sides[0].first;
    for (auto [R, c] : sides) Rmin = std::min(Rmin, R);
    const double smax = mp.beta * kernel_value(w, w, mp);
    if (smax <= Rmin) {
        if (mp.alpha.is_inf()) return 0.0;
        if (mp.kernel == Kernel::interpolation) {
            // all strengths below the distance: p (beta w w'^sigma)^alpha R^{1-alpha}/(alpha-1)
            const double al = mp.alpha.value(), e = mp.sigma * al - t1;
            double pre = 0;
            for (auto [R, c] : sides) pre += c * std::pow(R, 1 - al);
            pre *= mp.p * std::pow(mp.beta * w, al) / (al - 1) * t1;
            double I = std::fabs(e) < 1e-12 ? std::log(w) : (std::pow(w, e) - 1) / e;
            return pre * I;
        }
    }
    auto f = [&](double t) {
        double wp = std::exp(t);
        return at(wp) * t1 * std::exp(-t1 * t);
    };
    return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, 0.0, std::log(w), 12, 1e-10);
}

BoundaryResult estimate_downward_boundary(const ModelParams& mp, const std::vector<double>& k_grid, int reps,
                                          std::uint64_t seed, const RunOptions& opt, double box_factor) {
    mp.validate();
    if (reps < 1) throw ParamError("reps must be positive");
    if (!(box_factor > 1)) throw ParamError("box factor must exceed 1");
    BoundaryResult res;
    res.reps.resize(k_grid.size() * reps);
    parallel_for(res.reps.size(), opt.threads, [&](std::size_t idx) {
        BoundaryRep& row = res.reps[idx];
        row.k = k_grid[idx / reps];
        row.rep = static_cast<int>(idx % reps);
        row.seed = replicate_seed(seed, row.k, row.rep);
        const double K = box_factor * row.k, aK = half_side(K, mp.d);
        auto vs = sample_vertices(mp, K, row.seed);
        std::vector<char> hit(vs.size(), 0);
        for_each_edge(vs, mp, K, row.seed, opt.method, [&](std::uint32_t a, std::uint32_t b) {
            if (is_downward(vs[a], vs[b], row.k)) hit[a] = 1;
            if (is_downward(vs[b], vs[a], row.k)) hit[b] = 1;
        });
        const double ak = half_side(row.k, mp.d);
        double est = 0;
        for (std::size_t i = 0; i < vs.size(); ++i) {
            if (!in_cube(vs[i].x, ak)) continue;
            if (hit[i]) {
                ++row.explicit_count;
                est += 1;
            } else {
                est += -std::expm1(-far_field_mass(vs[i].x, vs[i].w, mp, aK));
            }
        }
        row.estimate = est;
    });
    std::map<double, std::vector<double>> by;
    for (auto& r : res.reps) by[r.k].push_back(r.estimate);
    for (double k : k_grid) {
        auto& v = by[k];
        BoundaryRow b;
        b.k = k;
        b.reps = v.size();
        double m = 0;
        for (double x : v) m += x;
        m /= v.size();
        double s2 = 0;
        for (double x : v) s2 += (x - m) * (x - m);
        b.mean = m;
        b.stderr_ = v.size() > 1 ? std::sqrt(s2 / (v.size() - 1) / v.size()) : 0.0;
        res.rows.push_back(b);
    }
    return res;
}

SlopeFit fit_boundary(const std::vector<BoundaryRow>& rows, double exclude_frac) {
    std::vector<double> x, y;
    for (auto& r : rows) {
        x.push_back(r.k);
        y.push_back(r.mean);
    }
    return fit_slope(x, y, Transform::log, Transform::log, exclude_frac);
}

// --- output

std::string fmt_num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << '\n';
    };
    line(header);
    for (auto& r : rows) line(r);
}

void write_fit_svg(std::ostream& os, const std::string& title, const PlotSeries& pts, const SlopeFit& fit) {
    const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
    std::vector<double> X, Y;
    for (std::size_t i = 0; i < pts.x.size(); ++i) {
        double a = apply(fit.x_transform, pts.x[i]), b = apply(fit.y_transform, pts.y[i]);
        if (std::isfinite(a) && std::isfinite(b)) {
            X.push_back(a);
            Y.push_back(b);
        }
    }
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (!X.empty()) {
        x0 = *std::min_element(X.begin(), X.end());
        x1 = *std::max_element(X.begin(), X.end());
        y0 = *std::min_element(Y.begin(), Y.end());
        y1 = *std::max_element(Y.begin(), Y.end());
    }
    if (x1 - x0 < 1e-12) x1 = x0 + 1;
    if (y1 - y0 < 1e-12) y1 = y0 + 1;
    double py = 0.05 * (y1 - y0);
    y0 -= py;
    y1 += py;
    auto sx = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
    auto sy = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << L << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title
       << "  slope=" << fmt_num(fit.slope) << "  R2=" << fmt_num(fit.r_squared) << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << L << "\" y=\"" << H - B + 18 << "\" font-size=\"11\">" << fmt_num(x0) << "</text>\n";
    os << "<text x=\"" << W - R - 40 << "\" y=\"" << H - B + 18 << "\" font-size=\"11\">" << fmt_num(x1)
       << "</text>\n";
    os << "<text x=\"" << L - 60 << "\" y=\"" << H - B << "\" font-size=\"11\">" << fmt_num(y0) << "</text>\n";
    os << "<text x=\"" << L - 60 << "\" y=\"" << T + 10 << "\" font-size=\"11\">" << fmt_num(y1) << "</text>\n";
    os << "<text x=\"" << (W / 2) << "\" y=\"" << H - 12 << "\" font-size=\"12\">" << to_string(fit.x_transform)
       << "(x)</text>\n";
    os << "<text x=\"12\" y=\"" << (H / 2) << "\" font-size=\"12\">" << to_string(fit.y_transform) << "(y)</text>\n";
    for (std::size_t i = 0; i < X.size(); ++i)
        os << "<circle cx=\"" << sx(X[i]) << "\" cy=\"" << sy(Y[i]) << "\" r=\"4\" fill=\"steelblue\"/>\n";
    os << "<line x1=\"" << sx(x0) << "\" y1=\"" << sy(fit.intercept + fit.slope * x0) << "\" x2=\"" << sx(x1)
       << "\" y2=\"" << sy(fit.intercept + fit.slope * x1) << "\" stroke=\"firebrick\" stroke-width=\"2\"/>\n";
    os << "</svg>\n";
}

}  // namespace ksrg
