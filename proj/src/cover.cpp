#include "ksrg/cover.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ksrg/rng.hpp"
#include "ksrg/sampler.hpp"

namespace ksrg {

namespace {
constexpr double kE = std::numbers::e;
}

double cover_nu(int d) { return kE * std::pow(double(d), d / 2.0) * std::ldexp(1.0, 3 * d); }

double s_of_wbar(double wbar, const ModelParams& mp) {
    double base = std::ldexp(1.0, mp.d) * mp.beta * wbar;
    if (mp.alpha.is_inf()) return base;
    return std::pow(base, 1.0 / (1.0 - 1.0 / mp.alpha.value()));
}

double wbar_lower_bound(const ModelParams& mp) {
    return std::max(std::ldexp(1.0, mp.d) * std::pow(double(mp.d), mp.d / 2.0) / mp.beta, 1.0);
}

double Box::volume() const {
    double v = 1;
    for (std::size_t k = 0; k < lo.size(); ++k) v *= std::max(0.0, hi[k] - lo[k]);
    return v;
}

Box cube(const std::vector<double>& x, double s) {
    const int d = static_cast<int>(x.size());
    double h = 0.5 * std::pow(s, 1.0 / d);
    Box b;
    b.lo.resize(d);
    b.hi.resize(d);
    for (int k = 0; k < d; ++k) {
        b.lo[k] = x[k] - h;
        b.hi[k] = x[k] + h;
    }
    return b;
}

bool interiors_overlap(const Box& a, const Box& b, double tol) {
    for (std::size_t k = 0; k < a.lo.size(); ++k)
        if (std::min(a.hi[k], b.hi[k]) - std::max(a.lo[k], b.lo[k]) <= tol) return false;
    return true;
}

double intersection_volume(const Box& a, const Box& b) {
    double v = 1;
    for (std::size_t k = 0; k < a.lo.size(); ++k) v *= std::max(0.0, std::min(a.hi[k], b.hi[k]) - std::max(a.lo[k], b.lo[k]));
    return v;
}

std::vector<long> cell_center_of(const Point& x, double n, int d) {
    const double a = half_side(n, d);
    const long zmin = static_cast<long>(std::ceil(-a)), zmax = static_cast<long>(std::floor(a));
    std::vector<long> z(d);
    for (int k = 0; k < d; ++k) {
        // nearest integer, half-integers to the lower centre
        long r = static_cast<long>(std::ceil(x[k] - 0.5));
        z[k] = std::clamp(r, zmin, zmax);
    }
    return z;
}

Box cell_region(const std::vector<long>& z, double n, int d) {
    const double a = half_side(n, d);
    const long zmin = static_cast<long>(std::ceil(-a)), zmax = static_cast<long>(std::floor(a));
    Box b;
    b.lo.resize(d);
    b.hi.resize(d);
    for (int k = 0; k < d; ++k) {
        b.lo[k] = z[k] == zmin ? -a : z[k] - 0.5;
        b.hi[k] = z[k] == zmax ? a : z[k] + 0.5;
    }
    return b;
}

std::vector<Cell> occupied_cells(const std::vector<Point>& pts, double n, int d) {
    std::vector<std::pair<std::vector<long>, std::size_t>> keyed;
    keyed.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) keyed.emplace_back(cell_center_of(pts[i], n, d), i);
    std::sort(keyed.begin(), keyed.end());
    std::vector<Cell> cells;
    for (auto& [z, i] : keyed) {
        if (cells.empty() || cells.back().z != z) {
            Cell c;
            c.z = z;
            c.region = cell_region(z, n, d);
            cells.push_back(std::move(c));
        }
        cells.back().points.push_back(i);
    }
    return cells;
}

namespace {

// Largest s' with a violation |S cap box(x,s')| > e s' among s' >= s_from,
// or 0 when none. Violations for a fixed centre form half-open intervals
// [t_k, min(t_{k+1}, c_k/e)). A centre with c points in reach can only
// violate below c/e, so centres go in decreasing c and the scan stops early.
double max_violation(const std::vector<Point>& pts, int d, double s_from, bool first_only) {
    const std::size_t N = pts.size();
    if (N == 0) return 0;
    const double smax = N / kE;
    if (s_from >= smax) return 0;
    const double R = 0.5 * std::pow(smax, 1.0 / d);

    std::vector<std::size_t> ord(N);
    for (std::size_t i = 0; i < N; ++i) ord[i] = i;
    std::sort(ord.begin(), ord.end(), [&](auto a, auto b) { return pts[a][0] < pts[b][0]; });
    std::vector<double> c0(N);
    for (std::size_t i = 0; i < N; ++i) c0[i] = pts[ord[i]][0];

    std::vector<long> xlo(d), xhi(d);
    for (int k = 0; k < d; ++k) {
        double lo = pts[0][k], hi = pts[0][k];
        for (const auto& p : pts) {
            lo = std::min(lo, p[k]);
            hi = std::max(hi, p[k]);
        }
        xlo[k] = static_cast<long>(std::ceil(lo - R));
        xhi[k] = static_cast<long>(std::floor(hi + R));
    }

    // Chebyshev distance from integer centre x to the point at sorted slot i
    auto cheb = [&](const std::vector<long>& x, std::size_t i) {
        const Point& y = pts[ord[i]];
        double m = 0;
        for (int k = 0; k < d; ++k) m = std::max(m, std::fabs(y[k] - double(x[k])));
        return m;
    };
    auto range = [&](double x0, double h) {
        auto b = std::lower_bound(c0.begin(), c0.end(), x0 - h) - c0.begin();
        auto e = std::upper_bound(c0.begin(), c0.end(), x0 + h) - c0.begin();
        return std::pair<std::size_t, std::size_t>(b, e);
    };

    struct Centre {
        std::size_t reach;
        std::vector<long> x;
    };
    std::vector<Centre> centres;
    std::vector<long> x(xlo);
    while (true) {
        auto [b, e] = range(double(x[0]), R);
        std::size_t c = 0;
        if (d == 1) c = e - b;
        else
            for (auto i = b; i < e; ++i) c += cheb(x, i) <= R;
        if (double(c) / kE > s_from) centres.push_back({c, x});
        int k = 0;
        while (k < d && ++x[k] > xhi[k]) {
            x[k] = xlo[k];
            ++k;
        }
        if (k == d) break;
    }
    std::stable_sort(centres.begin(), centres.end(), [](auto& a, auto& b) { return a.reach > b.reach; });

    double best = 0;
    std::vector<double> t;
    for (const auto& cen : centres) {
        const double bound = double(cen.reach) / kE;
        if (bound <= std::max(best, s_from)) break;
        // only t < bound can open a violation; the cap keeps min(next, c/e) intact
        const double h = 0.5 * std::pow(bound, 1.0 / d);
        auto [b, e] = range(double(cen.x[0]), h);
        t.clear();
        for (auto i = b; i < e; ++i) {
            double m = cheb(cen.x, i);
            if (m > R) continue;
            double v = 2 * m;
            double vd = v;
            for (int k = 1; k < d; ++k) vd *= v;
            if (vd < bound) t.push_back(vd);
        }
        std::sort(t.begin(), t.end());
        std::size_t i = 0;
        while (i < t.size()) {
            std::size_t j = i;
            while (j < t.size() && t[j] == t[i]) ++j;
            const double tk = t[i], c = double(j);
            const double next = j < t.size() ? t[j] : INFINITY;
            const double top = std::min(next, c / kE);
            if (top > std::max(tk, s_from)) best = std::max(best, top);
            i = j;
        }
        if (first_only && best > 0) return best;
    }
    return best;
}

}  // namespace

double expandability_threshold(const std::vector<Point>& pts, int d) { return max_violation(pts, d, 0, false); }

bool is_expandable(const std::vector<Point>& pts, double s, int d) {
    if (!(s > 0)) throw std::invalid_argument("is_expandable needs s > 0");
    return max_violation(pts, d, s, true) == 0;
}

std::optional<std::vector<std::size_t>> pigeonhole_split(const std::vector<std::size_t>& counts, double nu,
                                                         double delta) {
    double L = 0;
    for (auto c : counts) L += double(c);
    if (!(double(counts.size()) < L * (1 - delta) / nu)) return std::nullopt;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (double(counts[i]) >= nu) idx.push_back(i);
    return idx;
}

namespace {

void finish_covered_volume(CoverResult& r) {
    const double a = half_side(r.n, r.d);
    Box domain;
    domain.lo.assign(r.d, -a);
    domain.hi.assign(r.d, a);
    r.covered_region_volume = 0;
    for (const auto& b : r.boxes) r.covered_region_volume += intersection_volume(b, domain);
}

CoverResult proper_cover(std::vector<Cell> cells, std::size_t L, double n, int d) {
    CoverResult r;
    r.kind = CoverResult::Kind::proper;
    r.d = d;
    r.n = n;
    r.input_size = L;
    r.cells = std::move(cells);
    for (std::size_t i = 0; i < r.cells.size(); ++i) {
        r.allocation.push_back(static_cast<long>(i));
        r.boxes.push_back(r.cells[i].region);
        r.box_label.push_back(i);
        r.box_volume.push_back(r.cells[i].region.volume());
    }
    finish_covered_volume(r);
    return r;
}

std::vector<double> as_point(const std::vector<long>& z) { return {z.begin(), z.end()}; }

}  // namespace

CoverResult cover_expansion(const std::vector<Point>& pts, double n, int d) {
    CoverResult r;
    r.kind = CoverResult::Kind::expanded;
    r.d = d;
    r.n = n;
    r.input_size = pts.size();
    r.cells = occupied_cells(pts, n, d);
    const double nu = cover_nu(d);

    std::vector<std::size_t> big;  // label -> cell index
    for (std::size_t i = 0; i < r.cells.size(); ++i)
        if (double(r.cells[i].points.size()) >= nu) big.push_back(i);
    const std::size_t m = big.size();
    std::vector<double> ell(m);
    std::vector<std::vector<double>> z(m);
    for (std::size_t j = 0; j < m; ++j) {
        ell[j] = double(r.cells[big[j]].points.size());
        z[j] = as_point(r.cells[big[j]].z);
        r.expansion_input_points += r.cells[big[j]].points.size();
    }

    std::vector<std::size_t> alloc(m);
    for (std::size_t j = 0; j < m; ++j) alloc[j] = j;
    std::vector<double> vol(m);
    std::vector<double> half(m);
    const double sqrt_d = std::sqrt(double(d));
    const std::size_t round_cap = 1000 * static_cast<std::size_t>(std::ceil(double(r.expansion_input_points) / nu)) + 1000;

    auto overlap = [&](std::size_t a, std::size_t b) {
        for (int k = 0; k < d; ++k) {
            double hs = half[a] + half[b];
            if (!(std::fabs(z[a][k] - z[b][k]) < hs * (1 - 1e-12))) return false;
        }
        return true;
    };

    std::size_t rounds = 0;
    while (true) {
        std::fill(vol.begin(), vol.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i) vol[alloc[i]] += ell[i] / nu;
        std::vector<std::size_t> J;
        for (std::size_t j = 0; j < m; ++j)
            if (vol[j] > 0) {
                J.push_back(j);
                half[j] = 0.5 * std::pow(vol[j], 1.0 / d);
            }
        auto larger = [&](std::size_t a, std::size_t b) { return vol[a] > vol[b] * (1 + 1e-12); };
        std::optional<std::size_t> j1;
        for (std::size_t x = 0; x < J.size(); ++x) {
            if (j1 && !larger(J[x], *j1)) continue;
            bool any = false;
            for (std::size_t y = 0; y < J.size() && !any; ++y)
                if (x != y && overlap(J[x], J[y])) any = true;
            if (any) j1 = J[x];
        }
        if (!j1) break;
        std::optional<std::size_t> j2;
        for (auto j : J) {
            if (j == *j1 || !overlap(j, *j1)) continue;
            if (!j2 || larger(j, *j2)) j2 = j;
        }
        const double reach = sqrt_d * std::pow(vol[*j1], 1.0 / d);
        for (std::size_t i = 0; i < m; ++i) {
            if (alloc[i] != *j2) continue;
            double dist = std::sqrt(dist2(z[i], z[*j1]));
            alloc[i] = dist <= reach * (1 + 1e-12) ? *j1 : i;
        }
        if (++rounds > round_cap) throw std::logic_error("cover expansion failed to terminate");
    }
    r.rounds = rounds;

    std::vector<long> box_of_label(m, -1);
    for (std::size_t j = 0; j < m; ++j) {
        if (vol[j] <= 0) continue;
        box_of_label[j] = static_cast<long>(r.boxes.size());
        r.boxes.push_back(cube(z[j], vol[j]));
        r.box_label.push_back(big[j]);
        r.box_volume.push_back(vol[j]);
    }
    r.allocation.assign(r.cells.size(), -1);
    for (std::size_t i = 0; i < m; ++i) r.allocation[big[i]] = box_of_label[alloc[i]];
    finish_covered_volume(r);
    return r;
}

CoverResult cover(const std::vector<Point>& pts, double n, double wbar, const ModelParams& mp) {
    const int d = mp.d;
    const double wmin = wbar_lower_bound(mp);
    if (!(wbar > wmin))
        throw CoverError("w_bar = " + std::to_string(wbar) + " must exceed " + std::to_string(wmin));
    const double s = s_of_wbar(wbar, mp);
    if (!(s <= n)) throw CoverError("s(w_bar) = " + std::to_string(s) + " exceeds n = " + std::to_string(n));
    const double a = half_side(n, d);
    for (const auto& p : pts) {
        if (static_cast<int>(p.size()) != d) throw CoverError("point dimension mismatch");
        for (double c : p)
            if (!(std::fabs(c) <= a)) throw CoverError("point outside the volume-n box");
    }
    if (!is_expandable(pts, s, d))
        throw CoverError("point set is not s(w_bar)-expandable (s = " + std::to_string(s) + ")");

    auto cells = occupied_cells(pts, n, d);
    const double nu = cover_nu(d);
    if (double(cells.size()) >= double(pts.size()) / (2 * nu)) return proper_cover(std::move(cells), pts.size(), n, d);
    return cover_expansion(pts, n, d);
}

bool CoverCertificate::all() const {
    return disjoint && volume_rule && near && min_covered_volume && obs_min_box_volume && obs_sup_distance &&
           obs_dense_enlarged && obs_max_box_volume && rounds_bound;
}

CoverCertificate certify(const CoverResult& r, const std::vector<Point>& pts, std::optional<double> s,
                         double tol) {
    CoverCertificate c;
    const int d = r.d;
    const double dd2 = std::pow(double(d), d / 2.0);
    const double nu = cover_nu(d);

    const double need = double(r.input_size) / (std::ldexp(1.0, 4 * d + 1) * kE * dd2);
    c.min_covered_volume = r.covered_region_volume >= need - tol;

    for (std::size_t a = 0; a < r.boxes.size(); ++a)
        for (std::size_t b = a + 1; b < r.boxes.size(); ++b)
            if (interiors_overlap(r.boxes[a], r.boxes[b], tol)) c.disjoint = false;

    if (r.kind == CoverResult::Kind::proper) return c;

    c.rounds_limit = double(r.expansion_input_points) / nu;
    c.rounds_bound = double(r.rounds) <= c.rounds_limit + tol;

    std::vector<double> alloc_sum(r.boxes.size(), 0.0);
    for (std::size_t i = 0; i < r.cells.size(); ++i) {
        long b = r.allocation[i];
        if (b < 0) continue;
        alloc_sum[b] += double(r.cells[i].points.size());
    }
    for (std::size_t b = 0; b < r.boxes.size(); ++b) {
        const double V = r.box_volume[b];
        if (std::fabs(V - alloc_sum[b] / nu) > tol || std::fabs(r.boxes[b].volume() - V) > tol * std::max(1.0, V))
            c.volume_rule = false;
        if (V < 1 - tol) c.obs_min_box_volume = false;
        if (s && V > *s / (dd2 * std::ldexp(1.0, 3 * d)) + tol) c.obs_max_box_volume = false;

        std::vector<double> zj(r.cells[r.box_label[b]].z.begin(), r.cells[r.box_label[b]].z.end());
        Box big = cube(zj, dd2 * std::ldexp(1.0, 3 * d) * V);
        std::size_t inside = 0;
        for (const auto& p : pts) {
            bool in = true;
            for (int k = 0; k < d && in; ++k) in = p[k] >= big.lo[k] - tol && p[k] <= big.hi[k] + tol;
            if (in) ++inside;
        }
        if (double(inside) < kE * big.volume() - tol) c.obs_dense_enlarged = false;
    }
    for (std::size_t i = 0; i < r.cells.size(); ++i) {
        long b = r.allocation[i];
        if (b < 0) continue;
        const double V = r.box_volume[b];
        const auto& zi = r.cells[i].z;
        const auto& zj = r.cells[r.box_label[b]].z;
        double dz2 = 0;
        for (int k = 0; k < d; ++k) dz2 += double(zi[k] - zj[k]) * double(zi[k] - zj[k]);
        if (std::pow(dz2, d / 2.0) > dd2 * V + tol) c.near = false;
        const double lim = 4 * std::sqrt(double(d)) * std::pow(V, 1.0 / d);
        const double h = 0.5 * std::pow(V, 1.0 / d);
        for (auto pi : r.cells[i].points) {
            double far2 = 0;
            for (int k = 0; k < d; ++k) {
                double t = std::fabs(pts[pi][k] - double(zj[k])) + h;
                far2 += t * t;
            }
            if (std::sqrt(far2) > lim + tol) c.obs_sup_distance = false;
        }
    }
    return c;
}

GuaranteeResult connection_guarantee_check(const CoverResult& c, const std::vector<MarkedVertex>& L,
                                           double wbar, const ModelParams& mp, std::size_t trials,
                                           std::uint64_t seed) {
    GuaranteeResult g;
    g.trials = trials;
    if (trials == 0) return g;
    const int d = mp.d;
    const double a = half_side(c.n, d);
    Box domain;
    domain.lo.assign(d, -a);
    domain.hi.assign(d, a);
    std::vector<Box> parts;
    std::vector<double> cum;
    double total = 0;
    for (const auto& b : c.boxes) {
        Box q = b;
        for (int k = 0; k < d; ++k) {
            q.lo[k] = std::max(q.lo[k], -a);
            q.hi[k] = std::min(q.hi[k], a);
        }
        double v = q.volume();
        if (v <= 0) continue;
        parts.push_back(q);
        total += v;
        cum.push_back(total);
    }
    if (parts.empty()) throw CoverError("cover has empty covered region");

    std::size_t hits = 0;
    SplitMix64 rng(hash_key(seed, kSaltTrial));
    MarkedVertex v;
    v.x.resize(d);
    v.w = wbar;
    for (std::size_t t = 0; t < trials; ++t) {
        double pick = rng.uniform() * total;
        std::size_t bi = std::upper_bound(cum.begin(), cum.end(), pick) - cum.begin();
        if (bi >= parts.size()) bi = parts.size() - 1;
        for (int k = 0; k < d; ++k) v.x[k] = parts[bi].lo[k] + rng.uniform() * (parts[bi].hi[k] - parts[bi].lo[k]);
        double miss = 1;
        bool hit = false;
        for (const auto& u : L) {
            double pr = connection_prob(u, v, mp);
            miss *= 1 - pr;
            if (!hit && rng.uniform() < pr) hit = true;
        }
        g.min_probability = std::min(g.min_probability, 1 - miss);
        if (hit) ++hits;
    }
    g.frequency = double(hits) / double(trials);
    g.stderr_ = std::sqrt(std::max(g.frequency * (1 - g.frequency), 1e-300) / double(trials));
    return g;
}

}  // namespace ksrg
