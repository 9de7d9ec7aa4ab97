#include "ksrg/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ksrg/components.hpp"
#include "ksrg/exponents.hpp"
#include "ksrg/rng.hpp"

namespace ksrg {

double lambda_star(double rho) {
    if (!(rho > 0 && rho < 1)) throw std::domain_error("lambda_star needs rho in (0,1)");
    return -std::log1p(-rho) / rho;
}

long BackboneParams::num_boxes() const { return static_cast<long>(std::llround(n_prime / k)); }

std::size_t BackboneParams::s_ceil() const {
    return static_cast<std::size_t>(std::max(1.0, std::ceil(s_k - 1e-12 * s_k)));
}

BackboneParams backbone_constants(const ModelParams& mp, double k, double n) {
    mp.validate();
    if (!(k > 0) || !(n >= k)) throw ParamError("backbone needs 0 < k <= n");
    ExponentReport rep = exponent_report(mp);
    if (!(rep.zeta_hh > 0)) throw ParamError("backbone regime unavailable: zeta_hh <= 0 (needs tau < sigma + 2)");

    const int d = mp.d;
    const double s = mp.sigma_eff(), t1 = mp.tau.value() - 1;
    BackboneParams b;
    b.k = k;
    b.n = n;
    b.p = mp.p;
    b.boxes_per_side = static_cast<long>(std::floor(std::pow(n / k, 1.0 / d) + 1e-9));
    b.n_prime = k * std::pow(double(b.boxes_per_side), d);
    b.lambda_star_half = lambda_star(0.5);
    b.gamma_hh = rep.gamma_hh;
    b.zeta_hh = rep.zeta_hh;

    const double dd = d;
    if (mp.alpha.is_inf()) {
        b.C1 = std::pow(mp.beta * std::pow(dd, -dd / 2) * std::ldexp(1.0, -d) * std::pow(2.0, -2 * s), t1 / (1 + s));
    } else {
        const double a = mp.alpha.value();
        const double rhs = std::max(std::log(2.0), b.lambda_star_half);
        const double lhs = mp.p / 16 * std::pow(mp.beta, a) * std::pow(2.0, -a * d) * std::pow(dd, -a * dd / 2);
        const double e = (1 + s) * a - t1;
        b.C1 = std::pow(lhs / rhs, t1 / e);
    }
    b.w_hh = std::pow(b.C1, -1 / t1) * std::pow(k, b.gamma_hh);
    b.s_k = b.C1 / 16 * std::pow(k, b.zeta_hh);
    b.r_k_conn = 1 - std::pow(2.0, -1 / b.s_k);
    return b;
}

std::vector<std::vector<long>> snake_order(int d, long m) {
    if (d < 1 || m < 1) throw std::invalid_argument("snake_order needs d >= 1, m >= 1");
    std::vector<long> pw(d + 1, 1);
    for (int i = 1; i <= d; ++i) pw[i] = pw[i - 1] * m;
    std::vector<std::vector<long>> out(pw[d], std::vector<long>(d));
    for (long idx = 0; idx < pw[d]; ++idx) {
        long r = idx;
        for (int k = d - 1; k >= 0; --k) {
            long c = r / pw[k];
            r %= pw[k];
            if (c % 2 == 1) r = pw[k] - 1 - r;
            out[idx][k] = c;
        }
    }
    return out;
}

bool face_adjacent(const std::vector<long>& a, const std::vector<long>& b) {
    long diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += std::labs(a[i] - b[i]);
    return diff == 1;
}

EdgeOracle coin_oracle(const std::vector<MarkedVertex>& vs, const ModelParams& mp, std::uint64_t seed) {
    return [&vs, mp, seed](std::size_t i, std::size_t j) {
        if (i == j) return false;
        double pr = connection_prob(vs[i], vs[j], mp);
        return pr > 0 && edge_coin(seed, vs[i].id, vs[j].id) < pr;
    };
}

EdgeOracle graph_oracle(const SpatialGraph& g) {
    return [&g](std::size_t i, std::size_t j) {
        if (i == j) return false;
        Edge e{static_cast<std::uint32_t>(std::min(i, j)), static_cast<std::uint32_t>(std::max(i, j))};
        return std::binary_search(g.edges.begin(), g.edges.end(), e);
    };
}

double BackboneResult::box_distance(const std::vector<double>& x, std::size_t i) const {
    const double side = std::pow(bp.k, 1.0 / d);
    double s2 = 0;
    for (int c = 0; c < d; ++c) {
        double lo = -a_prime + boxes[i][c] * side, hi = lo + side;
        double e = x[c] < lo ? lo - x[c] : (x[c] > hi ? x[c] - hi : 0.0);
        s2 += e * e;
    }
    return std::sqrt(s2);
}

std::size_t BackboneResult::box_of(const std::vector<double>& x) const {
    std::size_t best = 0;
    double bd = box_distance(x, 0);
    for (std::size_t i = 1; i < boxes.size() && bd > 0; ++i) {
        double di = box_distance(x, i);
        if (di < bd) {
            bd = di;
            best = i;
        }
    }
    return best;
}

namespace {

// index of the box holding x, or -1 outside the centred box of volume n'
long box_index_inside(const BackboneResult& r, const std::vector<long>& rank_of, const std::vector<double>& x) {
    const long m = r.bp.boxes_per_side;
    const double side = std::pow(r.bp.k, 1.0 / r.d);
    long flat = 0;
    for (int c = r.d - 1; c >= 0; --c) {
        if (x[c] < -r.a_prime || x[c] > r.a_prime) return -1;
        long z = static_cast<long>(std::floor((x[c] + r.a_prime) / side));
        z = std::clamp(z, 0L, m - 1);
        flat = flat * m + z;
    }
    return rank_of[flat];
}

}  // namespace

BackboneResult construct_backbone(const std::vector<MarkedVertex>& vs, const ModelParams& mp, double n, double k,
                                  const EdgeOracle& adj) {
    BackboneResult r;
    r.bp = backbone_constants(mp, k, n);
    r.d = mp.d;
    r.a_prime = half_side(r.bp.n_prime, r.d);
    const long m = r.bp.boxes_per_side;
    r.boxes = snake_order(r.d, m);
    const std::size_t nb = r.boxes.size();

    // flat row-major grid index -> snake rank
    std::vector<long> rank_of(nb);
    for (std::size_t i = 0; i < nb; ++i) {
        long flat = 0;
        for (int c = r.d - 1; c >= 0; --c) flat = flat * m + r.boxes[i][c];
        rank_of[flat] = static_cast<long>(i);
    }

    const double wlo = r.bp.w_hh, whi = 2 * r.bp.w_hh;
    for (std::size_t i = 0; i < vs.size(); ++i)
        if (vs[i].w >= wlo && vs[i].w < whi) r.band.push_back(i);

    const std::size_t B = r.band.size();
    std::vector<long> box(B);
    std::vector<std::vector<std::size_t>> in_box(nb);  // positions in band
    for (std::size_t t = 0; t < B; ++t) {
        box[t] = box_index_inside(r, rank_of, vs[r.band[t]].x);
        if (box[t] >= 0) in_box[box[t]].push_back(t);
    }

    // components of the band graph
    UnionFind uf(B);
    for (std::size_t a = 0; a < B; ++a)
        for (std::size_t b = a + 1; b < B; ++b)
            if (adj(r.band[a], r.band[b])) uf.unite(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));

    // per-component box counts; pick the largest component meeting A_bb,
    // otherwise the one with the best minimum count for reporting
    std::vector<std::vector<std::size_t>> counts;
    std::vector<long> comp_slot(B, -1);
    std::vector<std::uint32_t> roots;
    for (std::size_t t = 0; t < B; ++t) {
        std::uint32_t root = uf.find(static_cast<std::uint32_t>(t));
        if (comp_slot[root] < 0) {
            comp_slot[root] = static_cast<long>(counts.size());
            counts.emplace_back(nb, 0);
            roots.push_back(root);
        }
        if (box[t] >= 0) ++counts[comp_slot[root]][box[t]];
    }
    const double sk = r.bp.s_k;
    long chosen = -1, fallback = -1;
    std::size_t best_min = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        std::size_t mn = *std::min_element(counts[c].begin(), counts[c].end());
        bool ok = static_cast<double>(mn) >= sk;
        std::size_t sz = uf.size_of(roots[c]);
        if (ok && (chosen < 0 || sz > uf.size_of(roots[chosen]))) chosen = static_cast<long>(c);
        if (fallback < 0 || mn > best_min) {
            fallback = static_cast<long>(c);
            best_min = mn;
        }
    }
    r.holds_A_bb = chosen >= 0;
    r.per_box_members.assign(nb, {});
    long report = r.holds_A_bb ? chosen : fallback;
    if (report >= 0) {
        r.per_box_counts = counts[report];
        for (std::size_t t = 0; t < B; ++t) {
            if (comp_slot[uf.find(static_cast<std::uint32_t>(t))] != report) continue;
            if (r.holds_A_bb) r.backbone_component.push_back(r.band[t]);
            if (box[t] >= 0) r.per_box_members[box[t]].push_back(r.band[t]);
        }
    } else {
        r.per_box_counts.assign(nb, 0);
    }
    if (!r.holds_A_bb)
        for (auto& v : r.per_box_members) v.clear();

    // greedy chain: largest component inside Q_1, then everything in the next
    // box adjacent to the previous layer
    std::vector<std::size_t> cur;
    {
        const auto& q1 = in_box[0];
        UnionFind u1(q1.size());
        for (std::size_t a = 0; a < q1.size(); ++a)
            for (std::size_t b = a + 1; b < q1.size(); ++b)
                if (adj(r.band[q1[a]], r.band[q1[b]])) u1.unite(uint32_t(a), uint32_t(b));
        std::uint32_t best = 0;
        std::size_t bs = 0;
        for (std::size_t a = 0; a < q1.size(); ++a) {
            std::uint32_t root = u1.find(uint32_t(a));
            if (u1.size_of(root) > bs) {
                bs = u1.size_of(root);
                best = root;
            }
        }
        for (std::size_t a = 0; a < q1.size(); ++a)
            if (bs > 0 && u1.find(uint32_t(a)) == best) cur.push_back(q1[a]);
    }
    r.greedy_sizes.push_back(cur.size());
    bool chain_ok = static_cast<double>(cur.size()) >= sk;
    for (std::size_t i = 1; i < nb; ++i) {
        std::vector<std::size_t> next;
        for (std::size_t t : in_box[i])
            for (std::size_t s : cur)
                if (adj(r.band[t], r.band[s])) {
                    next.push_back(t);
                    break;
                }
        cur.swap(next);
        r.greedy_sizes.push_back(cur.size());
        if (static_cast<double>(cur.size()) < sk) chain_ok = false;
    }
    r.greedy_success = chain_ok;
    return r;
}

BackboneResult construct_backbone(const SpatialGraph& g, double k) {
    return construct_backbone(g.vertices, g.params, g.volume_n, k, graph_oracle(g));
}

std::vector<std::size_t> nearest_backbone_set(const std::vector<MarkedVertex>& vs, const BackboneResult& r,
                                              std::size_t u) {
    if (!r.holds_A_bb) throw std::logic_error("nearest_backbone_set: backbone event A_bb does not hold");
    std::size_t q = r.box_of(vs.at(u).x);
    std::vector<std::size_t> mem = r.per_box_members[q];
    std::stable_sort(mem.begin(), mem.end(), [&](std::size_t a, std::size_t b) { return vs[a].w > vs[b].w; });
    mem.resize(std::min(mem.size(), r.bp.s_ceil()));
    return mem;
}

int ladder_top(double m_w, double w_hh) {
    int j = -1;
    while (std::ldexp(m_w, j + 2) < w_hh) ++j;
    return j;
}

LadderBox ladder_box(const std::vector<double>& x, int j, double m_w, const ModelParams& mp, double n) {
    const int d = mp.d;
    const double s = mp.sigma_eff();
    const double vol = mp.beta * std::pow(2.0, -s) * std::pow(double(d), -d / 2.0) * std::pow(std::ldexp(m_w, j), s + 1);
    const double h = 0.5 * std::pow(vol, 1.0 / d), a = half_side(n, d);
    LadderBox b;
    b.lo.resize(d);
    b.hi.resize(d);
    for (int c = 0; c < d; ++c) {
        b.lo[c] = std::max(x[c] - h, -a);
        b.hi[c] = std::min(x[c] + h, a);
    }
    b.wlo = std::ldexp(m_w, j);
    b.whi = std::ldexp(m_w, j + 1);
    return b;
}

std::optional<std::vector<std::size_t>> mark_ladder_path(const std::vector<MarkedVertex>& vs, const ModelParams& mp,
                                                         double n, const BackboneResult& r, std::size_t u,
                                                         double m_w, const EdgeOracle& adj) {
    if (!r.holds_A_bb) throw std::logic_error("mark_ladder_path: backbone event A_bb does not hold");
    std::vector<std::size_t> path{u};
    const int top = ladder_top(m_w, r.bp.w_hh);
    for (int j = 1; j <= top; ++j) {
        LadderBox b = ladder_box(vs[u].x, j, m_w, mp, n);
        std::optional<std::size_t> hit;
        for (std::size_t v = 0; v < vs.size() && !hit; ++v) {
            if (vs[v].w < b.wlo || vs[v].w >= b.whi) continue;
            bool inside = true;
            for (int c = 0; c < mp.d && inside; ++c) inside = vs[v].x[c] >= b.lo[c] && vs[v].x[c] <= b.hi[c];
            if (inside && adj(path.back(), v)) hit = v;
        }
        if (!hit) return std::nullopt;
        path.push_back(*hit);
    }
    for (std::size_t v : nearest_backbone_set(vs, r, u))
        if (adj(path.back(), v)) {
            path.push_back(v);
            return path;
        }
    return std::nullopt;
}

}  // namespace ksrg
