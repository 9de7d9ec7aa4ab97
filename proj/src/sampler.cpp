#include "ksrg/sampler.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include "ksrg/rng.hpp"

namespace ksrg {

std::string to_string(Method m) {
    switch (m) {
        case Method::automatic: return "auto";
        case Method::exact: return "exact";
        case Method::cell_list: return "cell_list";
        case Method::cell_list_keyed: return "cell_list_keyed";
    }
    return "?";
}

Method parse_method(const std::string& s) {
    if (s == "auto") return Method::automatic;
    if (s == "exact") return Method::exact;
    if (s == "cell_list") return Method::cell_list;
    if (s == "cell_list_keyed") return Method::cell_list_keyed;
    throw ParamError("unknown method '" + s + "' (auto, exact, cell_list)");
}

double half_side(double n, int d) { return 0.5 * std::pow(n, 1.0 / d); }

double pareto_mark(double u, const ExtReal& tau) {
    if (tau.is_inf()) return 1.0;
    return std::pow(u, -1.0 / (tau.value() - 1));
}

std::vector<MarkedVertex> sample_vertices(const ModelParams& mp, double n, std::uint64_t seed) {
    if (!(n > 0)) throw ParamError("volume n must be positive");
    const int d = mp.d;
    const double a = half_side(n, d);
    std::vector<MarkedVertex> out;

    auto mark_of = [&](std::uint64_t id) {
        return pareto_mark(to_unit_open0(hash_key(seed, kSaltMark, id)), mp.tau);
    };

    if (mp.vertex_set == VertexSet::lattice) {
        const long lo = static_cast<long>(std::ceil(-a)), hi = static_cast<long>(std::floor(a));
        if (hi < lo) return out;
        const long side = hi - lo + 1;
        long total = 1;
        for (int k = 0; k < d; ++k) total *= side;
        out.reserve(static_cast<std::size_t>(total));
        for (long idx = 0; idx < total; ++idx) {
            MarkedVertex v;
            v.x.resize(d);
            long r = idx;
            for (int k = d - 1; k >= 0; --k) {
                v.x[k] = static_cast<double>(lo + r % side);
                r /= side;
            }
            v.id = static_cast<std::uint64_t>(idx);
            v.w = mark_of(v.id);
            out.push_back(std::move(v));
        }
        return out;
    }

    SplitMix64 g(hash_key(seed, kSaltCount));
    std::poisson_distribution<long long> pois(n);
    const long long count = pois(g);
    out.reserve(static_cast<std::size_t>(count));
    for (long long i = 0; i < count; ++i) {
        MarkedVertex v;
        v.id = static_cast<std::uint64_t>(i);
        v.x.resize(d);
        for (int k = 0; k < d; ++k) v.x[k] = -a + 2 * a * to_unit(hash_key(seed, kSaltPos, v.id, k));
        v.w = mark_of(v.id);
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<MarkedVertex> sample_vertices_band(const ModelParams& mp, double n, std::uint64_t seed, double wlo,
                                               double whi) {
    if (!(n > 0)) throw ParamError("volume n must be positive");
    if (mp.vertex_set != VertexSet::poisson) throw ParamError("band sampling needs a Poisson vertex set");
    if (!(wlo >= 1) || !(whi > wlo)) throw ParamError("mark band must satisfy 1 <= wlo < whi");
    const int d = mp.d;
    const double a = half_side(n, d);
    std::vector<MarkedVertex> out;
    double mass;
    double ta = 0;
    if (mp.tau.is_inf()) {
        if (wlo > 1) return out;
        mass = 1.0;
    } else {
        ta = mp.tau.value() - 1;
        mass = std::pow(wlo, -ta) - (std::isinf(whi) ? 0.0 : std::pow(whi, -ta));
    }
    SplitMix64 g(hash_key(seed, kSaltCount, std::bit_cast<std::uint64_t>(wlo)));
    std::poisson_distribution<long long> pois(n * mass);
    const long long count = mass > 0 ? pois(g) : 0;
    out.reserve(static_cast<std::size_t>(count));
    for (long long i = 0; i < count; ++i) {
        MarkedVertex v;
        v.id = static_cast<std::uint64_t>(i);
        v.x.resize(d);
        for (int k = 0; k < d; ++k) v.x[k] = -a + 2 * a * to_unit(hash_key(seed, kSaltPos, v.id, k));
        if (mp.tau.is_inf()) {
            v.w = 1.0;
        } else {
            double u = to_unit(hash_key(seed, kSaltMark, v.id));
            v.w = std::pow(std::pow(wlo, -ta) - u * mass, -1.0 / ta);
            v.w = std::clamp(v.w, wlo, std::nextafter(whi, wlo));
        }
        out.push_back(std::move(v));
    }
    return out;
}

std::size_t palm_insert(std::vector<MarkedVertex>& vs, const ModelParams& mp, std::uint64_t seed) {
    MarkedVertex v;
    v.x.assign(mp.d, 0.0);
    v.id = kPalmId;
    v.w = pareto_mark(to_unit_open0(hash_key(seed, kSaltPalm)), mp.tau);
    vs.push_back(std::move(v));
    return vs.size() - 1;
}

namespace {

void edges_exact(const std::vector<MarkedVertex>& vs, const ModelParams& mp, std::uint64_t seed,
                 const EdgeSink& sink) {
    const std::size_t N = vs.size();
    const ConnEval ce(mp);
    const std::uint64_t key = coin_key(seed);
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = i + 1; j < N; ++j) {
            double pr = ce.at(dist_pow_d(vs[i].x, vs[j].x, mp.d), ce.kernel(vs[i].w, vs[j].w));
            if (pr <= 0) continue;
            if (edge_coin_keyed(key, vs[i].id, vs[j].id) < pr)
                sink(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
        }
    }
}

constexpr int kMaxCellDim = 8;
using Coord = std::array<std::uint64_t, kMaxCellDim>;

// Hierarchical grid over a cube containing all vertices. Vertices are sorted
// by (dyadic mark layer, Morton code) so that every cell at every level is a
// contiguous range inside its layer.
class CellSampler {
public:
    CellSampler(const std::vector<MarkedVertex>& vs, const ModelParams& mp, double n, std::uint64_t seed,
                const EdgeSink& sink, bool keyed)
        : mp_(mp), ce_(mp), d_(mp.d), seed_(seed), ckey_(coin_key(seed)), sink_(sink), keyed_(keyed) {
        double a = half_side(n, d_);
        lo_ = -a;
        double hi = a;
        for (const auto& v : vs)
            for (int k = 0; k < d_; ++k) {
                lo_ = std::min(lo_, v.x[k]);
                hi = std::max(hi, v.x[k]);
            }
        S_ = (hi - lo_) * (1 + 1e-12) + 1e-300;

        int maxL = 63 / d_;
        double v00 = mp.beta * kernel_value(2, 2, mp);
        L_ = level_for(v00, maxL);

        int top = 0;
        std::vector<int> layer(vs.size());
        for (std::size_t i = 0; i < vs.size(); ++i) {
            layer[i] = std::max(0, std::ilogb(vs[i].w));
            top = std::max(top, layer[i]);
        }
        nl_ = vs.empty() ? 0 : top + 1;

        std::vector<std::uint64_t> codes(vs.size());
        const double cells = std::ldexp(1.0, L_);
        const std::uint64_t cmax = (std::uint64_t{1} << L_) - 1;
        for (std::size_t i = 0; i < vs.size(); ++i) {
            Coord c{};
            for (int k = 0; k < d_; ++k) {
                double f = (vs[i].x[k] - lo_) / S_ * cells;
                std::uint64_t ck = f <= 0 ? 0 : static_cast<std::uint64_t>(f);
                c[k] = std::min(ck, cmax);
            }
            codes[i] = interleave(c, L_);
        }
        std::vector<std::uint32_t> order(vs.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
        std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
            if (layer[x] != layer[y]) return layer[x] < layer[y];
            if (codes[x] != codes[y]) return codes[x] < codes[y];
            return x < y;
        });
        layer_begin_.assign(nl_ + 1, 0);
        for (auto i : order) layer_begin_[layer[i] + 1]++;
        for (int l = 0; l < nl_; ++l) layer_begin_[l + 1] += layer_begin_[l];

        const std::size_t N = vs.size();
        code_.resize(N);
        w_.resize(N);
        id_.resize(N);
        hk_.resize(N);
        orig_.resize(N);
        x_.resize(N * d_);
        for (std::size_t r = 0; r < N; ++r) {
            auto i = order[r];
            code_[r] = codes[i];
            w_[r] = vs[i].w;
            id_[r] = vs[i].id;
            hk_[r] = mix64(ckey_ ^ vs[i].id);
            orig_[r] = i;
            for (int k = 0; k < d_; ++k) x_[r * d_ + k] = vs[i].x[k];
        }
    }

    void run() {
        for (int i = 0; i < nl_; ++i) {
            if (layer_begin_[i] == layer_begin_[i + 1]) continue;
            for (int j = i; j < nl_; ++j) {
                if (layer_begin_[j] == layer_begin_[j + 1]) continue;
                li_ = i;
                lj_ = j;
                vij_ = mp_.beta * kernel_value(std::ldexp(1.0, i + 1), std::ldexp(1.0, j + 1), mp_);
                target_ = level_for(vij_, L_);
                Coord zero{};
                visit(0, 0, zero, layer_begin_[i], layer_begin_[i + 1], 0, zero, layer_begin_[j],
                      layer_begin_[j + 1]);
            }
        }
    }

private:
    // finest level whose cells have volume at least v (0 if none)
    int level_for(double v, int maxL) const {
        int l = 0;
        while (l < maxL) {
            double side = S_ / std::ldexp(1.0, l + 1);
            if (std::pow(side, d_) >= v * (1 + 1e-9)) ++l;
            else break;
        }
        return l;
    }

    std::uint64_t interleave(const Coord& c, int L) const {
        std::uint64_t code = 0;
        for (int b = L - 1; b >= 0; --b)
            for (int k = 0; k < d_; ++k) code = (code << 1) | ((c[k] >> b) & 1);
        return code;
    }

    std::pair<std::size_t, std::size_t> child_range(std::size_t b, std::size_t e, std::uint64_t prefix,
                                                    int level) const {
        int shift = d_ * (L_ - level);
        std::uint64_t lo = prefix << shift, hi = (prefix + 1) << shift;
        auto first = code_.begin() + static_cast<std::ptrdiff_t>(b);
        auto last = code_.begin() + static_cast<std::ptrdiff_t>(e);
        auto p = std::lower_bound(first, last, lo);
        auto q = std::lower_bound(p, last, hi);
        return {static_cast<std::size_t>(p - code_.begin()), static_cast<std::size_t>(q - code_.begin())};
    }

    bool touching(const Coord& a, const Coord& b) const {
        for (int k = 0; k < d_; ++k) {
            std::uint64_t g = a[k] > b[k] ? a[k] - b[k] : b[k] - a[k];
            if (g > 1) return false;
        }
        return true;
    }

    double prob(std::size_t u, std::size_t v) const {
        double dpd;
        const double* xu = &x_[u * d_];
        const double* xv = &x_[v * d_];
        if (d_ == 1) {
            dpd = std::fabs(xu[0] - xv[0]);
        } else {
            double s = 0;
            for (int k = 0; k < d_; ++k) {
                double t = xu[k] - xv[k];
                s += t * t;
            }
            dpd = d_ == 2 ? s : std::pow(s, 0.5 * d_);
        }
        return ce_.at(dpd, ce_.kernel(w_[u], w_[v]));
    }

    void emit(std::size_t u, std::size_t v) { sink_(orig_[u], orig_[v]); }

    double coin(std::size_t u, std::size_t v) const {
        // same value as edge_coin_keyed(ckey_, id_u, id_v)
        return id_[u] < id_[v] ? to_unit(mix64(hk_[u] ^ id_[v])) : to_unit(mix64(hk_[v] ^ id_[u]));
    }

    void type_one(std::size_t ba, std::size_t ea, std::size_t bb, std::size_t eb, bool same) {
        for (std::size_t u = ba; u < ea; ++u) {
            const double wu = w_[u];
            const double* xu = &x_[u * d_];
            for (std::size_t v = same ? u + 1 : bb; v < eb; ++v) {
                double dpd;
                const double* xv = &x_[v * d_];
                if (d_ == 1) {
                    dpd = std::fabs(xu[0] - xv[0]);
                } else {
                    double s2 = 0;
                    for (int k = 0; k < d_; ++k) {
                        double t = xu[k] - xv[k];
                        s2 += t * t;
                    }
                    dpd = d_ == 2 ? s2 : std::pow(s2, 0.5 * d_);
                }
                double pr = ce_.at(dpd, ce_.kernel(wu, w_[v]));
                if (pr <= 0) continue;
                if (coin(u, v) < pr) emit(u, v);
            }
        }
    }

    // pairs of non-touching cells: Bernoulli(pbar) candidates by geometric
    // skipping, then thinning with the pair coin
    void type_two(int level, std::uint64_t pa, const Coord& ca, std::size_t ba, std::size_t ea, std::uint64_t pb,
                  const Coord& cb, std::size_t bb, std::size_t eb) {
        if (mp_.alpha.is_inf()) return;  // cells too far apart for any edge
        const double side = S_ / std::ldexp(1.0, level);
        double g2 = 0;
        for (int k = 0; k < d_; ++k) {
            std::uint64_t g = ca[k] > cb[k] ? ca[k] - cb[k] : cb[k] - ca[k];
            if (g > 1) {
                double gap = static_cast<double>(g - 1) * side;
                g2 += gap * gap;
            }
        }
        const double dmin_d = std::pow(g2, 0.5 * d_);
        const double pbar = connection_prob_at(dmin_d, vij_, mp_);
        if (pbar <= 0) return;
        if (keyed_) {
            for (std::size_t u = ba; u < ea; ++u)
                for (std::size_t v = bb; v < eb; ++v)
                    if (coin(u, v) < prob(u, v)) emit(u, v);
            return;
        }
        const std::size_t nb = eb - bb;
        const std::uint64_t total = static_cast<std::uint64_t>(ea - ba) * nb;
        SplitMix64 g(hash_key(seed_, kSaltBlock, (std::uint64_t(li_) << 32) | std::uint64_t(lj_),
                              hash_key(std::uint64_t(level), pa, pb)));
        const double logq = std::log1p(-pbar);
        std::uint64_t next = 0;
        while (true) {
            std::uint64_t pos = next;
            if (pbar < 1) {
                double skip = std::floor(std::log(g.uniform_open0()) / logq);
                if (skip >= double(total - next)) break;
                pos += static_cast<std::uint64_t>(skip);
            }
            if (pos >= total) break;
            next = pos + 1;
            std::size_t u = ba + pos / nb, v = bb + pos % nb;
            double pr = prob(u, v);
            if (coin(u, v) * pbar < pr) emit(u, v);
        }
    }

    void visit(int level, std::uint64_t pa, const Coord& ca, std::size_t ba, std::size_t ea, std::uint64_t pb,
               const Coord& cb, std::size_t bb, std::size_t eb) {
        const bool same_layer = li_ == lj_;
        const bool same_cell = same_layer && pa == pb;
        if (level == target_) {
            type_one(ba, ea, bb, eb, same_cell);
            return;
        }
        const int nch = 1 << d_;
        std::array<std::pair<std::size_t, std::size_t>, 1 << kMaxCellDim> ra{}, rb{};
        for (int t = 0; t < nch; ++t) {
            ra[t] = child_range(ba, ea, (pa << d_) | std::uint64_t(t), level + 1);
            if (same_cell) rb[t] = ra[t];
            else rb[t] = child_range(bb, eb, (pb << d_) | std::uint64_t(t), level + 1);
        }
        for (int s = 0; s < nch; ++s) {
            if (ra[s].first == ra[s].second) continue;
            Coord cs{};
            for (int k = 0; k < d_; ++k) cs[k] = 2 * ca[k] + ((s >> (d_ - 1 - k)) & 1);
            for (int t = same_cell ? s : 0; t < nch; ++t) {
                if (rb[t].first == rb[t].second) continue;
                Coord ct{};
                for (int k = 0; k < d_; ++k) ct[k] = 2 * cb[k] + ((t >> (d_ - 1 - k)) & 1);
                std::uint64_t qa = (pa << d_) | std::uint64_t(s), qb = (pb << d_) | std::uint64_t(t);
                if (touching(cs, ct))
                    visit(level + 1, qa, cs, ra[s].first, ra[s].second, qb, ct, rb[t].first, rb[t].second);
                else
                    type_two(level + 1, qa, cs, ra[s].first, ra[s].second, qb, ct, rb[t].first, rb[t].second);
            }
        }
    }

    const ModelParams& mp_;
    ConnEval ce_;
    int d_;
    std::uint64_t seed_, ckey_;
    const EdgeSink& sink_;
    bool keyed_;
    double lo_ = 0, S_ = 1;
    int L_ = 0, nl_ = 0;
    std::vector<std::size_t> layer_begin_;
    std::vector<std::uint64_t> code_;
    std::vector<double> w_, x_;
    std::vector<std::uint64_t> id_, hk_;
    std::vector<std::uint32_t> orig_;
    int li_ = 0, lj_ = 0, target_ = 0;
    double vij_ = 0;
};

}  // namespace

void for_each_edge(const std::vector<MarkedVertex>& vs, const ModelParams& mp, double n, std::uint64_t seed,
                   Method method, const EdgeSink& sink) {
    if (method == Method::automatic) method = vs.size() <= kExactMaxVertices ? Method::exact : Method::cell_list;
    if (method != Method::exact && mp.d > kMaxCellDim) method = Method::exact;
    if (method == Method::exact) {
        edges_exact(vs, mp, seed, sink);
        return;
    }
    CellSampler cs(vs, mp, n, seed, sink, method == Method::cell_list_keyed);
    cs.run();
}

SpatialGraph build_graph(std::vector<MarkedVertex> vs, const ModelParams& mp, double n, std::uint64_t seed,
                         Method method) {
    SpatialGraph g;
    g.volume_n = n;
    g.seed = seed;
    g.params = mp;
    for_each_edge(vs, mp, n, seed, method, [&](std::uint32_t u, std::uint32_t v) {
        g.edges.emplace_back(std::min(u, v), std::max(u, v));
    });
    std::sort(g.edges.begin(), g.edges.end());
    for (std::size_t i = 0; i < vs.size(); ++i)
        if (vs[i].id == kPalmId) g.palm_origin = i;
    g.vertices = std::move(vs);
    return g;
}

SpatialGraph sample_graph(const ModelParams& mp, double n, std::uint64_t seed, bool palm, Method method) {
    auto vs = sample_vertices(mp, n, seed);
    if (palm) palm_insert(vs, mp, seed);
    return build_graph(std::move(vs), mp, n, seed, method);
}

void write_graph(std::ostream& os, const SpatialGraph& g) {
    const auto& mp = g.params;
    os.precision(17);
    os << "# ksrg graph\n";
    os << "# d=" << mp.d << " tau=" << mp.tau.str() << " alpha=" << mp.alpha.str() << " sigma=" << mp.sigma
       << " kernel=" << to_string(mp.kernel) << " beta=" << mp.beta << " p=" << mp.p
       << " vertex_set=" << to_string(mp.vertex_set) << "\n";
    os << "# n=" << g.volume_n << " seed=" << g.seed << " vertices=" << g.vertices.size()
       << " edges=" << g.edges.size();
    if (g.palm_origin) os << " palm=" << *g.palm_origin;
    os << "\n";
    for (std::size_t i = 0; i < g.vertices.size(); ++i) {
        os << i;
        for (double c : g.vertices[i].x) os << ' ' << c;
        os << ' ' << g.vertices[i].w << '\n';
    }
    for (auto [u, v] : g.edges) os << u << ' ' << v << '\n';
}

}  // namespace ksrg
