#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ksrg/model.hpp"
#include "ksrg/sampler.hpp"

namespace ksrg {

// survival-probability constant: rho = 1 - exp(-lambda rho) solved for lambda
double lambda_star(double rho);

struct BackboneParams {
    double k = 0, n = 0, n_prime = 0;
    long boxes_per_side = 0;  // n'/k = boxes_per_side^d
    double C1 = 0, w_hh = 0, s_k = 0, r_k_conn = 0;
    double lambda_star_half = 0;
    double gamma_hh = 0, zeta_hh = 0;
    double p = 1;

    long num_boxes() const;
    std::size_t s_ceil() const;
    // k >= k1, i.e. (1-p)^{s_k} <= 1/2
    bool k_above_k1() const { return r_k_conn <= p; }
};

// throws ParamError when zeta_hh <= 0 or k > n
BackboneParams backbone_constants(const ModelParams& mp, double k, double n);

// grid coordinates of m^d boxes in boustrophedon order
std::vector<std::vector<long>> snake_order(int d, long m);
bool face_adjacent(const std::vector<long>& a, const std::vector<long>& b);

// adjacency query on vertex indices
using EdgeOracle = std::function<bool(std::size_t, std::size_t)>;

// the coins of the exact sampler, evaluated lazily
EdgeOracle coin_oracle(const std::vector<MarkedVertex>& vs, const ModelParams& mp, std::uint64_t seed);
// lookup in an already sampled graph
EdgeOracle graph_oracle(const SpatialGraph& g);

struct BackboneResult {
    BackboneParams bp;
    int d = 1;
    double a_prime = 0;  // half side of the centred box of volume n'
    std::vector<std::vector<long>> boxes;  // snake order

    bool holds_A_bb = false;
    bool greedy_success = false;  // the box-by-box chain reached every box
    std::vector<std::size_t> band;                // vertices with mark in [w_hh, 2 w_hh)
    std::vector<std::size_t> backbone_component;  // sorted; empty without A_bb
    std::vector<std::size_t> per_box_counts;      // backbone (or best component) per box
    std::vector<std::vector<std::size_t>> per_box_members;
    std::vector<std::size_t> greedy_sizes;  // |V~_i|

    // box index containing x or nearest to it, lowest index on ties
    std::size_t box_of(const std::vector<double>& x) const;
    double box_distance(const std::vector<double>& x, std::size_t i) const;
};

BackboneResult construct_backbone(const std::vector<MarkedVertex>& vs, const ModelParams& mp, double n, double k,
                                  const EdgeOracle& adj);
BackboneResult construct_backbone(const SpatialGraph& g, double k);

// S(u); throws std::logic_error without A_bb
std::vector<std::size_t> nearest_backbone_set(const std::vector<MarkedVertex>& vs, const BackboneResult& r,
                                              std::size_t u);

struct LadderBox {
    std::vector<double> lo, hi;
    double wlo, whi;
};

// j* = max{j >= 0 : 2^{j+1} m_w < w_hh}, or -1 when no j qualifies
int ladder_top(double m_w, double w_hh);
// Q_j(x) intersected with the volume-n box, and I_j
LadderBox ladder_box(const std::vector<double>& x, int j, double m_w, const ModelParams& mp, double n);

// u = u_0, u_1..u_{j*}, and the final vertex in S(u); nullopt if a step finds
// no neighbour
std::optional<std::vector<std::size_t>> mark_ladder_path(const std::vector<MarkedVertex>& vs, const ModelParams& mp,
                                                         double n, const BackboneResult& r, std::size_t u,
                                                         double m_w, const EdgeOracle& adj);

}  // namespace ksrg
