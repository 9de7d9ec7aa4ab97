#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "ksrg/model.hpp"

namespace ksrg {

using Edge = std::pair<std::uint32_t, std::uint32_t>;

struct SpatialGraph {
    double volume_n = 0;
    std::vector<MarkedVertex> vertices;
    std::vector<Edge> edges;  // u < v, sorted
    std::uint64_t seed = 0;
    ModelParams params;
    std::optional<std::size_t> palm_origin;
};

// cell_list draws far-field candidates from block-keyed streams (same law as
// exact, different coins); cell_list_keyed decides every far pair with its own
// pair coin, so it reproduces exact edge for edge at quadratic cost
enum class Method { automatic, exact, cell_list, cell_list_keyed };
std::string to_string(Method m);
Method parse_method(const std::string& s);

inline constexpr std::size_t kExactMaxVertices = 5000;

// half side length of the volume-n box
double half_side(double n, int d);

std::vector<MarkedVertex> sample_vertices(const ModelParams& mp, double n, std::uint64_t seed);

// Poisson process restricted to marks in [wlo, whi); same law as filtering
// sample_vertices, but only the band is generated. Poisson vertex set only.
std::vector<MarkedVertex> sample_vertices_band(const ModelParams& mp, double n, std::uint64_t seed, double wlo,
                                               double whi);

// Pareto(tau-1) mark from a uniform in (0,1]; 1 when tau is infinite
double pareto_mark(double u_open0, const ExtReal& tau);

// appends the Palm vertex at the origin; returns its index
std::size_t palm_insert(std::vector<MarkedVertex>& vertices, const ModelParams& mp, std::uint64_t seed);

using EdgeSink = std::function<void(std::uint32_t, std::uint32_t)>;

// Streams every edge once (as vertex indices, unordered). Vertices are
// expected inside the volume-n box but the cell list tolerates strays.
void for_each_edge(const std::vector<MarkedVertex>& vs, const ModelParams& mp, double n, std::uint64_t seed,
                   Method method, const EdgeSink& sink);

SpatialGraph build_graph(std::vector<MarkedVertex> vs, const ModelParams& mp, double n, std::uint64_t seed,
                         Method method = Method::automatic);

// convenience: vertices, optional Palm vertex, then edges
SpatialGraph sample_graph(const ModelParams& mp, double n, std::uint64_t seed, bool palm = false,
                          Method method = Method::automatic);

void write_graph(std::ostream& os, const SpatialGraph& g);

}  // namespace ksrg
