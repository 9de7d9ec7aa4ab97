#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ksrg/sampler.hpp"

namespace ksrg {

class UnionFind {
public:
    explicit UnionFind(std::size_t n = 0) { reset(n); }
    void reset(std::size_t n);
    std::uint32_t find(std::uint32_t x);
    bool unite(std::uint32_t a, std::uint32_t b);  // true if merged
    std::uint32_t size_of(std::uint32_t x) { return size_[find(x)]; }
    std::size_t size() const { return parent_.size(); }
    std::size_t components() const { return components_; }

private:
    std::vector<std::uint32_t> parent_, size_;
    std::size_t components_ = 0;
};

struct ClusterStats {
    std::vector<std::size_t> sizes_desc;
    std::size_t largest = 0;
    std::size_t second_largest = 0;
    std::size_t origin_cluster = 0;
    std::size_t num_components = 0;
    bool origin_in_largest = false;  // origin's cluster has the maximum size
};

ClusterStats cluster_stats(UnionFind& uf, std::optional<std::size_t> origin = std::nullopt);
ClusterStats cluster_stats(std::size_t num_vertices, const std::vector<Edge>& edges,
                           std::optional<std::size_t> origin = std::nullopt);
ClusterStats cluster_stats(const SpatialGraph& g);

// origin's component strictly smaller than the maximum component size;
// throws std::invalid_argument without a Palm vertex
bool origin_not_in_giant(const SpatialGraph& g);

}  // namespace ksrg
