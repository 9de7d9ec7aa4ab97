#include "ksrg/components.hpp"

#include <algorithm>
#include <stdexcept>

namespace ksrg {

void UnionFind::reset(std::size_t n) {
    parent_.resize(n);
    size_.assign(n, 1);
    for (std::size_t i = 0; i < n; ++i) parent_[i] = static_cast<std::uint32_t>(i);
    components_ = n;
}

std::uint32_t UnionFind::find(std::uint32_t x) {
    std::uint32_t r = x;
    while (parent_[r] != r) r = parent_[r];
    while (parent_[x] != r) {
        std::uint32_t nx = parent_[x];
        parent_[x] = r;
        x = nx;
    }
    return r;
}

bool UnionFind::unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    --components_;
    return true;
}

ClusterStats cluster_stats(UnionFind& uf, std::optional<std::size_t> origin) {
    ClusterStats s;
    const std::size_t n = uf.size();
    for (std::size_t i = 0; i < n; ++i) {
        auto u = static_cast<std::uint32_t>(i);
        if (uf.find(u) == u) s.sizes_desc.push_back(uf.size_of(u));
    }
    std::sort(s.sizes_desc.begin(), s.sizes_desc.end(), std::greater<>());
    s.num_components = s.sizes_desc.size();
    if (!s.sizes_desc.empty()) s.largest = s.sizes_desc[0];
    if (s.sizes_desc.size() > 1) s.second_largest = s.sizes_desc[1];
    if (origin) {
        if (*origin >= n) throw std::out_of_range("origin index out of range");
        s.origin_cluster = uf.size_of(static_cast<std::uint32_t>(*origin));
        s.origin_in_largest = s.origin_cluster == s.largest;
    }
    return s;
}

ClusterStats cluster_stats(std::size_t num_vertices, const std::vector<Edge>& edges,
                           std::optional<std::size_t> origin) {
    UnionFind uf(num_vertices);
    for (auto [u, v] : edges) uf.unite(u, v);
    return cluster_stats(uf, origin);
}

ClusterStats cluster_stats(const SpatialGraph& g) {
    return cluster_stats(g.vertices.size(), g.edges, g.palm_origin);
}

bool origin_not_in_giant(const SpatialGraph& g) {
    if (!g.palm_origin) throw std::invalid_argument("graph has no Palm vertex");
    return !cluster_stats(g).origin_in_largest;
}

}  // namespace ksrg
