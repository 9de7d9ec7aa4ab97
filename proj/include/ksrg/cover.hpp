#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ksrg/model.hpp"

namespace ksrg {

using Point = std::vector<double>;

struct CoverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// e d^{d/2} 2^{3d}
double cover_nu(int d);
// s(w) = (2^d beta w)^{1/(1-1/alpha)}, or 2^d beta w for the threshold profile
double s_of_wbar(double wbar, const ModelParams& mp);
// smallest admissible w: (2^d d^{d/2} / beta) v 1 (the bound itself is excluded)
double wbar_lower_bound(const ModelParams& mp);

// closed axis-parallel box
struct Box {
    std::vector<double> lo, hi;
    double volume() const;
};
// box of volume s centred at x
Box cube(const std::vector<double>& x, double s);
bool interiors_overlap(const Box& a, const Box& b, double tol = 0);
double intersection_volume(const Box& a, const Box& b);

struct Cell {
    std::vector<long> z;
    Box region;
    std::vector<std::size_t> points;  // indices into the input
};

// occupied cells of the unit-cell decomposition of the volume-n box, sorted by
// centre; faces go to the cell with the smaller centre, outer slabs are
// merged into the nearest interior cell
std::vector<Cell> occupied_cells(const std::vector<Point>& pts, double n, int d);
std::vector<long> cell_center_of(const Point& x, double n, int d);
Box cell_region(const std::vector<long>& z, double n, int d);

// Smallest s such that the set is s-expandable: for every integer centre x and
// every s' >= s the box of volume s' at x holds at most e s' points.
double expandability_threshold(const std::vector<Point>& pts, int d);
bool is_expandable(const std::vector<Point>& pts, double s, int d);

std::optional<std::vector<std::size_t>> pigeonhole_split(const std::vector<std::size_t>& counts, double nu,
                                                         double delta);

struct CoverResult {
    enum class Kind { proper, expanded } kind = Kind::proper;
    int d = 1;
    double n = 0;
    std::vector<Cell> cells;               // all occupied cells
    std::vector<long> allocation;          // cell -> box index, -1 if unallocated
    std::vector<Box> boxes;                // cells (proper) or expanded boxes
    std::vector<std::size_t> box_label;    // cell index whose centre the box uses
    std::vector<double> box_volume;        // nominal volume (before clipping)
    double covered_region_volume = 0;
    std::size_t rounds = 0;
    std::size_t input_size = 0;
    std::size_t expansion_input_points = 0;  // points in cells with at least nu points
};

// Runs the expansion on the cells with at least nu points, whether or not a
// proper cover exists.
CoverResult cover_expansion(const std::vector<Point>& pts, double n, int d);

// proper cover when enough cells are occupied, otherwise the expansion;
// throws CoverError when w_bar or expandability preconditions fail
CoverResult cover(const std::vector<Point>& pts, double n, double wbar, const ModelParams& mp);

struct CoverCertificate {
    bool disjoint = true;
    bool volume_rule = true;
    bool near = true;
    bool min_covered_volume = true;
    bool obs_min_box_volume = true;   // every box volume >= 1
    bool obs_sup_distance = true;     // points of allocated cells within 4 sqrt(d) Vol^{1/d}
    bool obs_dense_enlarged = true;   // enlarged box holds >= e Vol points
    bool obs_max_box_volume = true;   // Vol <= d^{-d/2} 2^{-3d} s (only with s)
    bool rounds_bound = true;
    double rounds_limit = 0;
    bool all() const;
};

CoverCertificate certify(const CoverResult& r, const std::vector<Point>& pts, std::optional<double> s,
                         double tol = 1e-9);

struct GuaranteeResult {
    double frequency = 0;
    double stderr_ = 0;
    double min_probability = 1;  // smallest exact connection probability seen
    std::size_t trials = 0;
};

// plants test vertices of mark w_bar uniformly in the covered region and
// counts those with an edge to L (L's marks as given)
GuaranteeResult connection_guarantee_check(const CoverResult& c, const std::vector<MarkedVertex>& L,
                                           double wbar, const ModelParams& mp, std::size_t trials,
                                           std::uint64_t seed);

}  // namespace ksrg
