#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ksrg/model.hpp"
#include "ksrg/sampler.hpp"

namespace ksrg {

enum class Transform { identity, log, loglog };
std::string to_string(Transform t);

struct SlopeFit {
    double slope = 0, intercept = 0, r_squared = 0;
    Transform x_transform = Transform::identity, y_transform = Transform::identity;
    std::size_t points = 0;
};

// OLS on transformed coordinates after dropping the floor(exclude_frac * m)
// points with the smallest x. Needs >= 4 points in total; throws
// std::invalid_argument on non-finite transformed values or a degenerate x range.
SlopeFit fit_slope(std::vector<double> x, std::vector<double> y, Transform xt, Transform yt,
                   double exclude_frac = 0.2);

struct Interval {
    double lo = 0, hi = 1;
};
Interval wilson_interval(std::size_t hits, std::size_t n, double z = 1.959963984540054);

struct RunOptions {
    Method method = Method::automatic;
    unsigned threads = 0;  // 0: hardware concurrency
};

// every replicate seed is derived from (seed, grid value, rep)
std::uint64_t replicate_seed(std::uint64_t seed, double grid_value, int rep);

// --- cluster-size decay under the Palm measure
struct DecayRep {
    int rep = 0;
    std::uint64_t seed = 0;
    std::size_t origin_size = 0, largest = 0, second = 0;
    bool origin_in_giant = false;
};
struct DecayRow {
    double k = 0;
    std::size_t reps = 0, hits = 0;
    double p_hat = 0;
    Interval ci;
};
struct DecayResult {
    std::vector<DecayRep> reps;
    std::vector<DecayRow> rows;
    bool monotone = true;
};
DecayResult estimate_cluster_decay(const ModelParams& mp, double n, const std::vector<double>& k_grid, int reps,
                                   std::uint64_t seed, const RunOptions& opt = {});
// log(-log p) against log k over rows with 0 < p_hat < 1
SlopeFit fit_decay(const std::vector<DecayRow>& rows, double exclude_frac = 0.2);

// --- component sizes over a grid of volumes
struct SizeRep {
    double n = 0;
    int rep = 0;
    std::uint64_t seed = 0;
    std::size_t vertices = 0, largest = 0, second = 0;
};
std::vector<SizeRep> sample_component_sizes(const ModelParams& mp, const std::vector<double>& n_grid, int reps,
                                            std::uint64_t seed, const RunOptions& opt = {});

struct SecondRow {
    double n = 0;
    std::size_t reps = 0;
    double median = 0, q25 = 0, q75 = 0;
};
std::vector<SecondRow> summarize_second(const std::vector<SizeRep>& rows);
std::vector<SecondRow> estimate_second_largest(const ModelParams& mp, const std::vector<double>& n_grid, int reps,
                                               std::uint64_t seed, const RunOptions& opt = {});
// log median against log log n
SlopeFit fit_second(const std::vector<SecondRow>& rows, double exclude_frac = 0.2);

struct GiantRow {
    double n = 0;
    std::size_t reps = 0;
    double mean = 0, stddev = 0;
};
std::vector<GiantRow> summarize_giant(const std::vector<SizeRep>& rows);
std::vector<GiantRow> estimate_giant_fraction(const ModelParams& mp, const std::vector<double>& n_grid, int reps,
                                              std::uint64_t seed, const RunOptions& opt = {});

// --- downward vertex boundary of the volume-k box
// u in the box, v outside it, w_u >= w_v
bool is_downward(const MarkedVertex& u, const MarkedVertex& v, double k);

// Expected number of downward neighbours of (x, w) outside the centred cube of
// half side a. Exact for d = 1; for d >= 2 the complement of the cube is
// replaced by the complement of the largest ball around x inside it, which
// over-counts.
double far_field_mass(const std::vector<double>& x, double w, const ModelParams& mp, double a);

struct BoundaryRep {
    double k = 0;
    int rep = 0;
    std::uint64_t seed = 0;
    std::size_t explicit_count = 0;  // vertices with a sampled downward edge
    double estimate = 0;             // plus the far-field probability of the rest
};
struct BoundaryRow {
    double k = 0;
    std::size_t reps = 0;
    double mean = 0, stderr_ = 0;
};
struct BoundaryResult {
    std::vector<BoundaryRep> reps;
    std::vector<BoundaryRow> rows;
};
// vertices are sampled in the box of volume box_factor * k
BoundaryResult estimate_downward_boundary(const ModelParams& mp, const std::vector<double>& k_grid, int reps,
                                          std::uint64_t seed, const RunOptions& opt = {}, double box_factor = 4.0);
SlopeFit fit_boundary(const std::vector<BoundaryRow>& rows, double exclude_frac = 0.2);

// --- output
void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
std::string fmt_num(double v);

struct PlotSeries {
    std::vector<double> x, y;
};
// scatter of the transformed points and the fitted line
void write_fit_svg(std::ostream& os, const std::string& title, const PlotSeries& pts, const SlopeFit& fit);

}  // namespace ksrg
