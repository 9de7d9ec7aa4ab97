#pragma once

#include <cstdint>
#include <vector>

#include "ksrg/model.hpp"
#include "ksrg/sampler.hpp"

namespace ksrg {

struct SuppressedProfile {
    double gamma = 0;
    double r_k = 0;
    double C_beta = 0;
    int d = 1;
};

// r_k = (k/rho)^{1/d} sqrt(d), C_beta = (2 beta)^{1/d}
SuppressedProfile make_suppressed_profile(const ModelParams& mp, double k, double gamma, double rho = 0.1);

// mark threshold at distance z >= 0 from the sphere of radius r_k
double f_gamma(double z, const SuppressedProfile& prof);

enum class ProfileClass { in_below, in_above, out_below, out_above };

// Inside means |x| <= r_k. Below means w <= f(| |x| - r_k |), except that the
// collar | |x| - r_k | <= C_beta is always above: f = 1 there and no mark is
// strictly smaller.
ProfileClass classify(const std::vector<double>& x, double w, const SuppressedProfile& prof);

struct ProfilePartition {
    std::vector<std::size_t> in_below, in_above, out_below, out_above;
};
ProfilePartition classify_against_profile(const std::vector<MarkedVertex>& vs, const SuppressedProfile& prof);

struct CrossBoundaryReport {
    std::size_t trials = 0;
    double max_ratio = 0;  // beta kappa / |x_u - x_v|^d
    double max_prob = 0;
    std::size_t ratio_violations = 0;  // ratio > 1/2
    std::size_t prob_violations = 0;   // prob > p 2^{-alpha}, or > 0 for the threshold profile
};

// Random pairs u in_below, v out_below, half of them pushed to the worst case
// (aligned directions, maximal marks). Throws ParamError if gamma > 1/(sigma+1).
CrossBoundaryReport cross_boundary_edge_bound_check(const SuppressedProfile& prof, const ModelParams& mp,
                                                    std::size_t trials, std::uint64_t seed);

struct ProfileCountRow {
    double k = 0;
    int rep = 0;
    double count_above = 0;  // sampled inside the window plus the expected count beyond it
    std::size_t edges_below_cross = 0;
};

// Samples the process in a ball of radius window * r_k around the origin.
std::vector<ProfileCountRow> profile_count_slopes(const ModelParams& mp, const std::vector<double>& k_grid,
                                                  double gamma, int reps, std::uint64_t seed, double rho = 0.1,
                                                  double window = 3.0, unsigned threads = 0);

// expected number of vertices above the profile outside the ball of radius R
double expected_above_beyond(const SuppressedProfile& prof, const ModelParams& mp, double R);

}  // namespace ksrg
