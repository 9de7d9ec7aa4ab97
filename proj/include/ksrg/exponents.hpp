#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ksrg/model.hpp"

namespace ksrg {

enum class ConnType { short_range, ll, hl, hh };
std::string to_string(ConnType t);

inline constexpr double kTieRelTol = 1e-12;

// equal up to kTieRelTol relative; -inf equals -inf
bool exp_equal(double a, double b, double rel = kTieRelTol);

struct XiGamma {
    // xi fields are empty when alpha is infinite
    std::optional<double> xi_ll, xi_hl, xi_hh, xi_star;
    std::optional<int> m_long;
    std::optional<double> gamma_long;
    double gamma_star = 0;
};

struct ExponentReport {
    double zeta_short = 0, zeta_ll = 0, zeta_hl = 0, zeta_hh = 0;
    double zeta_long = 0, zeta_star = 0;
    double gamma_hl = 0, gamma_hh = 0;
    XiGamma xg;
    int m_star = 1;
    std::vector<ConnType> dominant_types;

    // 1 - gamma_star (tau-1) and 2 - alpha + gamma_star xi_star, with the
    // tau = inf limit taken analytically (both tend to 2 - alpha)
    double above_exponent = 0;
    double edges_exponent = 0;
};

ExponentReport exponent_report(const ModelParams& mp);
XiGamma xi_and_gamma(const ModelParams& mp);

// (3 - tau) / (2 - (tau-1)/alpha); tau must lie in (2,3)
double zeta_girg(double tau, const ExtReal& alpha);

int count_max_ties(const std::vector<double>& xs, double rel = kTieRelTol);

struct PhaseCell {
    double x, y;
    ConnType dominant;
    int m_star;
    double zeta_star;
};

// sweep two parameters of mp; axis names are any of tau, alpha, sigma, d
std::vector<PhaseCell> phase_diagram(ModelParams base, const std::string& xname, double x0, double x1,
                                     int nx, const std::string& yname, double y0, double y1, int ny);

}  // namespace ksrg
