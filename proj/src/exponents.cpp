#include "ksrg/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ksrg {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::string to_string(ConnType t) {
    switch (t) {
        case ConnType::short_range: return "short";
        case ConnType::ll: return "ll";
        case ConnType::hl: return "hl";
        case ConnType::hh: return "hh";
    }
    return "?";
}

bool exp_equal(double a, double b, double rel) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
    return std::fabs(a - b) <= rel * scale;
}

int count_max_ties(const std::vector<double>& xs, double rel) {
    double mx = *std::max_element(xs.begin(), xs.end());
    int c = 0;
    for (double x : xs)
        if (exp_equal(x, mx, rel)) ++c;
    return c;
}

XiGamma xi_and_gamma(const ModelParams& mp) {
    XiGamma r;
    double s = mp.sigma_eff();
    if (mp.alpha.is_inf()) {
        r.gamma_star = 1.0 / (s + 1);
        return r;
    }
    double a = mp.alpha.value();
    r.xi_ll = 0.0;
    if (mp.tau.is_inf()) {
        r.xi_hl = kNegInf;
        r.xi_hh = kNegInf;
        r.xi_star = 0.0;
        r.m_long = 1;
        r.gamma_long = 0.0;
        r.gamma_star = 0.0;
        return r;
    }
    double t = mp.tau.value();
    r.xi_hl = a - (t - 1);
    r.xi_hh = (s + 1) * a - 2 * (t - 1);
    r.xi_star = std::max({*r.xi_ll, *r.xi_hl, *r.xi_hh});
    r.m_long = count_max_ties({*r.xi_ll, *r.xi_hl, *r.xi_hh});
    r.gamma_long = (a - 1) / (*r.xi_star + t - 1);
    r.gamma_star = std::min(*r.gamma_long, 1.0 / (s + 1));
    return r;
}

ExponentReport exponent_report(const ModelParams& mp) {
    ExponentReport r;
    const int d = mp.d;
    const double s = mp.sigma_eff();
    const bool ainf = mp.alpha.is_inf(), tinf = mp.tau.is_inf();

    r.zeta_short = double(d - 1) / d;
    r.zeta_ll = ainf ? kNegInf : 2 - mp.alpha.value();
    r.gamma_hl = ainf ? 1.0 : 1 - 1 / mp.alpha.value();

    if (tinf) {
        r.zeta_hl = kNegInf;
        r.gamma_hh = 1 / (s + 1);
        r.zeta_hh = kNegInf;
    } else {
        double t = mp.tau.value();
        r.zeta_hl = 1 - r.gamma_hl * (t - 1);
        if (t <= s + 2 && !ainf) {
            double a = mp.alpha.value();
            r.gamma_hh = (1 - 1 / a) / (s + 1 - (t - 1) / a);
        } else {
            r.gamma_hh = 1 / (s + 1);
        }
        r.zeta_hh = 1 - r.gamma_hh * (t - 1);
    }

    r.zeta_long = std::max({r.zeta_ll, r.zeta_hl, r.zeta_hh, 0.0});
    r.zeta_star = std::max(r.zeta_long, r.zeta_short);

    const std::vector<double> four{r.zeta_short, r.zeta_ll, r.zeta_hl, r.zeta_hh};
    const ConnType types[4] = {ConnType::short_range, ConnType::ll, ConnType::hl, ConnType::hh};
    for (int i = 0; i < 4; ++i)
        if (exp_equal(four[i], r.zeta_star)) r.dominant_types.push_back(types[i]);
    r.m_star = static_cast<int>(r.dominant_types.size());

    r.xg = xi_and_gamma(mp);
    if (ainf) {
        // no xi exponents; the limits of the two lemmas' exponents
        if (tinf) {
            r.above_exponent = kNegInf;
        } else {
            r.above_exponent = 1 - r.xg.gamma_star * (mp.tau.value() - 1);
        }
        r.edges_exponent = kNegInf;
    } else if (tinf) {
        r.above_exponent = 2 - mp.alpha.value();
        r.edges_exponent = 2 - mp.alpha.value();
    } else {
        r.above_exponent = 1 - r.xg.gamma_star * (mp.tau.value() - 1);
        r.edges_exponent = 2 - mp.alpha.value() + r.xg.gamma_star * *r.xg.xi_star;
    }
    return r;
}

double zeta_girg(double tau, const ExtReal& alpha) {
    if (!(tau > 2 && tau < 3)) throw std::domain_error("zeta_girg needs tau in (2,3)");
    if (alpha.is_inf()) return (3 - tau) / 2;
    return (3 - tau) / (2 - (tau - 1) / alpha.value());
}

namespace {
void set_axis(ModelParams& mp, const std::string& name, double v) {
    if (name == "tau") mp.tau = v;
    else if (name == "alpha") mp.alpha = v;
    else if (name == "sigma") mp.sigma = v;
    else if (name == "d") mp.d = static_cast<int>(std::lround(v));
    else throw ParamError("unknown phase-diagram axis '" + name + "'");
}
}  // namespace

std::vector<PhaseCell> phase_diagram(ModelParams base, const std::string& xname, double x0, double x1,
                                     int nx, const std::string& yname, double y0, double y1, int ny) {
    if (nx < 1 || ny < 1) throw ParamError("grid sizes must be positive");
    std::vector<PhaseCell> out;
    out.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            double x = nx == 1 ? x0 : x0 + (x1 - x0) * i / (nx - 1);
            double y = ny == 1 ? y0 : y0 + (y1 - y0) * j / (ny - 1);
            ModelParams mp = base;
            set_axis(mp, xname, x);
            set_axis(mp, yname, y);
            mp.validate();
            auto r = exponent_report(mp);
            out.push_back({x, y, r.dominant_types.front(), r.m_star, r.zeta_star});
        }
    }
    return out;
}

}  // namespace ksrg
