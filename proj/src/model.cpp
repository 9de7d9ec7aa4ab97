#include "ksrg/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace ksrg {

double ExtReal::value() const {
    if (is_inf()) throw std::logic_error("ExtReal::value on infinity");
    return std::get<double>(v_);
}

std::string ExtReal::str() const {
    if (is_inf()) return "inf";
    std::ostringstream os;
    os.precision(17);
    os << std::get<double>(v_);
    return os.str();
}

ExtReal ExtReal::parse(const std::string& s) {
    std::string t;
    for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "inf" || t == "+inf" || t == "infinity") return kInf;
    std::size_t pos = 0;
    double x = 0;
    try {
        x = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ParamError("not a number: '" + s + "'");
    }
    if (pos != s.size()) throw ParamError("not a number: '" + s + "'");
    if (std::isinf(x) && x > 0) return kInf;
    return x;
}

void ModelParams::validate() const {
    if (d < 1) throw ParamError("d must be >= 1");
    if (!tau.is_inf() && !(tau.value() > 2)) throw ParamError("tau must be > 2 (or inf)");
    if (!alpha.is_inf() && !(alpha.value() > 1)) throw ParamError("alpha must be > 1 (or inf)");
    if (!(sigma >= 0) || !std::isfinite(sigma)) throw ParamError("sigma must be >= 0");
    if (!(beta > 0) || !std::isfinite(beta)) throw ParamError("beta must be > 0");
    if (!(p > 0 && p <= 1)) throw ParamError("p must lie in (0,1]");
    if (vertex_set == VertexSet::lattice && !(std::min(p, beta) < 1))
        throw ParamError("lattice vertex set requires min(p, beta) < 1");
}

double kernel_value(double w1, double w2, const ModelParams& mp) { return ConnEval(mp).kernel(w1, w2); }

double connection_prob_at(double dpd, double kappa, const ModelParams& mp) { return ConnEval(mp).at(dpd, kappa); }

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

double dist_pow_d(const std::vector<double>& a, const std::vector<double>& b, int d) {
    if (d == 1) return std::fabs(a[0] - b[0]);
    double s = dist2(a, b);
    if (d == 2) return s;
    return std::pow(s, 0.5 * d);
}

double connection_prob(const MarkedVertex& u, const MarkedVertex& v, const ModelParams& mp) {
    return connection_prob_at(dist_pow_d(u.x, v.x, mp.d), kernel_value(u.w, v.w, mp), mp);
}

std::string to_string(Kernel k) { return k == Kernel::sum ? "sum" : "interpolation"; }
std::string to_string(VertexSet v) { return v == VertexSet::lattice ? "lattice" : "poisson"; }
std::string to_string(Profile p) { return p == Profile::threshold ? "threshold" : "polynomial"; }

}  // namespace ksrg
