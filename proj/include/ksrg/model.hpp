#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ksrg {

struct Infinity {
    bool operator==(const Infinity&) const = default;
};

// Either a finite real or +inf. Used for tau and alpha, where the infinite
// value selects a different model (constant marks, threshold profile).
class ExtReal {
public:
    ExtReal() : v_(0.0) {}
    ExtReal(double x) : v_(x) {}
    ExtReal(Infinity) : v_(Infinity{}) {}

    bool is_inf() const { return std::holds_alternative<Infinity>(v_); }
    double value() const;  // throws on infinity
    std::string str() const;
    static ExtReal parse(const std::string& s);

    bool operator==(const ExtReal&) const = default;

private:
    std::variant<double, Infinity> v_;
};

inline const ExtReal kInf{Infinity{}};

enum class Kernel { interpolation, sum };
enum class Profile { polynomial, threshold };
enum class VertexSet { poisson, lattice };

struct ParamError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ModelParams {
    int d = 1;
    ExtReal tau = 2.5;
    ExtReal alpha = 2.0;
    double sigma = 1.0;
    Kernel kernel = Kernel::interpolation;
    double beta = 1.0;
    double p = 1.0;
    VertexSet vertex_set = VertexSet::poisson;

    Profile profile() const { return alpha.is_inf() ? Profile::threshold : Profile::polynomial; }
    // sigma as it enters the exponent formulas; the sum kernel counts as 0
    double sigma_eff() const { return kernel == Kernel::sum ? 0.0 : sigma; }

    void validate() const;  // throws ParamError
};

struct MarkedVertex {
    std::vector<double> x;
    double w = 1.0;
    std::uint64_t id = 0;  // keys the random coins, stable under restriction
};

double kernel_value(double w1, double w2, const ModelParams& mp);

// Parameters unpacked once for hot loops. kernel_value and connection_prob_at
// go through here, so every caller sees the same floating-point results.
class ConnEval {
public:
    explicit ConnEval(const ModelParams& mp)
        : d_(mp.d), sum_(mp.kernel == Kernel::sum), sigma_(mp.sigma), beta_(mp.beta), p_(mp.p),
          threshold_(mp.alpha.is_inf()), alpha_(mp.alpha.is_inf() ? 0.0 : mp.alpha.value()) {}

    double kernel(double w1, double w2) const {
        if (sum_) {
            if (d_ == 1) return w1 + w2;
            double a = std::pow(w1, 1.0 / d_) + std::pow(w2, 1.0 / d_);
            return std::pow(a, d_);
        }
        double hi = w1 > w2 ? w1 : w2, lo = w1 > w2 ? w2 : w1;
        if (sigma_ == 0) return hi;
        if (sigma_ == 1) return hi * lo;
        return hi * std::pow(lo, sigma_);
    }

    double at(double dpd, double kappa) const {
        double num = beta_ * kappa;
        if (threshold_) return num >= dpd ? p_ : 0.0;
        if (dpd <= num) return p_;  // also covers dpd == 0
        double r = num / dpd;
        if (alpha_ == 3) return p_ * r * r * r;
        if (alpha_ == 2) return p_ * r * r;
        return p_ * std::pow(r, alpha_);
    }

private:
    int d_;
    bool sum_;
    double sigma_, beta_, p_;
    bool threshold_;
    double alpha_;
};

// p * rho(beta * kappa / dist^d); coincident points give p
double connection_prob(const MarkedVertex& u, const MarkedVertex& v, const ModelParams& mp);
double connection_prob_at(double dist_pow_d, double kappa, const ModelParams& mp);

double dist2(const std::vector<double>& a, const std::vector<double>& b);
double dist_pow_d(const std::vector<double>& a, const std::vector<double>& b, int d);

std::string to_string(Kernel k);
std::string to_string(VertexSet v);
std::string to_string(Profile p);

}  // namespace ksrg
