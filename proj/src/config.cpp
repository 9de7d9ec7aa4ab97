#include "ksrg/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace ksrg {

namespace {

double num(const Json& j, const char* key) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == s.size() && pos > 0) return v;
    }
    throw ParamError(std::string("config key '") + key + "' must be a number");
}

std::string str(const Json& j, const char* key) {
    if (!j.is_string()) throw ParamError(std::string("config key '") + key + "' must be a string");
    return j.get<std::string>();
}

}  // namespace

ExtReal parse_ext(const Json& v, const char* key) {
    if (v.is_string()) {
        try {
            return ExtReal::parse(v.get<std::string>());
        } catch (const std::exception&) {
            throw ParamError(std::string("config key '") + key + "' must be a number or \"inf\"");
        }
    }
    return ExtReal(num(v, key));
}

Json model_to_json(const ModelParams& mp) {
    Json j;
    j["d"] = mp.d;
    j["tau"] = mp.tau.is_inf() ? Json("inf") : Json(mp.tau.value());
    j["alpha"] = mp.alpha.is_inf() ? Json("inf") : Json(mp.alpha.value());
    j["sigma"] = mp.sigma;
    j["kernel"] = to_string(mp.kernel);
    j["profile"] = to_string(mp.profile());
    j["beta"] = mp.beta;
    j["p"] = mp.p;
    j["vertex_set"] = to_string(mp.vertex_set);
    return j;
}

ModelParams model_from_json(const Json& j) {
    if (!j.is_object()) throw ParamError("model config must be an object");
    ModelParams mp;
    if (j.contains("d")) {
        double d = num(j["d"], "d");
        if (d != std::floor(d) || d < 1 || d > 64) throw ParamError("config key 'd' must be a positive integer");
        mp.d = static_cast<int>(d);
    }
    if (j.contains("tau")) mp.tau = parse_ext(j["tau"], "tau");
    if (j.contains("alpha")) mp.alpha = parse_ext(j["alpha"], "alpha");
    if (j.contains("sigma")) mp.sigma = num(j["sigma"], "sigma");
    if (j.contains("beta")) mp.beta = num(j["beta"], "beta");
    if (j.contains("p")) mp.p = num(j["p"], "p");
    if (j.contains("kernel")) {
        std::string k = str(j["kernel"], "kernel");
        if (k == "interpolation") mp.kernel = Kernel::interpolation;
        else if (k == "sum") mp.kernel = Kernel::sum;
        else throw ParamError("kernel must be 'interpolation' or 'sum', got '" + k + "'");
    }
    if (j.contains("vertex_set")) {
        std::string v = str(j["vertex_set"], "vertex_set");
        if (v == "poisson") mp.vertex_set = VertexSet::poisson;
        else if (v == "lattice") mp.vertex_set = VertexSet::lattice;
        else throw ParamError("vertex_set must be 'poisson' or 'lattice', got '" + v + "'");
    }
    if (j.contains("profile")) {
        std::string p = str(j["profile"], "profile");
        if (p == "threshold") {
            if (!j.contains("alpha")) mp.alpha = kInf;
            else if (!mp.alpha.is_inf()) throw ParamError("profile 'threshold' needs alpha = inf");
        } else if (p == "polynomial") {
            if (mp.alpha.is_inf()) throw ParamError("profile 'polynomial' needs a finite alpha");
        } else {
            throw ParamError("profile must be 'polynomial' or 'threshold', got '" + p + "'");
        }
    }
    mp.validate();
    return mp;
}

Json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParamError("cannot open config file: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const std::exception& e) {
        throw ParamError("cannot parse config file " + path + ": " + e.what());
    }
    if (!j.is_object()) throw ParamError("config file " + path + " must hold a JSON object");
    // a nested "model" object is flattened
    if (j.contains("model")) {
        Json m = j["model"];
        j.erase("model");
        if (!m.is_object()) throw ParamError("config key 'model' must be an object");
        for (auto& [k, v] : m.items()) j[k] = v;
    }
    return j;
}

Json merge_config(const Json& base, const Json& over) {
    Json out = base;
    for (auto& [k, v] : over.items()) out[k] = v;
    return out;
}

std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> out;
    auto to_d = [&](const std::string& t) {
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(t, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != t.size()) throw ParamError("bad grid value '" + t + "' in '" + s + "'");
        return v;
    };
    if (s.find(':') != std::string::npos) {
        std::stringstream ss(s);
        std::string a, b, f;
        std::getline(ss, a, ':');
        std::getline(ss, b, ':');
        std::getline(ss, f, ':');
        double x0 = to_d(a), x1 = to_d(b), fac = f.empty() ? 2.0 : to_d(f);
        if (!(x0 > 0) || !(x1 >= x0) || !(fac > 1)) throw ParamError("geometric grid needs 0 < start <= stop, factor > 1");
        for (double x = x0; x <= x1 * (1 + 1e-12); x *= fac) out.push_back(x);
        return out;
    }
    std::stringstream ss(s);
    std::string t;
    while (std::getline(ss, t, ','))
        if (!t.empty()) out.push_back(to_d(t));
    if (out.empty()) throw ParamError("empty grid '" + s + "'");
    return out;
}

std::vector<double> parse_grid(const Json& v) {
    if (v.is_string()) return parse_grid(v.get<std::string>());
    if (v.is_array()) {
        std::vector<double> out;
        for (auto& e : v) out.push_back(num(e, "grid"));
        if (out.empty()) throw ParamError("empty grid");
        return out;
    }
    if (v.is_number()) return {v.get<double>()};
    throw ParamError("grid must be an array or a string");
}

}  // namespace ksrg
