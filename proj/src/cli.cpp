#include "ksrg/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "ksrg/backbone.hpp"
#include "ksrg/config.hpp"
#include "ksrg/cover.hpp"
#include "ksrg/experiments.hpp"
#include "ksrg/exponents.hpp"
#include "ksrg/profile.hpp"
#include "ksrg/rng.hpp"
#include "ksrg/sampler.hpp"

namespace fs = std::filesystem;

namespace ksrg::cli {

namespace {

struct Ctx {
    std::ostream& out;
    std::ostream& err;
    Json cfg;  // resolved
    ModelParams mp;
    fs::path out_dir;
    bool has_out_dir = false;
};

// numbers and booleans become JSON scalars, everything else stays a string
Json scalar(const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    try {
        std::size_t pos = 0;
        if (v.find_first_of(".eE") == std::string::npos && v[0] != '-') {
            unsigned long long u = std::stoull(v, &pos);
            if (pos == v.size()) return u;
        }
        double x = std::stod(v, &pos);
        if (pos == v.size() && std::isfinite(x)) return x;
    } catch (const std::exception&) {
    }
    return v;
}

// flags registered on a subcommand, kept as strings until merged
struct Flags {
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> opts;
    std::string config_path;
    CLI::Option* config_opt = nullptr;

    void add(CLI::App* app, const std::string& key, const std::string& help) {
        std::string flag = "--" + key;
        for (auto& c : flag)
            if (c == '_') c = '-';
        opts[key] = app->add_option(flag, values[key], help);
    }
    Json given() const {
        Json j = Json::object();
        for (auto& [k, o] : opts)
            if (o->count() > 0) j[k] = scalar(values.at(k));
        return j;
    }
};

void add_model_flags(CLI::App* app, Flags& f) {
    f.config_opt = app->add_option("--config", f.config_path, "JSON config file (flags override its values)");
    f.add(app, "d", "dimension (default 1)");
    f.add(app, "tau", "power-law exponent > 2 or inf (default 2.5)");
    f.add(app, "alpha", "long-range parameter > 1 or inf (default 2)");
    f.add(app, "sigma", "kernel exponent >= 0 (default 1)");
    f.add(app, "kernel", "interpolation | sum");
    f.add(app, "profile", "polynomial | threshold (threshold forces alpha = inf)");
    f.add(app, "beta", "edge density > 0 (default 1)");
    f.add(app, "p", "percolation probability in (0,1] (default 1)");
    f.add(app, "vertex_set", "poisson | lattice");
    f.add(app, "seed", "top-level seed (default 1)");
    f.add(app, "threads", "worker threads, 0 = all cores (default 0); results do not depend on it");
    f.add(app, "method", "edge sampler: auto | exact | cell_list | cell_list_keyed");
    f.add(app, "out_dir", "output directory; nothing is written outside it");
}

Json model_json_of(const Json& cfg) {
    static const char* keys[] = {"d", "tau", "alpha", "sigma", "kernel", "profile", "beta", "p", "vertex_set"};
    Json m = Json::object();
    for (auto k : keys)
        if (cfg.contains(k)) m[k] = cfg[k];
    return m;
}

// defaults < file < flags
Ctx resolve(const Flags& f, const Json& defaults, std::ostream& out, std::ostream& err) {
    Json cfg = defaults;
    if (f.config_opt && f.config_opt->count() > 0) cfg = merge_config(cfg, load_config_file(f.config_path));
    cfg = merge_config(cfg, f.given());
    Ctx c{out, err, {}, {}, {}, false};
    c.mp = model_from_json(model_json_of(cfg));
    Json resolved = model_to_json(c.mp);
    for (auto& [k, v] : cfg.items())
        if (!resolved.contains(k)) resolved[k] = v;
    c.cfg = resolved;
    if (cfg.contains("out_dir") && !(cfg["out_dir"].is_string() && cfg["out_dir"].get<std::string>().empty())) {
        c.out_dir = cfg["out_dir"].get<std::string>();
        c.has_out_dir = true;
    }
    return c;
}

double get_num(const Ctx& c, const char* key) {
    const Json& v = c.cfg.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        try {
            std::size_t pos = 0;
            std::string s = v.get<std::string>();
            double x = std::stod(s, &pos);
            if (pos == s.size()) return x;
        } catch (const std::exception&) {
        }
    }
    throw ParamError(std::string("config key '") + key + "' must be a number");
}

long get_int(const Ctx& c, const char* key, long lo) {
    double v = get_num(c, key);
    if (v != std::floor(v) || v < lo) throw ParamError(std::string("config key '") + key + "' must be an integer >= " +
                                                       std::to_string(lo));
    return static_cast<long>(v);
}

std::uint64_t get_seed(const Ctx& c) {
    double v = get_num(c, "seed");
    if (v < 0 || v != std::floor(v) || v > 1.8e19) throw ParamError("seed must be a non-negative integer");
    const Json& j = c.cfg.at("seed");
    if (j.is_string()) return std::stoull(j.get<std::string>());
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    return static_cast<std::uint64_t>(v);
}

std::string get_str(const Ctx& c, const char* key) {
    const Json& v = c.cfg.at(key);
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

bool get_bool(const Ctx& c, const char* key) {
    const Json& v = c.cfg.at(key);
    if (v.is_boolean()) return v.get<bool>();
    std::string s = get_str(c, key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ParamError(std::string("config key '") + key + "' must be a boolean");
}

RunOptions run_options(const Ctx& c) {
    RunOptions o;
    o.method = parse_method(get_str(c, "method"));
    o.threads = static_cast<unsigned>(get_int(c, "threads", 0));
    return o;
}

void prepare_out_dir(const Ctx& c) {
    if (!c.has_out_dir) return;
    fs::create_directories(c.out_dir);
    std::ofstream os(c.out_dir / "config.resolved");
    os << c.cfg.dump(2) << '\n';
}

std::ofstream open_out(const Ctx& c, const std::string& name) {
    std::ofstream os(c.out_dir / name);
    if (!os) throw std::runtime_error("cannot write " + (c.out_dir / name).string());
    return os;
}

std::string str_of(std::size_t v) { return std::to_string(v); }

std::string ext_str(ExtReal v) { return v.is_inf() ? "inf" : fmt_num(v.value()); }

// --- subcommands

void write_report(std::ostream& os, const ExponentReport& r, const ModelParams& mp) {
    auto line = [&](const std::string& k, double v) {
        os << std::left << std::setw(18) << k << fmt_num(v) << '\n';
    };
    os << "model: d=" << mp.d << " tau=" << ext_str(mp.tau) << " alpha=" << ext_str(mp.alpha) << " sigma=" << mp.sigma
       << " kernel=" << to_string(mp.kernel) << "\n";
    line("zeta_short", r.zeta_short);
    line("zeta_ll", r.zeta_ll);
    line("gamma_hl", r.gamma_hl);
    line("zeta_hl", r.zeta_hl);
    line("gamma_hh", r.gamma_hh);
    line("zeta_hh", r.zeta_hh);
    line("zeta_long", r.zeta_long);
    line("zeta_star", r.zeta_star);
    os << std::left << std::setw(18) << "m_star" << r.m_star << '\n';
    os << std::left << std::setw(18) << "dominant";
    for (std::size_t i = 0; i < r.dominant_types.size(); ++i) os << (i ? "," : "") << to_string(r.dominant_types[i]);
    os << '\n';
    if (r.xg.xi_star) {
        line("xi_ll", *r.xg.xi_ll);
        line("xi_hl", *r.xg.xi_hl);
        line("xi_hh", *r.xg.xi_hh);
        line("xi_star", *r.xg.xi_star);
        os << std::left << std::setw(18) << "m_long" << *r.xg.m_long << '\n';
        line("gamma_long", *r.xg.gamma_long);
    }
    line("gamma_star", r.xg.gamma_star);
    line("above_exponent", r.above_exponent);
    line("edges_exponent", r.edges_exponent);
}

int cmd_exponents(Ctx& c) {
    ExponentReport r = exponent_report(c.mp);
    write_report(c.out, r, c.mp);
    if (get_bool(c, "csv")) {
        if (!c.has_out_dir) throw ParamError("--csv needs --out-dir");
        prepare_out_dir(c);
        auto os = open_out(c, "exponents.csv");
        std::string dom;
        for (std::size_t i = 0; i < r.dominant_types.size(); ++i) dom += (i ? ";" : "") + to_string(r.dominant_types[i]);
        write_csv(os,
                  {"d", "tau", "alpha", "sigma", "kernel", "zeta_short", "zeta_ll", "gamma_hl", "zeta_hl", "gamma_hh",
                   "zeta_hh", "zeta_long", "zeta_star", "m_star", "dominant", "gamma_star"},
                  {{std::to_string(c.mp.d), ext_str(c.mp.tau), ext_str(c.mp.alpha), fmt_num(c.mp.sigma),
                    to_string(c.mp.kernel), fmt_num(r.zeta_short), fmt_num(r.zeta_ll), fmt_num(r.gamma_hl),
                    fmt_num(r.zeta_hl), fmt_num(r.gamma_hh), fmt_num(r.zeta_hh), fmt_num(r.zeta_long),
                    fmt_num(r.zeta_star), std::to_string(r.m_star), dom, fmt_num(r.xg.gamma_star)}});
    } else if (c.has_out_dir) {
        prepare_out_dir(c);
    }
    return kExitOk;
}

const char* type_color(ConnType t) {
    switch (t) {
        case ConnType::short_range: return "#9ecae1";
        case ConnType::ll: return "#fdae6b";
        case ConnType::hl: return "#a1d99b";
        case ConnType::hh: return "#bcbddc";
    }
    return "#ffffff";
}

int cmd_phase(Ctx& c) {
    if (!c.has_out_dir) throw ParamError("phase-diagram needs --out-dir");
    const std::string xn = get_str(c, "x"), yn = get_str(c, "y");
    const double x0 = get_num(c, "x_min"), x1 = get_num(c, "x_max"), y0 = get_num(c, "y_min"), y1 = get_num(c, "y_max");
    const int nx = static_cast<int>(get_int(c, "nx", 1)), ny = static_cast<int>(get_int(c, "ny", 1));
    auto cells = phase_diagram(c.mp, xn, x0, x1, nx, yn, y0, y1, ny);
    prepare_out_dir(c);
    {
        auto os = open_out(c, "phase_diagram.csv");
        std::vector<std::vector<std::string>> rows;
        for (auto& p : cells)
            rows.push_back({fmt_num(p.x), fmt_num(p.y), to_string(p.dominant), std::to_string(p.m_star),
                            fmt_num(p.zeta_star)});
        write_csv(os, {xn, yn, "dominant", "m_star", "zeta_star"}, rows);
    }
    auto os = open_out(c, "phase_diagram.svg");
    const double W = 560, H = 520, L = 60, T = 30, P = 440;
    const double cw = P / nx, chh = P / ny;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        int ix = static_cast<int>(i) % nx, iy = static_cast<int>(i) / nx;
        const auto& p = cells[i];
        const char* col = p.m_star > 1 ? "#555555" : type_color(p.dominant);
        os << "<rect x=\"" << L + ix * cw << "\" y=\"" << T + (ny - 1 - iy) * chh << "\" width=\"" << cw + 0.5
           << "\" height=\"" << chh + 0.5 << "\" fill=\"" << col << "\"/>\n";
    }
    os << "<text x=\"" << L + P / 2 << "\" y=\"" << T + P + 30 << "\" font-size=\"13\">" << xn << " ["
       << fmt_num(x0) << ", " << fmt_num(x1) << "]</text>\n";
    os << "<text x=\"8\" y=\"" << T + P / 2 << "\" font-size=\"13\">" << yn << "</text>\n";
    os << "<text x=\"8\" y=\"" << T + P / 2 + 16 << "\" font-size=\"11\">[" << fmt_num(y0) << ", " << fmt_num(y1)
       << "]</text>\n";
    const ConnType types[] = {ConnType::short_range, ConnType::ll, ConnType::hl, ConnType::hh};
    for (int t = 0; t < 4; ++t) {
        os << "<rect x=\"" << L + t * 100 << "\" y=\"" << T + P + 40 << "\" width=\"14\" height=\"14\" fill=\""
           << type_color(types[t]) << "\"/>";
        os << "<text x=\"" << L + t * 100 + 18 << "\" y=\"" << T + P + 52 << "\" font-size=\"12\">"
           << to_string(types[t]) << "</text>\n";
    }
    os << "<rect x=\"" << L + 400 << "\" y=\"" << T + P + 40 << "\" width=\"14\" height=\"14\" fill=\"#555555\"/>";
    os << "<text x=\"" << L + 418 << "\" y=\"" << T + P + 52 << "\" font-size=\"12\">tie</text>\n";
    os << "</svg>\n";
    c.out << "wrote " << cells.size() << " cells to " << (c.out_dir / "phase_diagram.svg").string() << '\n';
    return kExitOk;
}

int cmd_sample(Ctx& c) {
    const double n = get_num(c, "n");
    fs::path outp = get_str(c, "out");
    if (outp.is_absolute() || !c.has_out_dir) {
        if (!c.has_out_dir) {
            c.out_dir = outp.has_parent_path() ? outp.parent_path() : fs::path(".");
            c.has_out_dir = true;
            c.cfg["out_dir"] = c.out_dir.string();
        }
        if (outp.is_absolute() && fs::weakly_canonical(outp.parent_path()) != fs::weakly_canonical(c.out_dir))
            throw ParamError("--out must lie inside --out-dir");
        outp = outp.filename();
    }
    SpatialGraph g = sample_graph(c.mp, n, get_seed(c), get_bool(c, "palm"), parse_method(get_str(c, "method")));
    prepare_out_dir(c);
    auto os = open_out(c, outp.string());
    write_graph(os, g);
    c.out << "vertices " << g.vertices.size() << " edges " << g.edges.size() << " -> "
          << (c.out_dir / outp).string() << '\n';
    return kExitOk;
}

std::vector<Point> read_points(const std::string& path, int d) {
    std::ifstream in(path);
    if (!in) throw ParamError("cannot open points file: " + path);
    std::vector<Point> pts;
    std::string line;
    std::size_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        auto h = line.find('#');
        if (h != std::string::npos) line.resize(h);
        std::istringstream ss(line);
        Point p;
        double v;
        while (ss >> v) p.push_back(v);
        if (!ss.eof()) throw ParamError(path + ":" + std::to_string(ln) + ": not a number");
        if (p.empty()) continue;
        if (static_cast<int>(p.size()) != d)
            throw ParamError(path + ":" + std::to_string(ln) + ": expected " + std::to_string(d) + " coordinates");
        pts.push_back(std::move(p));
    }
    return pts;
}

int cmd_cover(Ctx& c) {
    const std::string path = get_str(c, "points");
    if (path.empty()) throw ParamError("cover needs --points");
    auto pts = read_points(path, c.mp.d);
    const double n = get_num(c, "n"), wbar = get_num(c, "wbar");
    CoverResult r = cover(pts, n, wbar, c.mp);
    const double s = s_of_wbar(wbar, c.mp);
    CoverCertificate cert = certify(r, pts, s);
    std::ostringstream os;
    auto pf = [](bool b) { return b ? "pass" : "fail"; };
    os << "kind " << (r.kind == CoverResult::Kind::proper ? "proper" : "expanded") << '\n';
    os << "points " << r.input_size << '\n';
    os << "occupied_cells " << r.cells.size() << '\n';
    os << "boxes " << r.boxes.size() << '\n';
    os << "rounds " << r.rounds << '\n';
    os << "rounds_limit " << fmt_num(cert.rounds_limit) << '\n';
    os << "covered_volume " << fmt_num(r.covered_region_volume) << '\n';
    os << "s " << fmt_num(s) << '\n';
    os << "disjoint " << pf(cert.disjoint) << '\n';
    os << "volume_rule " << pf(cert.volume_rule) << '\n';
    os << "near " << pf(cert.near) << '\n';
    os << "min_covered_volume " << pf(cert.min_covered_volume) << '\n';
    os << "obs_min_box_volume " << pf(cert.obs_min_box_volume) << '\n';
    os << "obs_sup_distance " << pf(cert.obs_sup_distance) << '\n';
    os << "obs_dense_enlarged " << pf(cert.obs_dense_enlarged) << '\n';
    os << "obs_max_box_volume " << pf(cert.obs_max_box_volume) << '\n';
    os << "rounds_bound " << pf(cert.rounds_bound) << '\n';
    const long trials = get_int(c, "trials", 0);
    if (trials > 0) {
        std::vector<MarkedVertex> L;
        for (std::size_t i = 0; i < pts.size(); ++i) L.push_back({pts[i], 1.0, i});
        GuaranteeResult g = connection_guarantee_check(r, L, wbar, c.mp, trials, get_seed(c));
        os << "guarantee_frequency " << fmt_num(g.frequency) << '\n';
        os << "guarantee_stderr " << fmt_num(g.stderr_) << '\n';
        os << "guarantee_min_probability " << fmt_num(g.min_probability) << '\n';
        os << "guarantee " << pf(g.frequency >= c.mp.p / 2 - 3 * g.stderr_) << '\n';
    }
    os << "all " << pf(cert.all()) << '\n';
    c.out << os.str();
    if (c.has_out_dir) {
        prepare_out_dir(c);
        open_out(c, "cover_report.txt") << os.str();
    }
    return cert.all() ? kExitOk : kExitRuntime;
}

int cmd_backbone(Ctx& c) {
    if (!c.has_out_dir) throw ParamError("backbone needs --out-dir");
    const double n = get_num(c, "n"), k = get_num(c, "k");
    const long seeds = get_int(c, "seeds", 1);
    const bool band_only = get_bool(c, "band_only");
    const std::uint64_t seed = get_seed(c);
    BackboneParams bp = backbone_constants(c.mp, k, n);
    std::vector<std::vector<std::string>> rows(seeds);
    std::size_t hits = 0;
    for (long s = 0; s < seeds; ++s) {
        std::uint64_t rs = replicate_seed(seed, n, static_cast<int>(s));
        auto vs = band_only ? sample_vertices_band(c.mp, n, rs, bp.w_hh, 2 * bp.w_hh) : sample_vertices(c.mp, n, rs);
        BackboneResult r = construct_backbone(vs, c.mp, n, k, coin_oracle(vs, c.mp, rs));
        std::size_t mn = r.per_box_counts.empty()
                             ? 0
                             : *std::min_element(r.per_box_counts.begin(), r.per_box_counts.end());
        hits += r.holds_A_bb;
        rows[s] = {std::to_string(s), std::to_string(rs), r.holds_A_bb ? "1" : "0", r.greedy_success ? "1" : "0",
                   str_of(r.band.size()), str_of(r.backbone_component.size()), str_of(mn)};
    }
    prepare_out_dir(c);
    auto os = open_out(c, "backbone.csv");
    write_csv(os, {"rep", "seed", "holds_A_bb", "greedy_success", "band_size", "backbone_size", "min_box_count"},
              rows);
    c.out << "k " << fmt_num(k) << " n' " << fmt_num(bp.n_prime) << " boxes " << bp.num_boxes() << " C1 "
          << fmt_num(bp.C1) << " w_hh " << fmt_num(bp.w_hh) << " s_k " << fmt_num(bp.s_k) << " r_k "
          << fmt_num(bp.r_k_conn) << (bp.k_above_k1() ? "" : " (k below k1: r_k > p)") << '\n';
    c.out << "A_bb frequency " << fmt_num(double(hits) / seeds) << " over " << seeds << " seeds\n";
    return kExitOk;
}

int cmd_profile(Ctx& c) {
    if (!c.has_out_dir) throw ParamError("profile-slopes needs --out-dir");
    auto grid = parse_grid(c.cfg.at("k_grid"));
    double gamma = c.cfg.at("gamma").is_null() ? exponent_report(c.mp).xg.gamma_star : get_num(c, "gamma");
    c.cfg["gamma"] = gamma;
    const int reps = static_cast<int>(get_int(c, "reps", 1));
    auto rows = profile_count_slopes(c.mp, grid, gamma, reps, get_seed(c), get_num(c, "rho"), get_num(c, "window"),
                                     run_options(c).threads);
    prepare_out_dir(c);
    std::vector<std::vector<std::string>> out;
    std::map<double, std::pair<double, double>> sums;
    for (auto& r : rows) {
        out.push_back({fmt_num(r.k), std::to_string(r.rep), fmt_num(r.count_above), str_of(r.edges_below_cross)});
        sums[r.k].first += r.count_above / reps;
        sums[r.k].second += double(r.edges_below_cross) / reps;
    }
    auto os = open_out(c, "profile_slopes.csv");
    write_csv(os, {"k", "rep", "count_above", "edges_below_cross"}, out);
    ExponentReport er = exponent_report(c.mp);
    c.out << "gamma " << fmt_num(gamma) << '\n';
    if (sums.size() >= 4) {
        std::vector<double> ks, a, e;
        for (auto& [k, v] : sums) {
            ks.push_back(k);
            a.push_back(v.first);
            e.push_back(v.second);
        }
        SlopeFit fa = fit_slope(ks, a, Transform::log, Transform::log, get_num(c, "exclude_frac"));
        c.out << "count_above slope " << fmt_num(fa.slope) << " (R2 " << fmt_num(fa.r_squared) << ")\n";
        auto osv = open_out(c, "profile_slopes.svg");
        write_fit_svg(osv, "mean count above profile", {ks, a}, fa);
        bool pos = std::all_of(e.begin(), e.end(), [](double v) { return v > 0; });
        if (pos) {
            SlopeFit fe = fit_slope(ks, e, Transform::log, Transform::log, get_num(c, "exclude_frac"));
            c.out << "edges_below_cross slope " << fmt_num(fe.slope) << " (R2 " << fmt_num(fe.r_squared) << ")\n";
        }
    }
    c.out << "reference exponents: above " << fmt_num(std::max(1 - gamma * (c.mp.tau.is_inf() ? 0.0 : c.mp.tau.value() - 1),
                                                              er.zeta_short))
          << '\n';
    return kExitOk;
}

int cmd_experiment(Ctx& c, const std::string& kind) {
    if (!c.has_out_dir) throw ParamError("experiment needs --out-dir");
    const std::uint64_t seed = get_seed(c);
    const int reps = static_cast<int>(get_int(c, "reps", 1));
    const RunOptions opt = run_options(c);
    const double excl = get_num(c, "exclude_frac");
    auto try_fit = [&](const char* name, auto&& fitter) {
        try {
            SlopeFit f = fitter();
            c.out << name << " slope " << fmt_num(f.slope) << " intercept " << fmt_num(f.intercept) << " R2 "
                  << fmt_num(f.r_squared) << " points " << f.points << '\n';
            return std::optional<SlopeFit>(f);
        } catch (const std::invalid_argument& e) {
            c.out << name << " fit skipped: " << e.what() << '\n';
            return std::optional<SlopeFit>();
        }
    };

    if (kind == "decay") {
        const double n = get_num(c, "n");
        auto grid = parse_grid(c.cfg.at("k_grid"));
        prepare_out_dir(c);
        DecayResult res = estimate_cluster_decay(c.mp, n, grid, reps, seed, opt);
        {
            std::vector<std::vector<std::string>> rows;
            for (auto& r : res.reps)
                rows.push_back({std::to_string(r.rep), std::to_string(r.seed), str_of(r.origin_size),
                                str_of(r.largest), str_of(r.second), r.origin_in_giant ? "1" : "0"});
            auto os = open_out(c, "decay_reps.csv");
            write_csv(os, {"rep", "seed", "origin_size", "largest", "second", "origin_in_giant"}, rows);
        }
        std::vector<std::vector<std::string>> rows;
        for (auto& r : res.rows)
            rows.push_back({fmt_num(r.k), str_of(r.reps), str_of(r.hits), fmt_num(r.p_hat), fmt_num(r.ci.lo),
                            fmt_num(r.ci.hi), (r.p_hat > 0 && r.p_hat < 1) ? "1" : "0"});
        auto os = open_out(c, "decay.csv");
        write_csv(os, {"k", "reps", "hits", "p_hat", "ci_lo", "ci_hi", "in_fit"}, rows);
        if (!res.monotone) c.out << "warning: p_hat not monotone in k\n";
        if (auto f = try_fit("decay", [&] { return fit_decay(res.rows, excl); })) {
            PlotSeries ps;
            for (auto& r : res.rows)
                if (r.p_hat > 0 && r.p_hat < 1) {
                    ps.x.push_back(r.k);
                    ps.y.push_back(-std::log(r.p_hat));
                }
            auto sv = open_out(c, "decay.svg");
            write_fit_svg(sv, "-log p_hat against k", ps, *f);
        }
        c.out << "target zeta_star " << fmt_num(exponent_report(c.mp).zeta_star) << '\n';
        return kExitOk;
    }
    if (kind == "second" || kind == "giant") {
        auto grid = parse_grid(c.cfg.at("n_grid"));
        prepare_out_dir(c);
        auto sizes = sample_component_sizes(c.mp, grid, reps, seed, opt);
        {
            std::vector<std::vector<std::string>> rows;
            for (auto& r : sizes)
                rows.push_back({fmt_num(r.n), std::to_string(r.rep), std::to_string(r.seed), str_of(r.vertices),
                                str_of(r.largest), str_of(r.second)});
            auto os = open_out(c, kind + "_reps.csv");
            write_csv(os, {"n", "rep", "seed", "vertices", "largest", "second"}, rows);
        }
        if (kind == "second") {
            auto summ = summarize_second(sizes);
            std::vector<std::vector<std::string>> rows;
            PlotSeries ps;
            for (auto& s : summ) {
                rows.push_back({fmt_num(s.n), str_of(s.reps), fmt_num(s.median), fmt_num(s.q25), fmt_num(s.q75)});
                ps.x.push_back(s.n);
                ps.y.push_back(s.median);
            }
            auto os = open_out(c, "second.csv");
            write_csv(os, {"n", "reps", "median", "q25", "q75"}, rows);
            if (auto f = try_fit("second", [&] { return fit_second(summ, excl); })) {
                auto sv = open_out(c, "second.svg");
                write_fit_svg(sv, "median second-largest against n", ps, *f);
            }
            double z = exponent_report(c.mp).zeta_star;
            c.out << "target slope 1/zeta_star " << fmt_num(z > 0 ? 1 / z : INFINITY) << '\n';
        } else {
            auto summ = summarize_giant(sizes);
            std::vector<std::vector<std::string>> rows;
            PlotSeries ps;
            for (auto& s : summ) {
                rows.push_back({fmt_num(s.n), str_of(s.reps), fmt_num(s.mean), fmt_num(s.stddev)});
                ps.x.push_back(s.n);
                ps.y.push_back(s.stddev);
            }
            auto os = open_out(c, "giant.csv");
            write_csv(os, {"n", "reps", "mean", "stddev"}, rows);
            if (auto f = try_fit("giant stddev", [&] {
                    return fit_slope(ps.x, ps.y, Transform::log, Transform::log, excl);
                })) {
                auto sv = open_out(c, "giant.svg");
                write_fit_svg(sv, "stddev of giant fraction against n", ps, *f);
            }
        }
        return kExitOk;
    }
    if (kind == "boundary") {
        auto grid = parse_grid(c.cfg.at("k_grid"));
        prepare_out_dir(c);
        BoundaryResult res = estimate_downward_boundary(c.mp, grid, reps, seed, opt, get_num(c, "box_factor"));
        {
            std::vector<std::vector<std::string>> rows;
            for (auto& r : res.reps)
                rows.push_back({fmt_num(r.k), std::to_string(r.rep), std::to_string(r.seed), str_of(r.explicit_count),
                                fmt_num(r.estimate)});
            auto os = open_out(c, "boundary_reps.csv");
            write_csv(os, {"k", "rep", "seed", "explicit_count", "estimate"}, rows);
        }
        std::vector<std::vector<std::string>> rows;
        PlotSeries ps;
        for (auto& r : res.rows) {
            rows.push_back({fmt_num(r.k), str_of(r.reps), fmt_num(r.mean), fmt_num(r.stderr_)});
            ps.x.push_back(r.k);
            ps.y.push_back(r.mean);
        }
        auto os = open_out(c, "boundary.csv");
        write_csv(os, {"k", "reps", "mean", "stderr"}, rows);
        if (auto f = try_fit("boundary", [&] { return fit_boundary(res.rows, excl); })) {
            auto sv = open_out(c, "boundary.svg");
            write_fit_svg(sv, "downward boundary against k", ps, *f);
        }
        c.out << "target zeta_star " << fmt_num(exponent_report(c.mp).zeta_star) << '\n';
        return kExitOk;
    }
    throw ParamError("unknown experiment '" + kind + "' (decay, second, giant, boundary)");
}

Json base_defaults() {
    Json j;
    j["seed"] = 1;
    j["threads"] = 0;
    j["method"] = "auto";
    return j;
}

const char* kExperimentHelp = R"(Experiments (all files go to --out-dir, with config.resolved):
  decay     Palm graph in volume --n; p_hat(k) = P(|C(0)| > k, origin not in the largest component)
            decay.csv: k, reps, hits, p_hat, ci_lo, ci_hi (95% Wilson), in_fit (0 < p_hat < 1)
            decay_reps.csv: rep, seed, origin_size, largest, second, origin_in_giant
            decay.svg: log(-log p_hat) against log k with the fitted line
  second    component sizes over --n-grid
            second.csv: n, reps, median, q25, q75 (of the second-largest component size)
            second_reps.csv: n, rep, seed, vertices, largest, second
            second.svg: log median against log log n
  giant     giant.csv: n, reps, mean, stddev (of largest/n)
            giant_reps.csv: n, rep, seed, vertices, largest, second
            giant.svg: log stddev against log n
  boundary  vertices of the volume-k box with an edge to a lower-or-equal mark vertex outside it;
            vertices sampled in volume box_factor*k, farther ones enter through their expected
            contribution
            boundary.csv: k, reps, mean, stderr
            boundary_reps.csv: k, rep, seed, explicit_count, estimate
            boundary.svg: log mean against log k
Grids: "a,b,c" or "start:stop:factor" (geometric, inclusive).
Fits drop the smallest --exclude-frac of the grid (default 0.2).)";

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Kernel-based spatial random graphs: exponents, sampling, cover expansion, backbone, experiments",
                 "ksrg"};
    app.require_subcommand(1);

    Flags fe, fp, fs_, fc, fb, fpr, fx;
    Json extra;

    auto* exps = app.add_subcommand("exponents", "print the exponent report");
    add_model_flags(exps, fe);
    fe.add(exps, "csv", "also write exponents.csv into --out-dir (true/false)");
    exps->footer(
        "exponents.csv: d, tau, alpha, sigma, kernel, zeta_short, zeta_ll, gamma_hl, zeta_hl, gamma_hh, zeta_hh, "
        "zeta_long, zeta_star, m_star, dominant (';'-separated), gamma_star");

    auto* phase = app.add_subcommand("phase-diagram", "sweep two parameters, write an SVG of the dominant type");
    add_model_flags(phase, fp);
    for (auto k : {"x", "y", "x_min", "x_max", "y_min", "y_max", "nx", "ny"}) fp.add(phase, k, "grid axis setting");
    phase->footer("axes: tau, alpha, sigma, d. phase_diagram.csv: <x>, <y>, dominant, m_star, zeta_star");

    auto* samp = app.add_subcommand("sample", "sample one graph and dump it");
    add_model_flags(samp, fs_);
    fs_.add(samp, "n", "volume of the box");
    fs_.add(samp, "out", "graph file (default graph.txt, inside --out-dir)");
    fs_.add(samp, "palm", "add a vertex at the origin (true/false)");
    samp->footer("format: '#' header lines, then 'id x_1 .. x_d mark' per vertex, then 'u v' per edge");

    auto* cov = app.add_subcommand("cover", "run the cover construction on a point file and certify it");
    add_model_flags(cov, fc);
    fc.add(cov, "points", "whitespace-separated points, one per line");
    fc.add(cov, "n", "volume of the box");
    fc.add(cov, "wbar", "mark level w_bar");
    fc.add(cov, "trials", "planted vertices for the connection check (default 0)");
    cov->footer("report lines: key value; the same text goes to cover_report.txt with --out-dir");

    auto* bb = app.add_subcommand("backbone", "A_bb indicator per seed");
    add_model_flags(bb, fb);
    fb.add(bb, "n", "volume of the box");
    fb.add(bb, "k", "subbox volume");
    fb.add(bb, "seeds", "number of replicates");
    fb.add(bb, "band_only", "sample only marks in [w_hh, 2 w_hh) (true/false)");
    bb->footer(
        "backbone.csv: rep, seed, holds_A_bb, greedy_success, band_size, backbone_size, min_box_count "
        "(smallest per-box count of the backbone, or of the best component when A_bb fails)");

    auto* prof = app.add_subcommand("profile-slopes", "counts above the suppressed profile and crossing edges below it");
    add_model_flags(prof, fpr);
    for (auto k : {"k_grid", "gamma", "reps", "rho", "window", "exclude_frac"}) fpr.add(prof, k, "see footer");
    prof->footer(
        "profile_slopes.csv: k, rep, count_above (vertices above the profile; the expected count beyond the "
        "window is added), edges_below_cross (edges between inside and outside vertices below the profile). "
        "gamma defaults to gamma_star, rho to 0.1, window (sampling radius in units of r_k) to 3");

    auto* ex = app.add_subcommand("experiment", "Monte Carlo campaigns");
    std::string kind;
    ex->add_option("kind", kind, "decay | second | giant | boundary")->required();
    add_model_flags(ex, fx);
    for (auto k : {"n", "k_grid", "n_grid", "reps", "box_factor", "exclude_frac"}) fx.add(ex, k, "see footer");
    ex->footer(kExperimentHelp);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "ksrg: error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        Json d = base_defaults();
        if (exps->parsed()) {
            d["csv"] = false;
            Ctx c = resolve(fe, d, out, err);
            return cmd_exponents(c);
        }
        if (phase->parsed()) {
            d["x"] = "tau";
            d["y"] = "alpha";
            d["x_min"] = 2.05;
            d["x_max"] = 4.0;
            d["y_min"] = 1.05;
            d["y_max"] = 4.0;
            d["nx"] = 80;
            d["ny"] = 80;
            Ctx c = resolve(fp, d, out, err);
            return cmd_phase(c);
        }
        if (samp->parsed()) {
            d["n"] = 1000;
            d["out"] = "graph.txt";
            d["palm"] = false;
            Ctx c = resolve(fs_, d, out, err);
            return cmd_sample(c);
        }
        if (cov->parsed()) {
            d["points"] = "";
            d["n"] = 1024;
            d["trials"] = 0;
            Ctx c = resolve(fc, d, out, err);
            if (!c.cfg.contains("wbar")) throw ParamError("cover needs --wbar");
            return cmd_cover(c);
        }
        if (bb->parsed()) {
            d["n"] = 262144;
            d["k"] = 65536;
            d["seeds"] = 10;
            d["band_only"] = false;
            Ctx c = resolve(fb, d, out, err);
            return cmd_backbone(c);
        }
        if (prof->parsed()) {
            d["k_grid"] = "64:1024:2";
            d["gamma"] = nullptr;
            d["reps"] = 30;
            d["rho"] = 0.1;
            d["window"] = 3.0;
            d["exclude_frac"] = 0.2;
            Ctx c = resolve(fpr, d, out, err);
            return cmd_profile(c);
        }
        if (ex->parsed()) {
            d["experiment"] = kind;
            d["n"] = 65536;
            d["k_grid"] = "1:64:2";
            d["n_grid"] = "16384:262144:2";
            d["reps"] = 100;
            d["box_factor"] = 4.0;
            d["exclude_frac"] = 0.2;
            if (kind == "boundary") d["k_grid"] = "256:65536:2";
            Ctx c = resolve(fx, d, out, err);
            return cmd_experiment(c, kind);
        }
    } catch (const ParamError& e) {
        err << "ksrg: config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Json::exception& e) {
        err << "ksrg: config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "ksrg: error: " << e.what() << '\n';
        return kExitRuntime;
    }
    err << "ksrg: error: no subcommand\n";
    return kExitConfig;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace ksrg::cli
