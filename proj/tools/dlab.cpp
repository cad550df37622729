// dlab — configuration-driven experiment runner.
//
//   dlab run <config.toml> [--workers N] [--out DIR]
//   dlab plot <report.csv> [--log-y] [--out FILE]
//   dlab validate <config.toml>
//
// Configs are TOML-style key/value documents (sections, scalars, flat arrays,
// '#' comments).  Every run writes a manifest.json plus experiment-specific
// CSV/JSON reports; all files are written atomically (temp + rename) and all
// floating-point output uses a fixed 17-significant-digit format, so reruns
// with the same config and seed produce byte-identical data files.  The
// environment variable DLAB_SEED overrides the configured seed.
//
// Exit codes: 0 success, 1 configuration/validation failure, 2 runtime failure.

#include <dlab/bump.hpp>
#include <dlab/common.hpp>
#include <dlab/diffusivity.hpp>
#include <dlab/dissipation.hpp>
#include <dlab/evolve.hpp>
#include <dlab/fft.hpp>
#include <dlab/field_io.hpp>
#include <dlab/flows.hpp>
#include <dlab/grid.hpp>
#include <dlab/liouville.hpp>
#include <dlab/nonlinear.hpp>
#include <dlab/rational.hpp>
#include <dlab/spectral.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kArtifactVersion = "dlab 1.0.0";

// ——— formatting ———————————————————————————————————————————————————————————

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ——— error taxonomy ———————————————————————————————————————————————————————

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ——— config document ——————————————————————————————————————————————————————

struct Config {
    std::map<std::string, std::string> scalars;
    std::map<std::string, std::vector<std::string>> arrays;
    mutable std::set<std::string> touched;

    bool has(const std::string& k) const {
        return scalars.count(k) || arrays.count(k);
    }
    std::string str(const std::string& k, const std::string& def) const {
        touched.insert(k);
        auto it = scalars.find(k);
        return it == scalars.end() ? def : it->second;
    }
    double num(const std::string& k, double def) const {
        touched.insert(k);
        auto it = scalars.find(k);
        if (it == scalars.end()) return def;
        try {
            std::size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(k + ": expected a number, got '" + it->second + "'");
        }
    }
    long integer(const std::string& k, long def) const {
        double v = num(k, (double)def);
        long r = (long)std::llround(v);
        if ((double)r != v) throw ConfigError(k + ": expected an integer");
        return r;
    }
    bool boolean(const std::string& k, bool def) const {
        touched.insert(k);
        auto it = scalars.find(k);
        if (it == scalars.end()) return def;
        if (it->second == "true") return true;
        if (it->second == "false") return false;
        throw ConfigError(k + ": expected true or false");
    }
    std::vector<double> num_array(const std::string& k, std::vector<double> def) const {
        touched.insert(k);
        auto it = arrays.find(k);
        if (it == arrays.end()) {
            if (scalars.count(k)) throw ConfigError(k + ": expected an array");
            return def;
        }
        std::vector<double> out;
        for (const auto& s : it->second) {
            try {
                out.push_back(std::stod(s));
            } catch (const std::exception&) {
                throw ConfigError(k + ": expected numeric array entries, got '" + s + "'");
            }
        }
        return out;
    }
    // canonical text used for the reproducible config hash
    std::string canonical() const {
        std::ostringstream os;
        for (const auto& [k, v] : scalars) os << k << "=" << v << "\n";
        for (const auto& [k, vs] : arrays) {
            os << k << "=[";
            for (std::size_t i = 0; i < vs.size(); ++i) os << (i ? "," : "") << vs[i];
            os << "]\n";
        }
        return os.str();
    }
};

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    return s;
}

Config parse_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    Config cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(strip_comment(line));
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                                  ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                                  ": empty section name");
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": empty key");
        std::string full = section.empty() ? key : section + "." + key;
        if (cfg.scalars.count(full) || cfg.arrays.count(full))
            throw ConfigError(full + ": duplicate key");
        if (!val.empty() && val.front() == '[') {
            if (val.back() != ']')
                throw ConfigError(full + ": malformed array (arrays must be single-line)");
            std::vector<std::string> items;
            std::string body = val.substr(1, val.size() - 2);
            std::string item;
            std::istringstream bs(body);
            while (std::getline(bs, item, ',')) {
                std::string v = trim(item);
                if (!v.empty()) items.push_back(unquote(v));
            }
            cfg.arrays[full] = items;
        } else {
            if (val.empty()) throw ConfigError(full + ": empty value");
            cfg.scalars[full] = unquote(val);
        }
    }
    return cfg;
}

// FNV-1a, 64-bit; hex digest
std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

// ——— output helpers ———————————————————————————————————————————————————————

void write_text(const fs::path& p, const std::string& body) {
    dlab::atomic_write(p.string(), body);
}

std::string csv_text(const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    };
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << quote(header[i]);
    os << "\r\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << quote(r[i]);
        os << "\r\n";
    }
    return os.str();
}

// ——— typed parameters —————————————————————————————————————————————————————

struct Params {
    std::string kind;
    fs::path out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_overridden = false;

    int grid_n = 128;
    bool ladder = false;

    dlab::FlowSpec flow;
    bool flow_given = false;

    // initial condition
    std::string init_kind = "product";  // mode | product | mixed-cosine
    int init_k1 = 1, init_k2 = 1;
    double init_amplitude = 1.0;
    double init_mean = 0.0;
    double init_clamp = 0.0;      // 0 = off; else clamp fluctuation to ±value
    std::string init_normalize = "none";  // none | l2 (unit-L² fluctuation)

    dlab::EvolveConfig evolve;

    // dissipation-time
    double dt_alpha = 1.0, dt_gamma = 1.0;
    dlab::DissipationOptions dopt;

    // sweep
    std::vector<int> sweep_ms{1};
    std::vector<double> sweep_As{0.0};
    std::vector<double> sweep_alphas{1.0};
    double sweep_gamma = 1e-3;

    // diffusivity
    dlab::SdeConfig sde;
    bool diff_oracle = true;

    // nonlinear
    dlab::NonlinearKind nl_kind = dlab::NonlinearKind::CH;
    dlab::NonlinearProblem nl;

    // liouvillean
    dlab::ScheduleKind sched_kind = dlab::ScheduleKind::toy;
    int liou_K = 2;
    double liou_C = 1.01;
    long liou_samples = 1000;
    double liou_lambda = 2.0;
    int liou_grid_n = 64;
    bool liou_build_f = true;
};

dlab::FlowSpec read_flow(const Config& c, bool* given) {
    dlab::FlowSpec spec;
    std::string k = c.str("flow.kind", "zero");
    *given = c.has("flow.kind");
    if (k == "zero")
        spec.kind = dlab::FlowKind::zero;
    else if (k == "cellular")
        spec.kind = dlab::FlowKind::cellular;
    else if (k == "shear")
        spec.kind = dlab::FlowKind::shear;
    else
        throw ConfigError("flow.kind: expected zero, cellular, or shear; got '" + k + "'");
    spec.m = (int)c.integer("flow.m", 1);
    spec.A = c.num("flow.A", 1.0);
    spec.l = (int)c.integer("flow.l", 1);
    if (spec.m < 1) throw ConfigError("flow.m: must be >= 1");
    if (spec.A < 0) throw ConfigError("flow.A: must be >= 0");
    if (spec.l < 1) throw ConfigError("flow.l: must be >= 1");
    return spec;
}

Params load_params(const Config& c) {
    Params p;
    p.kind = c.str("experiment.kind", "");
    static const std::set<std::string> kinds = {"decay",       "dissipation-time", "sweep",
                                                "diffusivity", "nonlinear",        "liouvillean",
                                                "tau-relation"};
    if (!kinds.count(p.kind))
        throw ConfigError(
            "experiment.kind: expected one of decay, dissipation-time, sweep, diffusivity, "
            "nonlinear, liouvillean, tau-relation; got '" +
            p.kind + "'");
    p.out_dir = c.str("experiment.out", "out");
    double seed = c.num("experiment.seed", 0.0);
    if (seed < 0) throw ConfigError("experiment.seed: must be >= 0");
    p.seed = (std::uint64_t)seed;
    if (const char* env = std::getenv("DLAB_SEED")) {
        p.seed = (std::uint64_t)std::strtoull(env, nullptr, 10);
        p.seed_overridden = true;
    }

    p.grid_n = (int)c.integer("grid.n", 128);
    if (p.grid_n < 8 || p.grid_n % 2 != 0)
        throw ConfigError("grid.n: must be an even integer >= 8");
    p.ladder = c.boolean("grid.ladder", false);

    p.flow = read_flow(c, &p.flow_given);

    p.init_kind = c.str("initial.kind", "product");
    if (p.init_kind != "mode" && p.init_kind != "product" && p.init_kind != "mixed-cosine")
        throw ConfigError("initial.kind: expected mode, product, or mixed-cosine; got '" +
                          p.init_kind + "'");
    p.init_k1 = (int)c.integer("initial.k1", 1);
    p.init_k2 = (int)c.integer("initial.k2", p.init_kind == "mode" ? 0 : 1);
    p.init_amplitude = c.num("initial.amplitude", 1.0);
    p.init_mean = c.num("initial.mean", 0.0);
    p.init_clamp = c.num("initial.clamp", 0.0);
    p.init_normalize = c.str("initial.normalize", "none");
    if (p.init_normalize != "none" && p.init_normalize != "l2")
        throw ConfigError("initial.normalize: expected none or l2");
    if (p.init_clamp < 0) throw ConfigError("initial.clamp: must be >= 0");

    p.evolve.alpha = c.num("evolve.alpha", 1.0);
    p.evolve.gamma = c.num("evolve.gamma", 1e-3);
    p.evolve.T = c.num("evolve.T", 1.0);
    p.evolve.dt = c.num("evolve.dt", 0.0);
    p.evolve.cfl = c.num("evolve.cfl", 0.5);
    p.evolve.record_minmax = c.boolean("evolve.record_minmax", true);
    if (p.evolve.alpha <= 0) throw ConfigError("evolve.alpha: must be > 0");
    if (p.evolve.gamma < 0) throw ConfigError("evolve.gamma: must be >= 0");
    if (p.evolve.T <= 0) throw ConfigError("evolve.T: must be > 0");
    if (p.evolve.dt < 0) throw ConfigError("evolve.dt: must be >= 0");
    if (p.evolve.cfl <= 0) throw ConfigError("evolve.cfl: must be > 0");

    p.dt_alpha = c.num("dissipation.alpha", 1.0);
    p.dt_gamma = c.num("dissipation.gamma", 1.0);
    p.dopt.tol = c.num("dissipation.tol", 0.04);
    p.dopt.cfl = c.num("dissipation.cfl", 1.0);
    p.dopt.economize = c.boolean("dissipation.economize", false);
    p.dopt.seed = p.seed ? p.seed : p.dopt.seed;
    if (p.dt_alpha <= 0) throw ConfigError("dissipation.alpha: must be > 0");
    if (p.dt_gamma <= 0) throw ConfigError("dissipation.gamma: must be > 0");
    if (!(p.dopt.tol > 0 && p.dopt.tol < 0.5))
        throw ConfigError("dissipation.tol: must lie in (0, 0.5)");
    if (p.dopt.cfl <= 0) throw ConfigError("dissipation.cfl: must be > 0");

    auto ms = c.num_array("sweep.ms", {1});
    p.sweep_ms.clear();
    for (double m : ms) {
        if (m < 1 || m != std::floor(m)) throw ConfigError("sweep.ms: entries must be integers >= 1");
        p.sweep_ms.push_back((int)m);
    }
    p.sweep_As = c.num_array("sweep.As", {0.0});
    for (double a : p.sweep_As)
        if (a < 0) throw ConfigError("sweep.As: entries must be >= 0");
    p.sweep_alphas = c.num_array("sweep.alphas", {1.0});
    for (double a : p.sweep_alphas)
        if (a <= 0) throw ConfigError("sweep.alphas: entries must be > 0");
    p.sweep_gamma = c.num("sweep.gamma", 1e-3);
    if (p.sweep_gamma <= 0) throw ConfigError("sweep.gamma: must be > 0");
    if (p.kind == "sweep") {  // sweep-local overrides of the dissipation engine options
        p.dopt.tol = c.num("sweep.tol", p.dopt.tol);
        p.dopt.cfl = c.num("sweep.cfl", p.dopt.cfl);
        p.dopt.economize = c.boolean("sweep.economize", true);
        if (!(p.dopt.tol > 0 && p.dopt.tol < 0.5))
            throw ConfigError("sweep.tol: must lie in (0, 0.5)");
        if (p.dopt.cfl <= 0) throw ConfigError("sweep.cfl: must be > 0");
    }

    p.sde.paths = c.integer("diffusivity.paths", 10000);
    p.sde.T = c.num("diffusivity.T", 10.0);
    p.sde.dt = c.num("diffusivity.dt", 1e-3);
    p.sde.batches = (int)c.integer("diffusivity.batches", 20);
    p.sde.seed = p.seed ? p.seed : 20260826ULL;
    p.diff_oracle = c.boolean("diffusivity.oracle", true);
    if (p.sde.paths < 1) throw ConfigError("diffusivity.paths: must be >= 1");
    if (p.sde.T <= 0) throw ConfigError("diffusivity.T: must be > 0");
    if (p.sde.dt <= 0) throw ConfigError("diffusivity.dt: must be > 0");
    if (p.sde.batches < 2) throw ConfigError("diffusivity.batches: must be >= 2");

    std::string nk = c.str("nonlinear.kind", "ch");
    if (nk == "ch")
        p.nl_kind = dlab::NonlinearKind::CH;
    else if (nk == "ks")
        p.nl_kind = dlab::NonlinearKind::KS;
    else if (nk == "tf")
        p.nl_kind = dlab::NonlinearKind::TF;
    else if (nk == "pme")
        p.nl_kind = dlab::NonlinearKind::PME;
    else if (nk == "plap")
        p.nl_kind = dlab::NonlinearKind::PLAP;
    else
        throw ConfigError("nonlinear.kind: expected ch, ks, tf, pme, or plap; got '" + nk + "'");
    p.nl.kind = p.nl_kind;
    p.nl.gamma = c.num("nonlinear.gamma", p.nl.gamma);
    p.nl.p = c.num("nonlinear.p", p.nl.p);
    p.nl.q = c.num("nonlinear.q", p.nl.q);
    p.nl.nu = c.num("nonlinear.nu", p.nl.nu);
    p.nl.h = c.num("nonlinear.h", p.nl.h);
    p.nl.mu = c.num("nonlinear.mu", p.nl.mu);
    p.nl.beta = c.num("nonlinear.beta", p.nl.beta);
    p.nl.ks_bound_factor = c.num("nonlinear.bound_factor", p.nl.ks_bound_factor);
    p.nl.run.T = c.num("nonlinear.T", 1.0);
    p.nl.run.dt = c.num("nonlinear.dt", 0.0);
    p.nl.run.cfl = c.num("nonlinear.cfl", 0.5);
    if (p.nl.gamma <= 0) throw ConfigError("nonlinear.gamma: must be > 0");
    if (p.nl.nu <= 0) throw ConfigError("nonlinear.nu: must be > 0");
    if (p.nl.h <= 0) throw ConfigError("nonlinear.h: must be > 0");
    if (p.nl.p <= 1) throw ConfigError("nonlinear.p: must be > 1");
    if (p.nl.q < 1) throw ConfigError("nonlinear.q: must be >= 1");
    if (p.nl.run.T <= 0) throw ConfigError("nonlinear.T: must be > 0");
    if (p.nl.run.cfl <= 0) throw ConfigError("nonlinear.cfl: must be > 0");
    if (p.nl.mu <= 0) throw ConfigError("nonlinear.mu: must be > 0");
    if (p.nl.beta <= 0) throw ConfigError("nonlinear.beta: must be > 0");

    std::string sk = c.str("liouvillean.schedule", "toy");
    if (sk == "toy")
        p.sched_kind = dlab::ScheduleKind::toy;
    else if (sk == "canonical")
        p.sched_kind = dlab::ScheduleKind::canonical;
    else
        throw ConfigError("liouvillean.schedule: expected toy or canonical; got '" + sk + "'");
    p.liou_K = (int)c.integer("liouvillean.K", 2);
    p.liou_C = c.num("liouvillean.C", 1.01);
    p.liou_samples = c.integer("liouvillean.residual_samples", 1000);
    p.liou_lambda = c.num("liouvillean.lambda", 2.0);
    p.liou_grid_n = (int)c.integer("liouvillean.grid_n", 64);
    p.liou_build_f = c.boolean("liouvillean.build_f", true);
    if (p.liou_K < 1) throw ConfigError("liouvillean.K: must be >= 1");
    if (p.liou_C <= 0) throw ConfigError("liouvillean.C: must be > 0");
    if (p.liou_samples < 10) throw ConfigError("liouvillean.residual_samples: must be >= 10");
    if (p.liou_lambda < 0) throw ConfigError("liouvillean.lambda: must be >= 0");
    if (p.liou_grid_n < 8 || p.liou_grid_n % 2 != 0)
        throw ConfigError("liouvillean.grid_n: must be an even integer >= 8");
    if (p.sched_kind == dlab::ScheduleKind::canonical && p.liou_K > 3)
        throw ConfigError("liouvillean.K: canonical schedule is limited to K <= 3");
    if (p.sched_kind == dlab::ScheduleKind::toy && p.liou_K > 4)
        throw ConfigError("liouvillean.K: toy schedule is limited to K <= 4");

    if (p.ladder && p.kind != "decay" && p.kind != "dissipation-time" && p.kind != "tau-relation")
        throw ConfigError("grid.ladder: resolution ladder supports decay, dissipation-time, and "
                          "tau-relation experiments only");

    // reject unknown keys so typos fail loudly
    for (const auto& [k, v] : c.scalars)
        if (!c.touched.count(k)) throw ConfigError(k + ": unknown key");
    for (const auto& [k, v] : c.arrays)
        if (!c.touched.count(k)) throw ConfigError(k + ": unknown key");
    return p;
}

// ——— initial data —————————————————————————————————————————————————————————

dlab::ScalarField build_initial(const Params& p, const dlab::Grid& g) {
    dlab::ScalarField f(g);
    const double tp = dlab::TWO_PI;
    for (int i2 = 0; i2 < g.n; ++i2) {
        double x2 = (double)i2 / g.n;
        for (int i1 = 0; i1 < g.n; ++i1) {
            double x1 = (double)i1 / g.n;
            double v = 0.0;
            if (p.init_kind == "mode")
                v = std::sin(tp * (p.init_k1 * x1 + p.init_k2 * x2));
            else if (p.init_kind == "product")
                v = std::sin(tp * p.init_k1 * x1) * std::sin(tp * p.init_k2 * x2);
            else  // mixed-cosine: asymmetric two-harmonic profile in each direction
                v = std::cos(tp * x1) + 0.5 * std::cos(2 * tp * x1) + 0.7 * std::cos(tp * x2) +
                    0.35 * std::cos(2 * tp * x2);
            v *= p.init_amplitude;
            if (p.init_clamp > 0) v = std::clamp(v, -p.init_clamp, p.init_clamp);
            f.at(i2, i1) = v;
        }
    }
    if (p.init_normalize == "l2") {
        double mean = 0.0;
        for (double v : f.v) mean += v;
        mean /= (double)f.v.size();
        double s2 = 0.0;
        for (double v : f.v) s2 += (v - mean) * (v - mean);
        double nrm = std::sqrt(s2 / (double)f.v.size());
        if (nrm <= 0) throw dlab::Error("initial: zero fluctuation cannot be normalized");
        for (double& v : f.v) v = (v - mean) / nrm + mean;
    }
    for (double& v : f.v) v += p.init_mean;
    return f;
}

// ——— manifest —————————————————————————————————————————————————————————————

struct Manifest {
    json j;
    std::vector<json> jobs;
    std::vector<std::string> files;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    Manifest(const Params& p, const std::string& hash) {
        j["artifact"] = kArtifactVersion;
        j["config_hash"] = hash;
        j["experiment"] = p.kind;
        j["seed"] = p.seed;
        j["seed_overridden"] = p.seed_overridden;
    }
    void add_file(const std::string& name) { files.push_back(name); }
    void add_job(const std::string& name, bool ok, const std::string& err = "") {
        json job;
        job["name"] = name;
        job["status"] = ok ? "ok" : "failed";
        if (!err.empty()) job["error"] = err;
        jobs.push_back(job);
    }
    bool all_ok() const {
        for (const auto& job : jobs)
            if (job["status"] != "ok") return false;
        return true;
    }
    void write(const fs::path& dir) {
        double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        j["wall_seconds"] = wall;
        j["jobs"] = jobs;
        std::sort(files.begin(), files.end());
        j["files"] = files;
        write_text(dir / "manifest.json", j.dump(2) + "\n");
    }
};

// trajectory CSV: time,l2,hs_alpha,min,max
std::string trajectory_csv(const dlab::Trajectory& tr) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        bool mm = i < tr.vmin.size();
        rows.push_back({fmt17(tr.t[i]), fmt17(tr.l2[i]), fmt17(tr.hs_alpha[i]),
                        mm ? fmt17(tr.vmin[i]) : "", mm ? fmt17(tr.vmax[i]) : ""});
    }
    return csv_text({"time", "l2", "hs_alpha", "min", "max"}, rows);
}

json dissipation_json(const dlab::DissipationReport& r) {
    json j;
    j["alpha"] = r.alpha;
    j["gamma"] = r.gamma;
    j["tau"] = r.tau;
    j["t_lo"] = r.t_lo;
    j["t_hi"] = r.t_hi;
    j["tol"] = r.tol;
    j["grid_n"] = r.grid_n;
    j["dt"] = r.dt;
    j["method"] = r.method;
    j["power_iterations"] = r.power_iterations;
    j["total_steps"] = r.total_steps;
    j["diverged"] = r.diverged;
    return j;
}

std::string samples_csv(const std::vector<dlab::NormSample>& ss) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : ss)
        rows.push_back({fmt17(s.t), fmt17(s.norm), s.converged ? "1" : "0"});
    return csv_text({"t", "norm", "converged"}, rows);
}

// ——— experiments ——————————————————————————————————————————————————————————

const char* c_str_of(dlab::NonlinearKind k) {
    switch (k) {
        case dlab::NonlinearKind::CH: return "ch";
        case dlab::NonlinearKind::KS: return "ks";
        case dlab::NonlinearKind::TF: return "tf";
        case dlab::NonlinearKind::PME: return "pme";
        case dlab::NonlinearKind::PLAP: return "plap";
    }
    return "?";
}

struct Headline {
    double value = 0.0;
    bool have = false;
};

// run the experiment once at resolution n; returns the ladder headline (if any)
Headline run_once(const Params& p, int n, const fs::path& dir, Manifest& man) {
    Headline head;
    dlab::Grid g(2, n);

    auto build_u = [&](const dlab::Grid& gg) -> std::optional<dlab::VelocityField> {
        if (p.flow.kind == dlab::FlowKind::zero || p.flow.A == 0.0) return std::nullopt;
        return dlab::build_flow(p.flow, gg);
    };

    if (p.kind == "decay") {
        auto u = build_u(g);
        dlab::ScalarField th0 = build_initial(p, g);
        auto [thT, tr] = dlab::evolve(th0, u ? &*u : nullptr, p.evolve);
        write_text(dir / "trajectory.csv", trajectory_csv(tr));
        man.add_file("trajectory.csv");
        json j;
        j["alpha"] = tr.alpha;
        j["gamma"] = tr.gamma;
        j["dt"] = tr.dt;
        j["grid_n"] = n;
        j["l2_initial"] = tr.l2.front();
        j["l2_final"] = tr.l2.back();
        j["energy_residual"] = dlab::energy_residual(tr);
        write_text(dir / "report.json", j.dump(2) + "\n");
        man.add_file("report.json");
        std::cout << "decay: n=" << n << " l2_final=" << fmt17(tr.l2.back())
                  << " residual=" << fmt17(dlab::energy_residual(tr)) << "\n";
        man.add_job("decay", true);
        head = {tr.l2.back(), true};
    } else if (p.kind == "dissipation-time") {
        auto u = build_u(g);
        dlab::DissipationReport rep =
            dlab::dissipation_time(u ? &*u : nullptr, g, p.dt_gamma, p.dt_alpha, p.dopt);
        write_text(dir / "report.json", dissipation_json(rep).dump(2) + "\n");
        man.add_file("report.json");
        write_text(dir / "samples.csv", samples_csv(rep.samples));
        man.add_file("samples.csv");
        std::cout << "dissipation-time: n=" << n << " alpha=" << fmt17(rep.alpha)
                  << " gamma=" << fmt17(rep.gamma) << " tau=" << fmt17(rep.tau) << " ["
                  << fmt17(rep.t_lo) << ", " << fmt17(rep.t_hi) << "]\n";
        man.add_job("dissipation-time", true);
        head = {rep.tau, true};
    } else if (p.kind == "sweep") {
        dlab::DissipationOptions base = p.dopt;
        dlab::SweepTable table =
            dlab::enhancement_sweep(p.sweep_ms, p.sweep_As, p.sweep_alphas, p.sweep_gamma, g, base);
        std::vector<std::vector<std::string>> rows;
        for (const auto& cell : table.cells) {
            char name[96];
            std::snprintf(name, sizeof name, "samples_m%d_A%g_a%g.csv", cell.m, cell.A,
                          cell.alpha);
            std::string job = std::string("cell m=") + std::to_string(cell.m) +
                              " A=" + fmt17(cell.A) + " alpha=" + fmt17(cell.alpha);
            if (cell.failed) {
                man.add_job(job, false, cell.error);
                rows.push_back({std::to_string(cell.m), fmt17(cell.A), fmt17(cell.alpha),
                                fmt17(p.sweep_gamma), "", "", "", ""});
                continue;
            }
            write_text(dir / name, samples_csv(cell.rep.samples));
            man.add_file(name);
            rows.push_back({std::to_string(cell.m), fmt17(cell.A), fmt17(cell.alpha),
                            fmt17(p.sweep_gamma), fmt17(cell.rep.tau), fmt17(cell.rep.t_lo),
                            fmt17(cell.rep.t_hi), name});
            std::cout << "sweep: m=" << cell.m << " A=" << fmt17(cell.A)
                      << " alpha=" << fmt17(cell.alpha) << " tau=" << fmt17(cell.rep.tau) << "\n";
            man.add_job(job, true);
        }
        write_text(dir / "sweep.csv",
                   csv_text({"m", "A", "alpha", "gamma", "tau", "t_lo", "t_hi",
                             "norm_samples_file"},
                            rows));
        man.add_file("sweep.csv");
    } else if (p.kind == "diffusivity") {
        if (p.flow.kind == dlab::FlowKind::zero || p.flow.A == 0.0)
            throw dlab::Error("diffusivity: needs a nonzero flow (flow.kind/flow.A)");
        dlab::VelocityField u = dlab::build_flow(p.flow, g);
        dlab::SdeConfig cfg = p.sde;
        dlab::validate(cfg, u.max_abs());
        dlab::MsdSeries series = dlab::simulate_sde(u, {0.0, 0.0}, cfg);
        dlab::DiffusivityReport rep = dlab::d_min(u, cfg, p.diff_oracle);
        json j;
        j["paths"] = cfg.paths;
        j["T"] = cfg.T;
        j["dt"] = cfg.dt;
        j["D_min"] = rep.D;
        j["d_ge_one"] = rep.d_ge_one;
        j["x0_independent"] = rep.x0_independent;
        for (int cdir = 0; cdir < 2; ++cdir) {
            json dj;
            dj["D"] = rep.mc[cdir].D;
            dj["ci_half"] = rep.mc[cdir].ci_half;
            dj["r2"] = rep.mc[cdir].r2;
            dj["horizon_ok"] = rep.mc[cdir].horizon_ok;
            if (p.diff_oracle) {
                dj["oracle"] = rep.oracle[cdir];
                dj["oracle_ok"] = rep.oracle_ok[cdir];
            }
            j[cdir == 0 ? "e1" : "e2"] = dj;
        }
        write_text(dir / "report.json", j.dump(2) + "\n");
        man.add_file("report.json");
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < series.t.size(); ++i)
            rows.push_back({fmt17(series.t[i]), fmt17(series.msd[0][i]), fmt17(series.sem[0][i]),
                            fmt17(series.msd[1][i]), fmt17(series.sem[1][i])});
        write_text(dir / "msd.csv",
                   csv_text({"t", "msd_e1", "sem_e1", "msd_e2", "sem_e2"}, rows));
        man.add_file("msd.csv");
        std::cout << "diffusivity: D_min=" << fmt17(rep.D) << " e1=" << fmt17(rep.mc[0].D)
                  << "±" << fmt17(rep.mc[0].ci_half) << " e2=" << fmt17(rep.mc[1].D) << "±"
                  << fmt17(rep.mc[1].ci_half) << "\n";
        man.add_job("diffusivity", true);
    } else if (p.kind == "nonlinear") {
        dlab::NonlinearProblem prob = p.nl;
        prob.initial = build_initial(p, g);
        std::optional<dlab::VelocityField> u = build_u(g);
        if (!u) throw dlab::Error("nonlinear: needs a nonzero flow for the twin experiment");
        prob.flow = &*u;
        dlab::DecayReport rep = dlab::suppression_experiment(prob);
        write_text(dir / "with_flow.csv", trajectory_csv(rep.with_flow));
        man.add_file("with_flow.csv");
        write_text(dir / "no_flow.csv", trajectory_csv(rep.no_flow));
        man.add_file("no_flow.csv");
        // combined twin CSV on the shared time grid, with the decay criterion line
        {
            std::vector<std::vector<std::string>> rows;
            double L0 = rep.with_flow.l2.empty() ? 0.0 : rep.with_flow.l2.front();
            for (std::size_t i = 0; i < rep.with_flow.t.size(); ++i) {
                double t = rep.with_flow.t[i];
                double env;
                if (p.nl_kind == dlab::NonlinearKind::CH || p.nl_kind == dlab::NonlinearKind::TF)
                    env = prob.beta * std::exp(-prob.mu * t);
                else if (p.nl_kind == dlab::NonlinearKind::KS)
                    env = prob.ks_bound_factor * L0;
                else
                    env = 0.5 * L0;
                rows.push_back({fmt17(t), fmt17(rep.with_flow.l2[i]),
                                i < rep.no_flow.l2.size() ? fmt17(rep.no_flow.l2[i]) : "",
                                fmt17(env)});
            }
            write_text(dir / "decay.csv",
                       csv_text({"time", "l2_with_flow", "l2_no_flow", "envelope"}, rows));
            man.add_file("decay.csv");
        }
        json j;
        j["kind"] = c_str_of(p.nl_kind);
        j["pass"] = rep.pass;
        j["flow_ok"] = rep.flow_ok;
        j["noflow_fails"] = rep.noflow_fails;
        j["partial"] = rep.partial;
        j["rate_with_flow"] = rep.rate_with_flow;
        j["rate_no_flow"] = rep.rate_no_flow;
        if (!rep.note.empty()) j["note"] = rep.note;
        write_text(dir / "report.json", j.dump(2) + "\n");
        man.add_file("report.json");
        std::cout << "nonlinear: kind=" << c_str_of(p.nl_kind) << " pass=" << rep.pass
                  << " flow_ok=" << rep.flow_ok << " noflow_fails=" << rep.noflow_fails << "\n";
        man.add_job("nonlinear", true);
    } else if (p.kind == "liouvillean") {
        dlab::LiouvilleSchedule sched = dlab::build_schedule(p.sched_kind, p.liou_K, p.liou_C);
        dlab::HomologyPartial hp = dlab::assemble_partials(sched, p.liou_K);
        dlab::ResidualReport rr = dlab::homology_residual(hp, p.liou_samples);
        double residual = rr.max_residual;
        std::vector<int> Ks;
        for (int k = 1; k <= p.liou_K; ++k) Ks.push_back(k);
        auto rows_s = dlab::sobolev_growth(hp, Ks);
        auto rows_l = dlab::r_lambda_diagnostics(hp, p.liou_lambda, Ks);
        json j;
        j["schedule"] = p.sched_kind == dlab::ScheduleKind::toy ? "toy" : "canonical";
        j["K"] = p.liou_K;
        j["C"] = p.liou_C;
        j["rotation"] = dlab::to_double(sched.rotation);
        json approx = json::array();
        for (const auto& a : sched.approx) {
            json aj;
            aj["q"] = a.q.str();
            aj["p"] = a.p.str();
            aj["defect"] = dlab::to_double(a.defect);
            aj["bound"] = dlab::to_double(a.bound);
            approx.push_back(aj);
        }
        j["approximants"] = approx;
        j["residual"] = residual;
        j["clean_covers"] = [&] {
            for (const auto& lv : hp.levels)
                if (!lv.clean_covers) return false;
            return true;
        }();
        if (p.liou_build_f) {
            dlab::FField F = dlab::build_F(hp, dlab::Grid(2, p.liou_grid_n));
            j["min_F"] = F.min_f;
            j["mean_F_row0"] = F.mean_row0;
        }
        write_text(dir / "schedule.json", j.dump(2) + "\n");
        man.add_file("schedule.json");
        std::vector<std::vector<std::string>> drows;
        for (std::size_t i = 0; i < rows_s.size(); ++i) {
            const auto& r = rows_s[i];
            drows.push_back({std::to_string(r.K), hp.levels[(std::size_t)r.K - 1].q.str(),
                             fmt17(r.h0), fmt17(r.h1), fmt17(r.h2), fmt17(r.rt_l4_level),
                             fmt17(r.l4_bound), fmt17(rows_l[i].h1), fmt17(rows_l[i].h2)});
        }
        write_text(dir / "diagnostics.csv",
                   csv_text({"K", "q", "h0", "h1", "h2", "l4_level", "l4_bound", "rlambda_h1",
                             "rlambda_h2"},
                            drows));
        man.add_file("diagnostics.csv");
        // per-atom profile samples: local cross-sections of the finest partial sum
        std::vector<std::vector<std::string>> prows;
        for (int k = 1; k <= p.liou_K; ++k) {
            const auto& lv = hp.levels[(std::size_t)k - 1];
            std::vector<dlab::BigInt> ls{0, 1};
            if (lv.q > 2) ls.push_back(lv.q - 1);
            for (const auto& l : ls) {
                dlab::BigRat center = dlab::BigRat(l) * sched.rotation;
                for (int o = -16; o <= 16; ++o) {
                    dlab::BigRat x = center + dlab::BigRat(o, 8) * lv.width;
                    double v = -dlab::detail::qtilde_eval_s6(lv.S6, x);
                    prows.push_back({std::to_string(k), l.str(), fmt17(o / 8.0), fmt17(v)});
                }
            }
        }
        write_text(dir / "profile.csv",
                   csv_text({"level", "atom", "offset_over_width", "value"}, prows));
        man.add_file("profile.csv");
        std::cout << "liouvillean: schedule=" << j["schedule"].get<std::string>()
                  << " K=" << p.liou_K << " residual=" << fmt17(residual) << "\n";
        man.add_job("liouvillean", true);
    } else if (p.kind == "tau-relation") {
        auto u = build_u(g);
        dlab::TauRelation rel = dlab::tau_relation_check(u ? &*u : nullptr, g, p.dt_gamma, p.dopt);
        json j;
        j["gamma"] = p.dt_gamma;
        j["grid_n"] = n;
        j["tau1"] = rel.tau1;
        j["tau2"] = rel.tau2;
        j["u_c2"] = rel.u_c2;
        j["c_min"] = rel.c_min;
        write_text(dir / "report.json", j.dump(2) + "\n");
        man.add_file("report.json");
        std::cout << "tau-relation: tau1=" << fmt17(rel.tau1) << " tau2=" << fmt17(rel.tau2)
                  << " c_min=" << fmt17(rel.c_min) << "\n";
        man.add_job("tau-relation", true);
        head = {rel.c_min, true};
    }
    return head;
}

int cmd_run(const Params& p, const std::string& hash) {
    fs::create_directories(p.out_dir);
    Manifest man(p, hash);
    int exit_code = 0;
    try {
        if (p.ladder) {
            int n = p.grid_n;
            Headline prev = run_once(p, n, p.out_dir, man);
            man.j["ladder"] = json::array({n});
            while (prev.have && n < 512) {
                int n2 = 2 * n;
                Headline next = run_once(p, n2, p.out_dir, man);
                man.j["ladder"].push_back(n2);
                double rel = std::abs(next.value - prev.value) /
                             std::max(1e-300, std::abs(prev.value));
                std::cout << "ladder: n=" << n << "->" << n2 << " change=" << fmt17(rel) << "\n";
                n = n2;
                prev = next;
                if (rel < 0.02) break;
            }
        } else {
            run_once(p, p.grid_n, p.out_dir, man);
        }
    } catch (const std::exception& e) {
        man.add_job(p.kind, false, e.what());
        std::cerr << "error: " << e.what() << "\n";
        exit_code = 2;
    }
    if (!man.all_ok()) exit_code = 2;
    man.write(p.out_dir);
    return exit_code;
}

// ——— plotting —————————————————————————————————————————————————————————————

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> cols;     // parsed numeric values
    std::vector<std::vector<bool>> present;    // cell non-empty
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool q = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (q) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"')
                q = false;
            else
                cur += c;
        } else if (c == '"')
            q = true;
        else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else
            cur += c;
    }
    out.push_back(cur);
    return out;
}

Table read_table(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot open report: " + p.string());
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(p.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    t.header = split_csv_line(line);
    t.cols.resize(t.header.size());
    t.present.resize(t.header.size());
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != t.header.size())
            throw ConfigError(p.string() + ": ragged row (expected " +
                              std::to_string(t.header.size()) + " cells)");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            bool pres = !cells[i].empty();
            double v = 0.0;
            if (pres) {
                try {
                    v = std::stod(cells[i]);
                } catch (const std::exception&) {
                    throw ConfigError(p.string() + ": non-numeric cell '" + cells[i] + "'");
                }
            }
            t.cols[i].push_back(v);
            t.present[i].push_back(pres);
        }
    }
    return t;
}

std::string svg_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '&')
            o += "&amp;";
        else if (c == '<')
            o += "&lt;";
        else if (c == '>')
            o += "&gt;";
        else
            o += c;
    }
    return o;
}

int cmd_plot(const fs::path& csv_path, bool log_y, fs::path out_path) {
    Table t = read_table(csv_path);
    if (t.header.size() < 2 || !(t.header[0] == "time" || t.header[0] == "t"))
        throw ConfigError(csv_path.string() +
                          ": unknown report schema (expected a time-series CSV whose first "
                          "column is 'time' or 't')");
    if (t.cols[0].empty()) throw ConfigError(csv_path.string() + ": no data rows");

    // config hash from the sibling manifest when available, else hash of the CSV bytes
    std::string hash;
    {
        fs::path man = csv_path.parent_path() / "manifest.json";
        std::ifstream mi(man);
        if (mi) {
            try {
                json mj = json::parse(mi);
                hash = mj.value("config_hash", "");
            } catch (const std::exception&) {
            }
        }
        if (hash.empty()) {
            std::ifstream ci(csv_path, std::ios::binary);
            std::ostringstream body;
            body << ci.rdbuf();
            hash = fnv1a_hex(body.str());
        }
    }

    const double W = 720, H = 480, mL = 70, mR = 160, mT = 30, mB = 50;
    auto ytrans = [&](double v) { return log_y ? std::log10(v) : v; };

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (std::size_t i = 0; i < t.cols[0].size(); ++i) {
        xmin = std::min(xmin, t.cols[0][i]);
        xmax = std::max(xmax, t.cols[0][i]);
    }
    for (std::size_t c = 1; c < t.cols.size(); ++c)
        for (std::size_t i = 0; i < t.cols[c].size(); ++i) {
            if (!t.present[c][i]) continue;
            double v = t.cols[c][i];
            if (log_y && v <= 0) continue;
            ymin = std::min(ymin, ytrans(v));
            ymax = std::max(ymax, ytrans(v));
        }
    if (!(ymin <= ymax))
        throw ConfigError(csv_path.string() + ": no plottable values" +
                          (log_y ? " (all nonpositive under --log-y)" : ""));
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto X = [&](double x) { return mL + (x - xmin) / (xmax - xmin) * (W - mL - mR); };
    auto Y = [&](double v) { return H - mB - (ytrans(v) - ymin) / (ymax - ymin) * (H - mT - mB); };
    auto f6 = [](double v) {
        char b[32];
        std::snprintf(b, sizeof b, "%.6f", v);
        return std::string(b);
    };

    static const char* palette[] = {"#1f6fb2", "#c23b22", "#2e8b57", "#8856a7",
                                    "#b8860b", "#555555"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    svg << "<!-- dlab-config-hash: " << hash << " -->\n";
    svg << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    // axes
    svg << "<line x1=\"" << f6(mL) << "\" y1=\"" << f6(H - mB) << "\" x2=\"" << f6(W - mR)
        << "\" y2=\"" << f6(H - mB) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << f6(mL) << "\" y1=\"" << f6(mT) << "\" x2=\"" << f6(mL) << "\" y2=\""
        << f6(H - mB) << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        double x = xmin + k * (xmax - xmin) / 4;
        double yv = ymin + k * (ymax - ymin) / 4;
        svg << "<text x=\"" << f6(X(x)) << "\" y=\"" << f6(H - mB + 18)
            << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"monospace\">"
            << fmt17(x).substr(0, 9) << "</text>\n";
        double yl = log_y ? std::pow(10.0, yv) : yv;
        svg << "<text x=\"" << f6(mL - 6) << "\" y=\""
            << f6(H - mB - k * (H - mT - mB) / 4.0 + 4)
            << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"monospace\">"
            << fmt17(yl).substr(0, 9) << "</text>\n";
    }
    svg << "<text x=\"" << f6((mL + W - mR) / 2) << "\" y=\"" << f6(H - 12)
        << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"monospace\">"
        << svg_escape(t.header[0]) << "</text>\n";
    for (std::size_t c = 1; c < t.cols.size(); ++c) {
        const char* color = palette[(c - 1) % 6];
        std::ostringstream pts;
        bool pen_up = true;
        std::string path;
        for (std::size_t i = 0; i < t.cols[0].size(); ++i) {
            bool ok = t.present[c][i] && (!log_y || t.cols[c][i] > 0);
            if (!ok) {
                pen_up = true;
                continue;
            }
            path += (pen_up ? "M" : "L");
            path += f6(X(t.cols[0][i])) + " " + f6(Y(t.cols[c][i])) + " ";
            pen_up = false;
        }
        if (!path.empty())
            svg << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\"/>\n";
        svg << "<text x=\"" << f6(W - mR + 12) << "\" y=\"" << f6(mT + 16.0 * (double)c)
            << "\" font-size=\"12\" fill=\"" << color << "\" font-family=\"monospace\">"
            << svg_escape(t.header[c]) << "</text>\n";
    }
    svg << "</svg>\n";
    if (out_path.empty()) {
        out_path = csv_path;
        out_path.replace_extension(".svg");
    }
    write_text(out_path, svg.str());
    std::cout << "plot: wrote " << out_path.string() << "\n";
    return 0;
}

void usage() {
    std::cerr << "usage:\n"
              << "  dlab run <config> [--workers N] [--out DIR]\n"
              << "  dlab plot <report.csv> [--log-y] [--out FILE]\n"
              << "  dlab validate <config>\n";
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) {
        usage();
        return 1;
    }
    std::string cmd = args[0];
    try {
        if (cmd == "run" || cmd == "validate") {
            if (args.size() < 2) {
                usage();
                return 1;
            }
            fs::path cfg_path = args[1];
            std::string out_override;
            long workers = 1;
            for (std::size_t i = 2; i < args.size(); ++i) {
                if (args[i] == "--out" && i + 1 < args.size())
                    out_override = args[++i];
                else if (args[i] == "--workers" && i + 1 < args.size())
                    workers = std::stol(args[++i]);
                else
                    throw ConfigError("unknown argument: " + args[i]);
            }
            if (workers < 1) throw ConfigError("--workers: must be >= 1");
            Config cfg = parse_config(cfg_path);
            Params p = load_params(cfg);
            if (!out_override.empty()) p.out_dir = out_override;
            std::string hash =
                fnv1a_hex(cfg.canonical() + "seed=" + std::to_string(p.seed) + "\n");
            if (cmd == "validate") {
                std::cout << "ok: " << p.kind << " config, hash " << hash << "\n";
                return 0;
            }
            return cmd_run(p, hash);
        }
        if (cmd == "plot") {
            if (args.size() < 2) {
                usage();
                return 1;
            }
            fs::path csv = args[1];
            bool log_y = false;
            fs::path out;
            for (std::size_t i = 2; i < args.size(); ++i) {
                if (args[i] == "--log-y")
                    log_y = true;
                else if (args[i] == "--out" && i + 1 < args.size())
                    out = args[++i];
                else
                    throw ConfigError("unknown argument: " + args[i]);
            }
            return cmd_plot(csv, log_y, out);
        }
        usage();
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
