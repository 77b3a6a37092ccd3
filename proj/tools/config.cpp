#include "lsvj/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace lsvj {

using nlohmann::json;

namespace {

/// Reads members of one JSON object and rejects keys nobody asked for.
class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) fail(ErrorKind::Config, name_ + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        used_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_number()) fail(ErrorKind::Config, path(key) + ": expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(ErrorKind::Config, path(key) + ": must be finite");
        return x;
    }

    std::optional<double> optional_number(const std::string& key) {
        if (!has(key) || j_.at(key).is_null()) {
            if (has(key)) used_.insert(key);
            return std::nullopt;
        }
        return number(key, 0.0);
    }

    long long integer(const std::string& key, long long fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_number_integer()) fail(ErrorKind::Config, path(key) + ": expected an integer");
        return v.get<long long>();
    }

    std::size_t count(const std::string& key, std::size_t fallback) {
        const long long x = integer(key, static_cast<long long>(fallback));
        if (x < 0) fail(ErrorKind::Config, path(key) + ": must be non-negative");
        return static_cast<std::size_t>(x);
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_boolean()) fail(ErrorKind::Config, path(key) + ": expected true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_string()) fail(ErrorKind::Config, path(key) + ": expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) fail(ErrorKind::Config, path(key) + ": expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) fail(ErrorKind::Config, path(key) + ": expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::string path(const std::string& key) const { return name_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) fail(ErrorKind::Config, name_ + ": unknown key '" + it.key() + "'");
    }

private:
    const json& j_;
    std::string name_;
    std::set<std::string> used_;
};

PiecewiseConstant piecewise(Section& s, const std::string& key, double fallback) {
    if (!s.has(key)) return PiecewiseConstant(fallback);
    const json& v = s.raw(key);
    if (v.is_number()) return PiecewiseConstant(v.get<double>());
    Section sub(v, s.path(key));
    auto times = sub.numbers("times");
    auto values = sub.numbers("values");
    sub.finish();
    return PiecewiseConstant(std::move(times), std::move(values));
}

LocalVolSurface local_vol(Section& s) {
    if (!s.has("local_vol")) return LocalVolSurface(1.0);
    const json& v = s.raw("local_vol");
    if (v.is_number()) return LocalVolSurface(v.get<double>());
    Section sub(v, s.path("local_vol"));
    auto sn = sub.numbers("s");
    auto tn = sub.numbers("t");
    const json& rows = sub.raw("values");
    sub.finish();
    if (!rows.is_array() || rows.size() != sn.size())
        fail(ErrorKind::Config, "model.local_vol.values: expected one row per s node");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(sn.size()), static_cast<Eigen::Index>(tn.size()));
    for (std::size_t i = 0; i < sn.size(); ++i) {
        if (!rows[i].is_array() || rows[i].size() != tn.size())
            fail(ErrorKind::Config, "model.local_vol.values: expected one column per t node");
        for (std::size_t k = 0; k < tn.size(); ++k) {
            if (!rows[i][k].is_number()) fail(ErrorKind::Config, "model.local_vol.values: expected numbers");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k].get<double>();
        }
    }
    return LocalVolSurface(std::move(sn), std::move(tn), std::move(m));
}

MeixnerParams meixner(Section& s, const std::string& key) {
    MeixnerParams p;
    if (!s.has(key)) return p;
    Section sub(s.raw(key), s.path(key));
    p.a = sub.number("a", p.a);
    p.b = sub.number("b", p.b);
    p.d = sub.number("d", p.d);
    p.m = sub.number("m", p.m);
    sub.finish();
    return p;
}

template <typename F>
auto as_config_error(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) throw;
        fail(ErrorKind::Config, e.what());
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, e.what());
    }
}

}  // namespace

ModelSpec parse_model(const json& j) {
    return as_config_error([&] {
        Section s(j, "model");
        ModelSpec m;
        auto& d = m.diffusion;
        d.q = s.number("q", d.q);
        d.kappa_v = piecewise(s, "kappa_v", 0.0);
        d.theta_v = piecewise(s, "theta_v", 1.0);
        d.xi_v = piecewise(s, "xi_v", 0.0);
        d.kappa_r = piecewise(s, "kappa_r", 0.0);
        d.theta_r = piecewise(s, "theta_r", 0.05);
        d.xi_r = piecewise(s, "xi_r", 0.0);
        d.a_pow = s.number("a_pow", d.a_pow);
        d.b_pow = s.number("b_pow", d.b_pow);
        d.c_pow = s.number("c_pow", d.c_pow);
        d.local_vol = local_vol(s);
        d.rho_sr = s.number("rho_sr", 0.0);
        d.rho_vr = s.number("rho_vr", 0.0);
        if (s.has("phi_sv") && s.has("rho_sv")) fail(ErrorKind::Config, "model: give either rho_sv or phi_sv");
        d.rho_sv = s.has("phi_sv") ? cosine_law_rho(d.rho_vr, d.rho_sr, s.number("phi_sv", 0.0)) : s.number("rho_sv", 0.0);
        if (s.has("jumps")) {
            Section js(s.raw("jumps"), "model.jumps");
            JumpStructure jumps;
            jumps.idio_s = meixner(js, "idio_s");
            jumps.idio_v = meixner(js, "idio_v");
            jumps.idio_r = meixner(js, "idio_r");
            jumps.common = meixner(js, "common");
            if (js.has("loadings")) {
                const auto l = js.numbers("loadings");
                if (l.size() != 3) fail(ErrorKind::Config, "model.jumps.loadings: expected three numbers");
                jumps.loadings = {l[0], l[1], l[2]};
            }
            js.finish();
            m.jumps = jumps;
        }
        s.finish();
        m.validate();
        return m;
    });
}

InstrumentSpec parse_instrument(const json& j) {
    return as_config_error([&] {
        Section s(j, "instrument");
        InstrumentSpec inst;
        inst.kind = parse_instrument_kind(s.text("kind", to_string(inst.kind)));
        inst.strike = s.number("strike", inst.strike);
        inst.maturity = s.number("maturity", inst.maturity);
        inst.lower_barrier = s.optional_number("lower_barrier");
        inst.upper_barrier = s.optional_number("upper_barrier");
        inst.rebate = s.number("rebate", inst.rebate);
        inst.bump_width = s.number("bump_width", inst.bump_width);
        s.finish();
        inst.validate();
        return inst;
    });
}

GridSpec parse_grid(const json& j) {
    return as_config_error([&] {
        Section s(j, "grid");
        GridSpec g;
        if (s.has("n")) {
            const std::size_t n = s.count("n", 0);
            g.n_s = g.n_v = g.n_r = n;
        }
        g.n_s = s.count("n_s", g.n_s);
        g.n_v = s.count("n_v", g.n_v);
        g.n_r = s.count("n_r", g.n_r);
        g.s_max = s.number("s_max", g.s_max);
        g.v_max = s.number("v_max", g.v_max);
        g.r_max = s.number("r_max", g.r_max);
        g.s_density = s.number("s_density", g.s_density);
        g.v_density = s.number("v_density", g.v_density);
        g.r_density = s.number("r_density", g.r_density);
        g.ghost_count = s.count("ghost_count", g.ghost_count);
        g.jump_extra = s.count("jump_extra", g.jump_extra);
        g.s0 = s.number("s0", g.s0);
        g.v0 = s.number("v0", g.v0);
        g.r0 = s.number("r0", g.r0);
        g.snap_spot = s.boolean("snap_spot", g.snap_spot);
        s.finish();
        g.validate();
        return g;
    });
}

SolverConfig parse_solver(const json& j) {
    return as_config_error([&] {
        Section s(j, "solver");
        SolverConfig c;
        c.dt = s.number("dt", c.dt);
        c.theta = s.number("theta", c.theta);
        c.beta_mult = s.number("beta_mult", c.beta_mult);
        c.picard_tol = s.number("picard_tol", c.picard_tol);
        c.picard_max = static_cast<int>(s.integer("picard_max", c.picard_max));
        c.picard_strict = s.boolean("picard_strict", c.picard_strict);
        c.picard_predictor = static_cast<int>(s.integer("picard_predictor", c.picard_predictor));
        const std::string scaling = s.text("picard_scaling", "unit");
        if (scaling == "unit") c.picard_scaling = PicardScaling::Unit;
        else if (scaling == "shifted") c.picard_scaling = PicardScaling::Shifted;
        else fail(ErrorKind::Config, "solver.picard_scaling: expected 'unit' or 'shifted'");
        c.scheme = parse_scheme(s.text("scheme", to_string(c.scheme)));
        const std::string variant = s.text("mixed_variant", "B");
        if (variant == "A") c.mixed_variant = MixedVariant::A;
        else if (variant == "B") c.mixed_variant = MixedVariant::B;
        else fail(ErrorKind::Config, "solver.mixed_variant: expected 'A' or 'B'");
        c.rannacher_steps = static_cast<int>(s.integer("rannacher_steps", c.rannacher_steps));
        c.discount = s.boolean("discount", c.discount);
        s.finish();
        c.validate();
        return c;
    });
}

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
    return as_config_error([&] {
        Section s(j, "config");
        RunConfig rc;
        rc.resolved = j;
        if (s.has("model")) {
            const json& mj = s.raw("model");
            if (mj.is_string()) {
                const auto path = base_dir / mj.get<std::string>();
                std::ifstream in(path);
                if (!in) fail(ErrorKind::Config, "model file not found: " + path.string());
                json loaded;
                try {
                    loaded = json::parse(in);
                } catch (const json::exception& e) {
                    fail(ErrorKind::Config, "model file " + path.string() + ": " + e.what());
                }
                rc.model = parse_model(loaded);
                rc.resolved["model"] = loaded;
            } else {
                rc.model = parse_model(mj);
            }
        }
        if (s.has("instrument")) rc.instrument = parse_instrument(s.raw("instrument"));
        if (s.has("grid")) rc.grid = parse_grid(s.raw("grid"));
        if (s.has("solver")) rc.solver = parse_solver(s.raw("solver"));
        if (s.has("jump_options")) {
            Section js(s.raw("jump_options"), "jump_options");
            rc.jumps.M = static_cast<int>(js.integer("M", rc.jumps.M));
            const std::string interp = js.text("interpolation", "per-factor");
            if (interp == "per-factor") rc.jumps.interpolation = KappaInterpolation::PerFactor;
            else if (interp == "global") rc.jumps.interpolation = KappaInterpolation::Global;
            else fail(ErrorKind::Config, "jump_options.interpolation: expected 'per-factor' or 'global'");
            js.finish();
            if (rc.jumps.M < 1) fail(ErrorKind::Config, "jump_options.M must be at least 1");
        }
        if (s.has("convergence")) {
            Section cs(s.raw("convergence"), "convergence");
            rc.convergence.axis = cs.text("axis", rc.convergence.axis);
            rc.convergence.levels = static_cast<int>(cs.integer("levels", rc.convergence.levels));
            rc.convergence.dt0 = cs.number("dt0", rc.convergence.dt0);
            rc.convergence.n0 = cs.count("n0", rc.convergence.n0);
            cs.finish();
            if (rc.convergence.axis != "time" && rc.convergence.axis != "space")
                fail(ErrorKind::Config, "convergence.axis: expected 'time' or 'space'");
            if (rc.convergence.levels < 3) fail(ErrorKind::Config, "convergence.levels must be at least 3");
            if (!(rc.convergence.dt0 > 0.0)) fail(ErrorKind::Config, "convergence.dt0 must be positive");
            if (rc.convergence.n0 < 5) fail(ErrorKind::Config, "convergence.n0 must be at least 5");
        }
        if (s.has("timing")) {
            Section ts(s.raw("timing"), "timing");
            if (ts.has("sizes")) {
                rc.timing.sizes.clear();
                for (double x : ts.numbers("sizes")) {
                    if (x < 5 || x != std::floor(x)) fail(ErrorKind::Config, "timing.sizes: expected integers >= 5");
                    rc.timing.sizes.push_back(static_cast<std::size_t>(x));
                }
            }
            rc.timing.repeats = static_cast<int>(ts.integer("repeats", rc.timing.repeats));
            ts.finish();
            if (rc.timing.sizes.size() < 2) fail(ErrorKind::Config, "timing.sizes: need at least two sizes");
            if (rc.timing.repeats < 1) fail(ErrorKind::Config, "timing.repeats must be at least 1");
        }
        if (s.has("mc")) {
            Section ms(s.raw("mc"), "mc");
            rc.mc.paths = ms.count("paths", rc.mc.paths);
            rc.mc.steps_per_year = ms.count("steps_per_year", rc.mc.steps_per_year);
            rc.mc.chunk = ms.count("chunk", rc.mc.chunk);
            ms.finish();
            if (rc.mc.paths < 2 || rc.mc.steps_per_year < 1 || rc.mc.chunk < 1)
                fail(ErrorKind::Config, "mc: paths >= 2, steps_per_year >= 1 and chunk >= 1 required");
        }
        rc.output = s.text("output", rc.output.string());
        if (s.has("seed")) {
            const long long seed = s.integer("seed", 0);
            if (seed < 0) fail(ErrorKind::Config, "config.seed must be non-negative");
            rc.seed = static_cast<std::uint64_t>(seed);
        }
        rc.mc.seed = rc.seed;
        s.finish();
        return rc;
    });
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Config, "cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, "malformed config " + path.string() + ": " + e.what());
    }
    return parse_run_config(j, path.parent_path());
}

std::string config_hash(const json& j) {
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string RunConfig::hash() const { return config_hash(resolved); }

std::string format_number(double x) {
    if (std::isnan(x)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& hash, const std::vector<std::string>& columns)
    : os_(path), width_(columns.size()) {
    if (!os_) fail(ErrorKind::Config, "cannot write " + path.string());
    os_ << "# config_hash=" << hash << '\n';
    row_text(columns);
}

void CsvWriter::row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double x : values) cells.push_back(format_number(x));
    row_text(cells);
}

void CsvWriter::row_text(const std::vector<std::string>& cells) {
    if (cells.size() != width_) fail(ErrorKind::Domain, "CsvWriter: row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
}

}  // namespace lsvj
