#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fluxent/concurrence.hpp"
#include "fluxent/errors.hpp"
#include "fluxent/floquet.hpp"
#include "fluxent/lindblad.hpp"
#include "fluxent/model.hpp"

namespace fluxent {

enum class Method { Numeric, Analytic, Both };

inline Method parse_method(const std::string& s) {
    if (s == "numeric") return Method::Numeric;
    if (s == "analytic") return Method::Analytic;
    if (s == "both") return Method::Both;
    throw ParameterError("method must be numeric, analytic or both, got '" + s + "'");
}

inline const char* to_string(Method m) {
    switch (m) {
        case Method::Numeric: return "numeric";
        case Method::Analytic: return "analytic";
        default: return "both";
    }
}

inline const std::vector<std::string>& parameter_names() {
    static const std::vector<std::string> names{"eps1",   "eps2",       "delta1",     "delta2",        "g",
                                                "amplitude", "omega",   "phi0",       "gamma1",        "gamma2",
                                                "gamma_phi1", "gamma_phi2", "temperature_mk"};
    return names;
}

template <class P>
auto& parameter_field(P& p, const std::string& name) {
    if (name == "eps1") return p.q1.eps;
    if (name == "eps2") return p.q2.eps;
    if (name == "delta1") return p.q1.delta;
    if (name == "delta2") return p.q2.delta;
    if (name == "g") return p.g;
    if (name == "amplitude") return p.drive.amplitude;
    if (name == "omega") return p.drive.omega;
    if (name == "phi0") return p.drive.phi0;
    if (name == "gamma1") return p.q1.gamma_relax;
    if (name == "gamma2") return p.q2.gamma_relax;
    if (name == "gamma_phi1") return p.q1.gamma_phi;
    if (name == "gamma_phi2") return p.q2.gamma_phi;
    if (name == "temperature_mk") return p.temperature_mk;
    throw ParameterError("unknown parameter '" + name + "'");
}

inline void set_parameter(SystemParams& p, const std::string& name, double v) { parameter_field(p, name) = v; }

inline double parameter_value(const SystemParams& p, const std::string& name) { return parameter_field(p, name); }

struct SweepAxis {
    std::string name;
    double lo{0.0};
    double hi{0.0};
    int n{1};

    double value(int i) const { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); }
    double step() const { return n == 1 ? 0.0 : (hi - lo) / (n - 1); }
};

// target = scale * source + offset, applied after the axis values.
struct LinkedParam {
    std::string target;
    std::string source;
    double scale{1.0};
    double offset{0.0};
};

struct SweepSpec {
    SweepAxis x;
    std::optional<SweepAxis> y;
    std::vector<LinkedParam> links;
    Method method{Method::Both};
    std::string output{"sweep.csv"};
};

enum class InitialState { Ground, Excited, Mixed };

struct DynamicsSpec {
    std::vector<double> gammas{1e-4, 5e-4, 5e-3};
    double horizon{0.0};  // 0 selects 20 / min(gammas)
    InitialState initial{InitialState::Ground};
    long stride_periods{0};  // 0 keeps about 500 periods in the output
    int detail_periods{4};
    bool full_state{false};  // also write every density matrix entry
    std::string output{"dynamics"};
};

struct RunConfig {
    SystemParams params;
    std::optional<double> gamma_excite1;
    std::optional<double> gamma_excite2;
    IntegratorConfig integrator;
    AveragingConfig averaging;
    SeriesConfig series;
    std::optional<SweepSpec> sweep;
    DynamicsSpec dynamics;
    std::string text;

    // Base parameters with overrides and links applied and excitation rates
    // either taken from the file or derived from the temperature.
    SystemParams point(const std::vector<std::pair<std::string, double>>& overrides = {},
                       const std::vector<LinkedParam>& links = {}) const {
        SystemParams p = params;
        for (const auto& [name, v] : overrides) set_parameter(p, name, v);
        for (const auto& l : links) set_parameter(p, l.target, l.scale * parameter_value(p, l.source) + l.offset);
        derive_excitation_rates(p);
        if (gamma_excite1) p.q1.gamma_excite = *gamma_excite1;
        if (gamma_excite2) p.q2.gamma_excite = *gamma_excite2;
        return p;
    }
};

namespace ini {

struct Entry {
    std::string value;
    int line{0};
    bool used{false};
};

using Section = std::map<std::string, Entry>;

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::map<std::string, Section> parse(const std::string& text) {
    std::map<std::string, Section> out;
    std::istringstream in(text);
    std::string raw;
    std::string current;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(std::string_view(raw).substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(line, s, "malformed section header");
            current = trim(std::string_view(s).substr(1, s.size() - 2));
            if (out.count(current)) throw ConfigError(line, current, "duplicate section");
            out[current];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(line, s, "expected key = value");
        const std::string key = trim(std::string_view(s).substr(0, eq));
        const std::string value = trim(std::string_view(s).substr(eq + 1));
        if (current.empty()) throw ConfigError(line, key, "key outside of a section");
        if (key.empty()) throw ConfigError(line, s, "empty key");
        auto& sec = out[current];
        if (sec.count(key)) throw ConfigError(line, current + "." + key, "duplicate key");
        sec[key] = Entry{value, line};
    }
    return out;
}

}  // namespace ini

namespace detail {

class ConfigReader {
public:
    explicit ConfigReader(std::map<std::string, ini::Section> doc) : doc_(std::move(doc)) {}

    bool has(const std::string& sec, const std::string& key) const {
        auto s = doc_.find(sec);
        return s != doc_.end() && s->second.count(key);
    }

    int line(const std::string& sec, const std::string& key) const { return doc_.at(sec).at(key).line; }

    std::optional<std::string> str(const std::string& sec, const std::string& key) {
        auto s = doc_.find(sec);
        if (s == doc_.end()) return std::nullopt;
        auto e = s->second.find(key);
        if (e == s->second.end()) return std::nullopt;
        e->second.used = true;
        return e->second.value;
    }

    template <class T>
    void get(const std::string& sec, const std::string& key, T& target) {
        auto v = str(sec, key);
        if (!v) return;
        target = convert<T>(sec, key, *v);
    }

    template <class T>
    T convert(const std::string& sec, const std::string& key, const std::string& v) const {
        T out{};
        const char* b = v.data();
        const char* e = v.data() + v.size();
        auto [ptr, ec] = std::from_chars(b, e, out);
        if (ec != std::errc() || ptr != e)
            throw ConfigError(line(sec, key), sec + "." + key, "cannot parse '" + v + "'");
        return out;
    }

    void check(const std::string& sec, const std::string& key, bool ok, const std::string& msg) const {
        if (!ok && has(sec, key)) throw ConfigError(line(sec, key), sec + "." + key, msg);
    }

    void require_all_used() const {
        for (const auto& [sname, sec] : doc_)
            for (const auto& [key, e] : sec)
                if (!e.used) throw ConfigError(e.line, sname + "." + key, "unknown key");
    }

    void require_known_sections(const std::vector<std::string>& known) const {
        for (const auto& [sname, sec] : doc_) {
            if (std::find(known.begin(), known.end(), sname) != known.end()) continue;
            const int l = sec.empty() ? 0 : sec.begin()->second.line;
            throw ConfigError(l, sname, "unknown section");
        }
    }

private:
    std::map<std::string, ini::Section> doc_;
};

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline bool known_parameter(const std::string& n) {
    const auto& names = parameter_names();
    return std::find(names.begin(), names.end(), n) != names.end();
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    detail::ConfigReader r(ini::parse(text));
    r.require_known_sections({"system", "drive", "noise", "integrator", "series", "sweep", "dynamics"});
    RunConfig c;
    c.text = text;
    SystemParams& p = c.params;
    r.get("system", "delta1", p.q1.delta);
    r.get("system", "delta2", p.q2.delta);
    r.get("system", "eps1", p.q1.eps);
    r.get("system", "eps2", p.q2.eps);
    r.get("system", "g", p.g);
    r.get("drive", "amplitude", p.drive.amplitude);
    if (r.has("drive", "amplitude2")) {
        double a2 = 0.0;
        const int l = r.line("drive", "amplitude2");
        r.get("drive", "amplitude2", a2);
        if (a2 != p.drive.amplitude)
            throw ConfigError(l, "drive.amplitude2", "per-qubit drive amplitudes must be equal");
    }
    r.get("drive", "omega", p.drive.omega);
    r.get("drive", "phi0", p.drive.phi0);
    r.get("noise", "gamma1", p.q1.gamma_relax);
    r.get("noise", "gamma2", p.q2.gamma_relax);
    r.get("noise", "gamma_phi1", p.q1.gamma_phi);
    r.get("noise", "gamma_phi2", p.q2.gamma_phi);
    r.get("noise", "temperature_mk", p.temperature_mk);
    r.get("noise", "kb_conversion", p.kb_conversion);
    if (r.has("noise", "gamma_excite1")) {
        double v = 0.0;
        r.get("noise", "gamma_excite1", v);
        c.gamma_excite1 = v;
    }
    if (r.has("noise", "gamma_excite2")) {
        double v = 0.0;
        r.get("noise", "gamma_excite2", v);
        c.gamma_excite2 = v;
    }

    r.check("system", "delta1", p.q1.delta >= 0.0, "must be >= 0");
    r.check("system", "delta2", p.q2.delta >= 0.0, "must be >= 0");
    r.check("drive", "amplitude", p.drive.amplitude >= 0.0, "must be >= 0");
    r.check("drive", "omega", p.drive.omega > 0.0, "must be > 0");
    r.check("drive", "phi0", p.drive.phi0 >= 0.0 && p.drive.phi0 < 2.0 * std::numbers::pi, "must lie in [0, 2pi)");
    r.check("noise", "gamma1", p.q1.gamma_relax >= 0.0, "must be >= 0");
    r.check("noise", "gamma2", p.q2.gamma_relax >= 0.0, "must be >= 0");
    r.check("noise", "gamma_phi1", p.q1.gamma_phi >= 0.0, "must be >= 0");
    r.check("noise", "gamma_phi2", p.q2.gamma_phi >= 0.0, "must be >= 0");
    r.check("noise", "temperature_mk", p.temperature_mk >= 0.0, "must be >= 0");
    r.check("noise", "kb_conversion", p.kb_conversion > 0.0, "must be > 0");
    r.check("noise", "gamma_excite1", !c.gamma_excite1 || *c.gamma_excite1 >= 0.0, "must be >= 0");
    r.check("noise", "gamma_excite2", !c.gamma_excite2 || *c.gamma_excite2 >= 0.0, "must be >= 0");

    auto& ic = c.integrator;
    r.get("integrator", "steps_per_period", ic.steps_per_period);
    if (auto m = r.str("integrator", "mode")) {
        if (*m == "rk4") ic.mode = StepMode::FixedRk4;
        else if (*m == "dp45") ic.mode = StepMode::AdaptiveDp45;
        else throw ConfigError(r.line("integrator", "mode"), "integrator.mode", "expected rk4 or dp45");
    }
    r.get("integrator", "rel_tol", ic.rel_tol);
    r.get("integrator", "abs_tol", ic.abs_tol);
    r.get("integrator", "max_periods", ic.max_periods);
    r.get("integrator", "convergence_tol", ic.convergence_tol);
    r.get("integrator", "samples_per_period", ic.samples_per_period);
    r.get("integrator", "max_phase_per_step", ic.max_phase_per_step);
    r.get("integrator", "n_phase", c.averaging.n_phase);
    r.get("integrator", "n_time", c.averaging.n_time);
    if (auto v = r.str("integrator", "reuse_phase_shift")) {
        if (*v == "true") c.averaging.reuse_phase_shift = true;
        else if (*v == "false") c.averaging.reuse_phase_shift = false;
        else throw ConfigError(r.line("integrator", "reuse_phase_shift"), "integrator.reuse_phase_shift", "expected true or false");
    }

    r.get("series", "k_max", c.series.k_max);
    r.get("series", "denom_guard", c.series.denom_guard);
    r.get("series", "n_quad", c.series.n_quad);
    r.check("integrator", "steps_per_period", ic.steps_per_period == 0 || ic.steps_per_period >= 64,
            "must be 0 (automatic) or >= 64");
    r.check("integrator", "samples_per_period", ic.samples_per_period >= 1, "must be >= 1");
    r.check("integrator", "n_phase", c.averaging.n_phase >= 16, "must be >= 16");
    r.check("integrator", "n_time", c.averaging.n_time >= 64, "must be >= 64");
    r.check("series", "denom_guard", c.series.denom_guard >= 0.0, "must be >= 0");

    auto parse_axis = [&](const std::string& key) -> std::optional<SweepAxis> {
        auto v = r.str("sweep", key);
        if (!v) return std::nullopt;
        const int l = r.line("sweep", key);
        const auto parts = detail::split_list(*v);
        if (parts.size() != 4) throw ConfigError(l, "sweep." + key, "expected: name lo hi n");
        SweepAxis a;
        a.name = parts[0];
        if (!detail::known_parameter(a.name)) throw ConfigError(l, "sweep." + key, "unknown parameter '" + a.name + "'");
        a.lo = r.convert<double>("sweep", key, parts[1]);
        a.hi = r.convert<double>("sweep", key, parts[2]);
        a.n = r.convert<int>("sweep", key, parts[3]);
        if (a.n < 2) throw ConfigError(l, "sweep." + key, "n must be >= 2");
        return a;
    };
    if (auto x = parse_axis("x")) {
        SweepSpec s;
        s.x = *x;
        s.y = parse_axis("y");
        if (auto links = r.str("sweep", "link")) {
            const int l = r.line("sweep", "link");
            static const std::regex re(
                R"(^\s*([a-z_0-9]+)\s*=\s*(?:([-+]?[0-9.]+(?:[eE][-+]?[0-9]+)?)\s*\*\s*)?([a-z_0-9]+)\s*(?:([-+])\s*([0-9.]+(?:[eE][-+]?[0-9]+)?))?\s*$)");
            std::stringstream ss(*links);
            std::string item;
            while (std::getline(ss, item, ';')) {
                if (ini::trim(item).empty()) continue;
                std::smatch m;
                if (!std::regex_match(item, m, re))
                    throw ConfigError(l, "sweep.link", "expected 'target = [scale *] source [+ offset]'");
                LinkedParam lp;
                lp.target = m[1];
                lp.source = m[3];
                if (m[2].matched) lp.scale = std::stod(m[2]);
                if (m[5].matched) lp.offset = (m[4] == "-" ? -1.0 : 1.0) * std::stod(m[5]);
                if (!detail::known_parameter(lp.target) || !detail::known_parameter(lp.source))
                    throw ConfigError(l, "sweep.link", "unknown parameter in '" + ini::trim(item) + "'");
                s.links.push_back(lp);
            }
        }
        if (auto m = r.str("sweep", "method")) {
            try {
                s.method = parse_method(*m);
            } catch (const ParameterError& e) {
                throw ConfigError(r.line("sweep", "method"), "sweep.method", e.what());
            }
        }
        if (auto o = r.str("sweep", "output")) s.output = *o;
        c.sweep = s;
    } else if (r.has("sweep", "y") || r.has("sweep", "link")) {
        throw ConfigError(0, "sweep.x", "sweep section needs an x axis");
    }

    auto& d = c.dynamics;
    if (auto g = r.str("dynamics", "gammas")) {
        d.gammas.clear();
        for (const auto& item : detail::split_list(*g)) d.gammas.push_back(r.convert<double>("dynamics", "gammas", item));
        if (d.gammas.empty()) throw ConfigError(r.line("dynamics", "gammas"), "dynamics.gammas", "empty list");
    }
    r.get("dynamics", "horizon", d.horizon);
    if (auto v = r.str("dynamics", "initial")) {
        if (*v == "ground") d.initial = InitialState::Ground;
        else if (*v == "excited") d.initial = InitialState::Excited;
        else if (*v == "mixed") d.initial = InitialState::Mixed;
        else throw ConfigError(r.line("dynamics", "initial"), "dynamics.initial", "expected ground, excited or mixed");
    }
    r.get("dynamics", "stride_periods", d.stride_periods);
    r.get("dynamics", "detail_periods", d.detail_periods);
    if (auto v = r.str("dynamics", "full_state")) {
        if (*v == "true") d.full_state = true;
        else if (*v == "false") d.full_state = false;
        else throw ConfigError(r.line("dynamics", "full_state"), "dynamics.full_state", "expected true or false");
    }
    if (auto o = r.str("dynamics", "output")) d.output = *o;

    r.require_all_used();

    auto check = [&](auto&& fn, const std::string& sec) {
        try {
            fn();
        } catch (const ParameterError& e) {
            throw ConfigError(0, sec, e.what());
        }
    };
    check([&] { validate(c.point()); }, "system");
    check([&] { validate(c.integrator); }, "integrator");
    check([&] { validate(c.averaging); }, "integrator");
    check([&] { resolve_series(c.params, c.series); }, "series");
    for (double gm : d.gammas)
        if (!(gm > 0.0)) throw ConfigError(0, "dynamics.gammas", "rates must be > 0");
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, path, "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace fluxent
