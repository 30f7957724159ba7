#include "bkl/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace bkl {

using nlohmann::json;

PerturbationParams PerturbationSpec::params() const {
    PerturbationParams p;
    p.tau_start = tau_start;
    p.rel_tol = rel_tol;
    p.linearity_cap = linearity_cap;
    p.samples = samples;
    return p;
}

bool operator==(const IntegratorParams& a, const IntegratorParams& b) {
    return a.rel_tol == b.rel_tol && a.abs_tol == b.abs_tol && a.t_end == b.t_end && a.max_steps == b.max_steps &&
           a.drift_abort_ratio == b.drift_abort_ratio && a.chart == b.chart &&
           a.dense_sample_dt == b.dense_sample_dt && a.exponent_guard == b.exponent_guard &&
           a.constraint_tolerance == b.constraint_tolerance;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.name == b.name && a.initial_condition == b.initial_condition && a.integrator == b.integrator &&
           a.analysis == b.analysis && a.perturbation == b.perturbation && a.output == b.output;
}

namespace {

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json* take(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    double number(const std::string& key, double fallback) {
        const json* v = take(key);
        if (!v) return fallback;
        if (!v->is_number()) throw ConfigError(field(key), "expected a number");
        const double d = v->get<double>();
        if (!std::isfinite(d)) throw ConfigError(field(key), "must be finite");
        return d;
    }

    std::size_t count(const std::string& key, std::size_t fallback) {
        const json* v = take(key);
        if (!v) return fallback;
        if (!v->is_number_unsigned()) throw ConfigError(field(key), "expected a non-negative integer");
        return v->get<std::size_t>();
    }

    bool flag(const std::string& key, bool fallback) {
        const json* v = take(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
        return v->get<bool>();
    }

    std::string text(const std::string& key, const std::string& fallback) {
        const json* v = take(key);
        if (!v) return fallback;
        if (!v->is_string()) throw ConfigError(field(key), "expected a string");
        return v->get<std::string>();
    }

    template <std::size_t N>
    std::array<double, N> numbers(const std::string& key) {
        const json* v = take(key);
        std::array<double, N> out{};
        if (!v || !v->is_array() || v->size() != N) {
            throw ConfigError(field(key), "expected an array of " + std::to_string(N) + " numbers");
        }
        for (std::size_t i = 0; i < N; ++i) {
            if (!(*v)[i].is_number()) throw ConfigError(field(key), "expected an array of numbers");
            out[i] = (*v)[i].get<double>();
            if (!std::isfinite(out[i])) throw ConfigError(field(key), "must be finite");
        }
        return out;
    }

    Chart chart(const std::string& key, Chart fallback) {
        const json* v = take(key);
        if (!v) return fallback;
        if (!v->is_string()) throw ConfigError(field(key), "expected a chart name");
        const auto c = parse_chart(v->get<std::string>());
        if (!c) throw ConfigError(field(key), "unknown chart '" + v->get<std::string>() + "'");
        return *c;
    }

    Reader child(const std::string& key) {
        const json* v = take(key);
        static const json empty = json::object();
        return Reader(v ? *v : empty, field(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& message) {
    if (!ok) throw ConfigError(field, message);
}

}  // namespace

RunConfig parse_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    Reader r(root, "");
    RunConfig cfg;

    const json* version = r.take("schema_version");
    require(version && version->is_number_integer() && version->get<int>() == kConfigSchemaVersion, "schema_version",
            "expected " + std::to_string(kConfigSchemaVersion));
    cfg.name = r.text("name", "");

    {
        Reader ic = r.child("initial_condition");
        require(r.has("initial_condition"), "initial_condition", "required");
        InitialConditionSpec& s = cfg.initial_condition;
        s.chart = ic.chart("chart", Chart::diag);
        s.t = ic.number("t", 0.0);
        s.position = ic.numbers<3>("position");
        if (ic.has("velocity")) {
            require(!ic.has("du2") && !ic.has("du3"), ic.field("velocity"),
                    "give either velocity or du2/du3, not both");
            s.velocity = ic.numbers<3>("velocity");
        } else {
            s.du2 = ic.number("du2", 0.0);
            s.du3 = ic.number("du3", 0.0);
        }
        if (s.chart == Chart::scale_factors) {
            for (double v : s.position) require(v > 0.0, ic.field("position"), "scale factors must be positive");
        }
        ic.finish();
    }
    {
        Reader in = r.child("integrator");
        IntegratorParams& p = cfg.integrator;
        p.rel_tol = in.number("rel_tol", p.rel_tol);
        p.abs_tol = in.number("abs_tol", p.abs_tol);
        p.t_end = in.number("t_end", p.t_end);
        p.max_steps = in.count("max_steps", p.max_steps);
        p.drift_abort_ratio = in.number("drift_abort_ratio", p.drift_abort_ratio);
        p.chart = in.chart("chart", p.chart);
        p.dense_sample_dt = in.number("dense_sample_dt", p.dense_sample_dt);
        p.exponent_guard = in.number("exponent_guard", p.exponent_guard);
        p.constraint_tolerance = in.number("constraint_tolerance", p.constraint_tolerance);
        in.finish();
        try {
            p.validate(cfg.initial_condition.t);
        } catch (const DomainError& e) {
            const std::string msg = e.what();
            const auto colon = msg.find(':');
            throw ConfigError(msg.substr(0, colon), msg.substr(colon + 2));
        }
    }
    {
        Reader an = r.child("analysis");
        AnalysisSwitches& a = cfg.analysis;
        a.reflections = an.flag("reflections", a.reflections);
        a.epochs = an.flag("epochs", a.epochs);
        a.limits = an.flag("limits", a.limits);
        a.perturbation = an.flag("perturbation", a.perturbation);
        a.epoch_delta = an.number("epoch_delta", a.epoch_delta);
        a.tail_fraction = an.number("tail_fraction", a.tail_fraction);
        a.tail_windows = an.count("tail_windows", a.tail_windows);
        a.prominence_factor = an.number("prominence_factor", a.prominence_factor);
        an.finish();
        require(a.epoch_delta > 0.0 && a.epoch_delta <= 1.0, an.field("epoch_delta"), "must lie in (0, 1]");
        require(a.tail_fraction > 0.0 && a.tail_fraction < 1.0, an.field("tail_fraction"), "must lie in (0, 1)");
        require(a.tail_windows >= 2, an.field("tail_windows"), "must be at least 2");
        require(a.prominence_factor > 1.0, an.field("prominence_factor"), "must exceed 1");
        require(!a.epochs || a.reflections, an.field("epochs"), "requires reflections");
    }
    {
        Reader pe = r.child("perturbation");
        PerturbationSpec& p = cfg.perturbation;
        if (pe.has("seed")) p.seed = pe.numbers<6>("seed");
        p.horizon = pe.number("horizon", p.horizon);
        p.tau_start = pe.number("tau_start", p.tau_start);
        p.rel_tol = pe.number("rel_tol", p.rel_tol);
        p.linearity_cap = pe.number("linearity_cap", p.linearity_cap);
        p.samples = pe.count("samples", p.samples);
        pe.finish();
        require(p.horizon > 0.0, pe.field("horizon"), "must be positive");
        require(p.tau_start > 0.0, pe.field("tau_start"), "must be positive");
        require(p.rel_tol > 0.0, pe.field("rel_tol"), "must be positive");
        require(p.linearity_cap > 0.0, pe.field("linearity_cap"), "must be positive");
        require(p.samples >= 16, pe.field("samples"), "must be at least 16");
    }
    {
        Reader out = r.child("output");
        cfg.output.csv = out.flag("csv", cfg.output.csv);
        cfg.output.json = out.flag("json", cfg.output.json);
        out.finish();
    }
    r.finish();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("<file>", "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_json(const RunConfig& c) {
    json j;
    j["schema_version"] = kConfigSchemaVersion;
    j["name"] = c.name;
    const InitialConditionSpec& ic = c.initial_condition;
    json jic{{"chart", chart_name(ic.chart)}, {"t", ic.t}, {"position", ic.position}};
    if (ic.velocity) {
        jic["velocity"] = *ic.velocity;
    } else {
        jic["du2"] = ic.du2;
        jic["du3"] = ic.du3;
    }
    j["initial_condition"] = jic;
    const IntegratorParams& p = c.integrator;
    j["integrator"] = {{"rel_tol", p.rel_tol},
                       {"abs_tol", p.abs_tol},
                       {"t_end", p.t_end},
                       {"max_steps", p.max_steps},
                       {"drift_abort_ratio", p.drift_abort_ratio},
                       {"chart", chart_name(p.chart)},
                       {"dense_sample_dt", p.dense_sample_dt},
                       {"exponent_guard", p.exponent_guard},
                       {"constraint_tolerance", p.constraint_tolerance}};
    const AnalysisSwitches& a = c.analysis;
    j["analysis"] = {{"reflections", a.reflections},   {"epochs", a.epochs},
                     {"limits", a.limits},             {"perturbation", a.perturbation},
                     {"epoch_delta", a.epoch_delta},   {"tail_fraction", a.tail_fraction},
                     {"tail_windows", a.tail_windows}, {"prominence_factor", a.prominence_factor}};
    const PerturbationSpec& pe = c.perturbation;
    j["perturbation"] = {{"seed", pe.seed},       {"horizon", pe.horizon},
                         {"tau_start", pe.tau_start}, {"rel_tol", pe.rel_tol},
                         {"linearity_cap", pe.linearity_cap}, {"samples", pe.samples}};
    j["output"] = {{"csv", c.output.csv}, {"json", c.output.json}};
    return j.dump(2) + "\n";
}

AnyPhasePoint initial_condition(const RunConfig& config) {
    const InitialConditionSpec& s = config.initial_condition;
    if (s.velocity) {
        AnyPhasePoint p;
        switch (s.chart) {
            case Chart::scale_factors:
                p = ScaleFactorPoint{s.t, ScaleFactors{s.position}, Velocity<Chart::scale_factors>{*s.velocity}};
                break;
            case Chart::log:
                p = LogPoint{s.t, LogChart{s.position}, Velocity<Chart::log>{*s.velocity}};
                break;
            case Chart::diag:
                p = DiagPoint{s.t, DiagChart{s.position}, Velocity<Chart::diag>{*s.velocity}};
                break;
            case Chart::ratio:
                p = RatioPoint{s.t, RatioChart{s.position}, Velocity<Chart::ratio>{*s.velocity}};
                break;
        }
        const EnergySplit e =
            std::visit([&](const auto& q) { return constraint_residual(q, config.integrator.exponent_guard); }, p);
        if (!(e.kinetic > 0.0) || !(std::abs(e.total) <= config.integrator.constraint_tolerance * e.kinetic)) {
            throw IllPosedInitialCondition("initial_condition.velocity violates the constraint: H = " +
                                           detail::short_number(e.total) + ", E_k = " + detail::short_number(e.kinetic));
        }
        return p;
    }
    AnyPhasePoint pos;
    switch (s.chart) {
        case Chart::scale_factors:
            pos = ScaleFactorPoint{s.t, ScaleFactors{s.position}, {}};
            break;
        case Chart::log:
            pos = LogPoint{s.t, LogChart{s.position}, {}};
            break;
        case Chart::diag:
            pos = DiagPoint{s.t, DiagChart{s.position}, {}};
            break;
        case Chart::ratio:
            pos = RatioPoint{s.t, RatioChart{s.position}, {}};
            break;
    }
    const DiagPoint d = std::get<DiagPoint>(convert(pos, Chart::diag));
    const double du1 = complete_velocity(d.position, s.du2, s.du3, config.integrator.exponent_guard);
    return DiagPoint{s.t, d.position, Velocity<Chart::diag>{{du1, s.du2, s.du3}}};
}

std::vector<std::string_view> preset_names() { return {"exact", "generic-collapse", "perturbation"}; }

RunConfig preset(std::string_view name) {
    RunConfig c;
    c.name = std::string(name);
    if (name == "generic-collapse") {
        c.initial_condition.chart = Chart::diag;
        c.initial_condition.t = 0.0;
        c.initial_condition.position = {-5.0, 0.0, 0.0};
        c.initial_condition.du2 = 4.0;
        c.initial_condition.du3 = 1.5;
        c.integrator.rel_tol = 1e-13;
        c.integrator.abs_tol = 1e-15;
        c.integrator.t_end = 100.0;
        return c;
    }
    if (name == "exact" || name == "perturbation") {
        const DiagPoint e = exact_state<Chart::diag>(1.0);
        c.initial_condition.chart = Chart::diag;
        c.initial_condition.t = 1.0;
        c.initial_condition.position = e.position.value;
        c.initial_condition.velocity = e.velocity.value;
        c.integrator.rel_tol = 1e-12;
        c.integrator.abs_tol = 1e-14;
        c.integrator.t_end = 100.0;
        if (name == "perturbation") {
            c.analysis.perturbation = true;
            c.perturbation.seed = {0.3e-20, -0.7e-20, 0.5e-20, 0.2e-20, 0.9e-20, -0.4e-20};
            c.perturbation.horizon = 66.0;
        }
        return c;
    }
    throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
}

}  // namespace bkl
