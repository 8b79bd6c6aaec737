#include "afc/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace afc {

namespace {

using nlohmann::json;

const std::vector<std::string> kReproduceNames = {"fig4", "fig5", "fig6a", "fig6b", "appendixA3"};

// Reads one JSON object, remembering which keys were used so leftovers can be
// reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json* raw(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = raw(key)) {
            if (!v->is_number()) fail(key + " must be a number");
            out = v->get<double>();
            if (!std::isfinite(out)) fail(key + " must be finite");
        }
    }

    void number(const std::string& key, std::optional<double>& out) {
        if (has(key)) {
            double v = 0.0;
            number(key, v);
            out = v;
        }
    }

    void integer(const std::string& key, int& out) {
        if (const json* v = raw(key)) {
            if (!v->is_number_integer()) fail(key + " must be an integer");
            const auto x = v->get<long long>();
            if (x < -2147483647LL || x > 2147483647LL) fail(key + " out of range");
            out = static_cast<int>(x);
        }
    }

    void integer(const std::string& key, std::optional<int>& out) {
        if (has(key)) {
            int v = 0;
            integer(key, v);
            out = v;
        }
    }

    void text(const std::string& key, std::string& out) {
        if (const json* v = raw(key)) {
            if (!v->is_string()) fail(key + " must be a string");
            out = v->get<std::string>();
        }
    }

    template <class T>
    void list(const std::string& key, std::vector<T>& out) {
        if (const json* v = raw(key)) {
            if (!v->is_array()) fail(key + " must be an array");
            if (v->empty()) fail(key + " must not be empty");
            out.clear();
            for (const auto& e : *v) {
                if constexpr (std::is_same_v<T, int>) {
                    if (!e.is_number_integer()) fail(key + " entries must be integers");
                } else if constexpr (std::is_same_v<T, double>) {
                    if (!e.is_number()) fail(key + " entries must be numbers");
                } else {
                    if (!e.is_string()) fail(key + " entries must be strings");
                }
                out.push_back(e.get<T>());
            }
        }
    }

    Section sub(const std::string& key) {
        static const json empty = json::object();
        const json* v = raw(key);
        return Section(v ? *v : empty, path_.empty() ? key : path_ + "." + key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail("unknown key '" + it.key() + "'");
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError((path_.empty() ? std::string("config") : path_) + ": " + what);
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class F>
void rethrow_as_config(F&& f) {
    try {
        f();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

} // namespace

std::string to_string(Scenario s) {
    switch (s) {
    case Scenario::Simulate: return "simulate";
    case Scenario::SweepFixedN: return "sweep-fixed-n";
    case Scenario::SweepFixedTau: return "sweep-fixed-tau";
    case Scenario::Fit: return "fit";
    case Scenario::CheckConfig: return "check-config";
    case Scenario::Reproduce: return "reproduce";
    }
    return "?";
}

Scenario parse_scenario(std::string_view name) {
    for (Scenario s : {Scenario::Simulate, Scenario::SweepFixedN, Scenario::SweepFixedTau, Scenario::Fit,
                       Scenario::CheckConfig, Scenario::Reproduce})
        if (to_string(s) == name) return s;
    throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

bool needs_seed(Scenario s) {
    return s == Scenario::Simulate || s == Scenario::SweepFixedN || s == Scenario::SweepFixedTau ||
           s == Scenario::Reproduce;
}

FieldConfig RunConfig::field() const {
    FieldConfig f;
    f.magnitude = field_mt * 1e-3;
    f.angle_deg = field_angle_deg;
    f.ground_gradient = ground_gradient_hz_per_t;
    f.excited_gradient = excited_gradient_hz_per_t;
    f.s1_gradient = s1_gradient_hz_per_t;
    return f;
}

OperatingEnvelope RunConfig::envelope() const { return {gamma_inh_hz, rabi_hz, gamma_afc_hz}; }

OuParams RunConfig::ou() const { return OuParams::from_hz(sigma_hz, tau_c_ms * 1e-3); }

EnsembleConfig RunConfig::ensemble() const {
    if (!seed) throw ConfigError("ensemble.seed is required for simulation scenarios");
    EnsembleConfig e;
    e.n_traj = n_traj;
    e.gamma_inh = gamma_inh_hz;
    e.seed = *seed;
    if (batch_size) {
        e.batch_size = *batch_size;
    } else {
        int b = std::max(1, n_traj / 40);
        while (n_traj % b != 0) --b;
        e.batch_size = b;
    }
    return e;
}

double RunConfig::tau() const {
    if (!tau_ms) throw ConfigError("sequence.tau_ms is required");
    return *tau_ms * 1e-3;
}

std::vector<double> RunConfig::tau_grid() const {
    std::vector<double> out;
    for (double t : tau_grid_ms) out.push_back(t * 1e-3);
    return out;
}

void RunConfig::validate() const {
    rethrow_as_config([&] {
        field().validate();
        envelope().validate();
        ou().validate();
    });
    require(std::isfinite(epsilon_rad), "physics.epsilon_rad must be finite");
    require(eta_afc >= 0.0 && eta_afc <= 1.0 && eta_ctrl >= 0.0 && eta_ctrl <= 1.0,
            "physics.budget efficiencies must be in [0, 1]");

    const int np = pulses_per_repetition(kind);
    require(n_s >= 1, "sequence.n_s must be >= 1");
    if (tau_ms) require(*tau_ms > 0.0, "sequence.tau_ms must be > 0");
    if (n) require(*n >= 0 && *n % np == 0, "sequence.n must be a non-negative multiple of " + std::to_string(np));
    for (std::size_t i = 0; i < tau_grid_ms.size(); ++i) {
        require(tau_grid_ms[i] > 0.0, "sequence.tau_grid_ms entries must be > 0");
        if (i) require(tau_grid_ms[i] > tau_grid_ms[i - 1], "sequence.tau_grid_ms must be increasing");
    }
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        require(n_grid[i] >= 0 && n_grid[i] % np == 0,
                "sequence.n_grid entries must be non-negative multiples of " + std::to_string(np));
        if (i) require(n_grid[i] > n_grid[i - 1], "sequence.n_grid must be increasing");
    }

    require(n_traj >= 1, "ensemble.n_traj must be >= 1");
    if (needs_seed(scenario)) {
        require(seed.has_value(), "ensemble.seed is required for scenario " + to_string(scenario));
        rethrow_as_config([&] { ensemble().validate(); });
    }

    switch (scenario) {
    case Scenario::Simulate: require(tau_ms.has_value(), "simulate needs sequence.tau_ms"); break;
    case Scenario::SweepFixedN:
        require(n.has_value(), "sweep-fixed-n needs sequence.n");
        require(!tau_grid_ms.empty(), "sweep-fixed-n needs sequence.tau_grid_ms");
        break;
    case Scenario::SweepFixedTau:
        require(tau_ms.has_value(), "sweep-fixed-tau needs sequence.tau_ms");
        require(!n_grid.empty(), "sweep-fixed-tau needs sequence.n_grid");
        break;
    case Scenario::Fit: require(!input_csv.empty(), "fit needs fit.input_csv"); break;
    case Scenario::Reproduce:
        require(std::find(kReproduceNames.begin(), kReproduceNames.end(), reproduce) != kReproduceNames.end(),
                "reproduce.name must be one of fig4, fig5, fig6a, fig6b, appendixA3");
        break;
    case Scenario::CheckConfig: break;
    }
    require(!out_dir.empty(), "io.out_dir must not be empty");
}

RunConfig parse_run_config(const json& j) {
    RunConfig c;
    Section root(j, "");
    std::string scenario;
    if (!root.has("scenario")) root.fail("scenario is required");
    root.text("scenario", scenario);
    c.scenario = parse_scenario(scenario);

    Section physics = root.sub("physics");
    Section field = physics.sub("field");
    field.number("magnitude_mT", c.field_mt);
    field.number("angle_deg", c.field_angle_deg);
    field.number("ground_gradient_hz_per_T", c.ground_gradient_hz_per_t);
    field.number("excited_gradient_hz_per_T", c.excited_gradient_hz_per_t);
    field.number("s1_gradient_hz_per_T", c.s1_gradient_hz_per_t);
    field.finish();
    Section env = physics.sub("envelope");
    env.number("gamma_inh_hz", c.gamma_inh_hz);
    env.number("rabi_hz", c.rabi_hz);
    env.number("gamma_afc_hz", c.gamma_afc_hz);
    env.finish();
    Section ou = physics.sub("ou");
    ou.number("sigma_hz", c.sigma_hz);
    ou.number("tau_c_ms", c.tau_c_ms);
    ou.finish();
    physics.number("epsilon_rad", c.epsilon_rad);
    Section budget = physics.sub("budget");
    budget.number("eta_afc", c.eta_afc);
    budget.number("eta_ctrl", c.eta_ctrl);
    budget.finish();
    physics.finish();

    Section seq = root.sub("sequence");
    std::string kind = to_string(c.kind);
    seq.text("kind", kind);
    rethrow_as_config([&] { c.kind = parse_sequence_kind(kind); });
    seq.integer("n_s", c.n_s);
    seq.number("tau_ms", c.tau_ms);
    seq.integer("n", c.n);
    seq.list("tau_grid_ms", c.tau_grid_ms);
    seq.list("n_grid", c.n_grid);
    seq.finish();

    Section ens = root.sub("ensemble");
    ens.integer("n_traj", c.n_traj);
    ens.integer("batch_size", c.batch_size);
    if (const json* s = ens.raw("seed")) {
        if (!s->is_number_integer() || (s->is_number_integer() && !s->is_number_unsigned() && s->get<long long>() < 0))
            ens.fail("seed must be a non-negative integer");
        c.seed = s->get<std::uint64_t>();
    }
    ens.finish();

    Section fit = root.sub("fit");
    fit.list("input_csv", c.input_csv);
    std::string model = to_string(c.fit_model);
    fit.text("model", model);
    rethrow_as_config([&] { c.fit_model = parse_fit_model(model); });
    fit.finish();

    Section rep = root.sub("reproduce");
    rep.text("name", c.reproduce);
    rep.finish();

    Section io = root.sub("io");
    io.text("out_dir", c.out_dir);
    io.finish();

    root.finish();
    c.validate();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_run_config(j);
}

json to_json(const RunConfig& c) {
    json seq = {{"kind", to_string(c.kind)}, {"n_s", c.n_s}};
    if (c.tau_ms) seq["tau_ms"] = *c.tau_ms;
    if (c.n) seq["n"] = *c.n;
    if (!c.tau_grid_ms.empty()) seq["tau_grid_ms"] = c.tau_grid_ms;
    if (!c.n_grid.empty()) seq["n_grid"] = c.n_grid;

    json ens = {{"n_traj", c.n_traj}};
    if (c.batch_size) ens["batch_size"] = *c.batch_size;
    if (c.seed) ens["seed"] = *c.seed;

    json fit = {{"model", to_string(c.fit_model)}};
    if (!c.input_csv.empty()) fit["input_csv"] = c.input_csv;

    json out = {
        {"scenario", to_string(c.scenario)},
        {"physics",
         {{"field",
           {{"magnitude_mT", c.field_mt},
            {"angle_deg", c.field_angle_deg},
            {"ground_gradient_hz_per_T", c.ground_gradient_hz_per_t},
            {"excited_gradient_hz_per_T", c.excited_gradient_hz_per_t},
            {"s1_gradient_hz_per_T", c.s1_gradient_hz_per_t}}},
          {"envelope", {{"gamma_inh_hz", c.gamma_inh_hz}, {"rabi_hz", c.rabi_hz}, {"gamma_afc_hz", c.gamma_afc_hz}}},
          {"ou", {{"sigma_hz", c.sigma_hz}, {"tau_c_ms", c.tau_c_ms}}},
          {"epsilon_rad", c.epsilon_rad},
          {"budget", {{"eta_afc", c.eta_afc}, {"eta_ctrl", c.eta_ctrl}}}}},
        {"sequence", seq},
        {"ensemble", ens},
        {"fit", fit},
        {"io", {{"out_dir", c.out_dir}}},
    };
    if (!c.reproduce.empty()) out["reproduce"] = {{"name", c.reproduce}};
    return out;
}

} // namespace afc
