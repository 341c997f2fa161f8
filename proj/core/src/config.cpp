#include "trcl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace trcl {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    return obj.at(key).get<T>();
}

const json& object_at(const json& parent, const char* key, const json& empty) {
    if (!parent.contains(key)) return empty;
    const json& v = parent.at(key);
    if (!v.is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
    return v;
}

TaskStreamSpec parse_stream(const json& j) {
    reject_unknown(j, {"family", "n_tasks", "heterogeneity", "seed", "samples_per_task", "eval_fraction", "dim"},
                   "stream");
    TaskStreamSpec s;
    s.family = parse_stream_family(get_or<std::string>(j, "family", to_string(s.family)));
    s.n_tasks = get_or(j, "n_tasks", s.n_tasks);
    s.heterogeneity = get_or(j, "heterogeneity", s.heterogeneity);
    s.seed = get_or(j, "seed", s.seed);
    s.samples_per_task = get_or(j, "samples_per_task", s.samples_per_task);
    s.eval_fraction = get_or(j, "eval_fraction", s.eval_fraction);
    s.dim = get_or(j, "dim", s.dim);
    s.validate();
    return s;
}

ModelSpec parse_model(const json& j, const TaskStreamSpec& stream) {
    ModelSpec fallback = default_model(stream);
    if (j.empty()) return fallback;
    reject_unknown(j, {"family", "layer_sizes", "activation", "schedule"}, "run.model");
    ModelSpec m;
    m.family = parse_model_family(get_or<std::string>(j, "family", to_string(fallback.family)));
    m.layer_sizes = get_or(j, "layer_sizes", m.family == fallback.family ? fallback.layer_sizes
                                                                         : std::vector<std::size_t>{});
    m.activation = parse_activation(get_or<std::string>(j, "activation", "tanh"));
    if (m.family == ModelFamily::Quadratic) throw ConfigError("run.model: Quadratic is not available from config");
    if (m.family == ModelFamily::ToyDiffusion) {
        const json empty = json::object();
        const json& sj = object_at(j, "schedule", empty);
        reject_unknown(sj, {"steps", "beta_start", "beta_end"}, "run.model.schedule");
        m.schedule = NoiseSchedule::linear(get_or(sj, "steps", 32), get_or(sj, "beta_start", 1e-4),
                                           get_or(sj, "beta_end", 0.2));
    }
    m.validate();
    return m;
}

ContinualConfig parse_continual(const json& j) {
    reject_unknown(j, {"lambda", "beta", "eta", "fisher_mode", "trust_radius", "steps_per_task", "batch_size"},
                   "run.continual");
    ContinualConfig c;
    c.lambda = get_or(j, "lambda", c.lambda);
    c.beta = get_or(j, "beta", c.beta);
    c.eta = get_or(j, "eta", c.eta);
    c.fisher_mode = parse_fisher_mode(get_or<std::string>(j, "fisher_mode", to_string(c.fisher_mode)));
    if (j.contains("trust_radius") && !j.at("trust_radius").is_null()) c.trust_radius = j.at("trust_radius").get<double>();
    c.steps_per_task = get_or(j, "steps_per_task", c.steps_per_task);
    c.batch_size = get_or(j, "batch_size", c.batch_size);
    c.validate();
    return c;
}

MetaConfig parse_meta(const json& j) {
    reject_unknown(j, {"alpha", "eta", "inner_steps", "first_order"}, "run.meta");
    MetaConfig m;
    m.alpha = get_or(j, "alpha", m.alpha);
    m.eta = get_or(j, "eta", m.eta);
    m.inner_steps = get_or(j, "inner_steps", m.inner_steps);
    m.first_order = get_or(j, "first_order", m.first_order);
    m.validate();
    return m;
}

ExperimentConfig from_json(const json& root) {
    if (!root.is_object()) throw ConfigError("config root must be an object");
    reject_unknown(root, {"stream", "run", "thresholds"}, "config");
    const json empty = json::object();
    ExperimentConfig cfg;
    cfg.stream = parse_stream(object_at(root, "stream", empty));

    const json& rj = object_at(root, "run", empty);
    reject_unknown(rj, {"method", "model", "continual", "meta", "eval_interval", "seeds", "replay", "buffer_capacity"},
                   "run");
    RunConfig& run = cfg.run;
    run.method = parse_method(get_or<std::string>(rj, "method", to_string(run.method)));
    run.model = parse_model(object_at(rj, "model", empty), cfg.stream);
    run.continual = parse_continual(object_at(rj, "continual", empty));
    if (rj.contains("meta") && !rj.at("meta").is_null()) {
        run.meta = parse_meta(object_at(rj, "meta", empty));
    } else if (run.method == Method::Ftml) {
        run.meta = MetaConfig{};
    }
    if (run.method != Method::Ftml) run.meta.reset();
    run.eval_interval = get_or(rj, "eval_interval", run.eval_interval);
    run.seeds = get_or(rj, "seeds", run.seeds);
    run.replay = parse_replay_kind(get_or<std::string>(rj, "replay", to_string(run.replay)));
    run.buffer_capacity = get_or(rj, "buffer_capacity", run.buffer_capacity);
    if (run.model.param_dim() == 0) throw ConfigError("run.model: empty model");
    if (run.model.input_dim() != default_model(cfg.stream).input_dim())
        throw ConfigError("run.model: input dimension does not match the task stream");
    run.validate();

    const json& tj = object_at(root, "thresholds", empty);
    reject_unknown(tj, {"tau", "alpha"}, "thresholds");
    cfg.taus = get_or(tj, "tau", cfg.taus);
    cfg.alphas = get_or(tj, "alpha", cfg.alphas);
    return cfg;
}

/// Sets a dotted path inside `root`, creating intermediate objects.
void assign_path(json& root, const std::string& path, const json& value) {
    json* node = &root;
    std::istringstream parts(path);
    std::string part;
    std::vector<std::string> keys;
    while (std::getline(parts, part, '.')) keys.push_back(part);
    if (keys.empty()) throw ConfigError("grid: empty key");
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        json& next = (*node)[keys[i]];
        if (next.is_null()) next = json::object();
        if (!next.is_object()) throw ConfigError("grid: '" + path + "' crosses a non-object");
        node = &next;
    }
    (*node)[keys.back()] = value;
}

json parse_json_text(std::string_view text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

template <class F>
auto wrap_errors(F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text) {
    return wrap_errors([&] { return from_json(parse_json_text(json_text, "config")); });
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return parse_experiment_config(read_text_file(path));
}

std::string to_json(const ExperimentConfig& cfg) {
    json j;
    j["stream"] = {{"family", to_string(cfg.stream.family)},
                   {"n_tasks", cfg.stream.n_tasks},
                   {"heterogeneity", cfg.stream.heterogeneity},
                   {"seed", cfg.stream.seed},
                   {"samples_per_task", cfg.stream.samples_per_task},
                   {"eval_fraction", cfg.stream.eval_fraction},
                   {"dim", cfg.stream.dim}};
    const RunConfig& r = cfg.run;
    json model = {{"family", to_string(r.model.family)},
                  {"layer_sizes", r.model.layer_sizes},
                  {"activation", to_string(r.model.activation)}};
    if (r.model.schedule) {
        const NoiseSchedule& s = *r.model.schedule;
        model["schedule"] = {{"steps", s.steps}, {"beta_start", s.betas[0]}, {"beta_end", s.betas[s.betas.size() - 1]}};
    }
    json continual = {{"lambda", r.continual.lambda},
                      {"beta", r.continual.beta},
                      {"eta", r.continual.eta},
                      {"fisher_mode", to_string(r.continual.fisher_mode)},
                      {"trust_radius", r.continual.trust_radius ? json(*r.continual.trust_radius) : json(nullptr)},
                      {"steps_per_task", r.continual.steps_per_task},
                      {"batch_size", r.continual.batch_size}};
    j["run"] = {{"method", to_string(r.method)},
                {"model", model},
                {"continual", continual},
                {"eval_interval", r.eval_interval},
                {"seeds", r.seeds},
                {"replay", to_string(r.replay)},
                {"buffer_capacity", r.buffer_capacity}};
    if (r.meta) {
        j["run"]["meta"] = {{"alpha", r.meta->alpha},
                            {"eta", r.meta->eta},
                            {"inner_steps", r.meta->inner_steps},
                            {"first_order", r.meta->first_order}};
    }
    j["thresholds"] = {{"tau", cfg.taus}, {"alpha", cfg.alphas}};
    return j.dump(2);
}

std::vector<ExperimentVariant> expand_grid(std::string_view base_json, std::string_view grid_json) {
    return wrap_errors([&] {
        const json base = parse_json_text(base_json, "config");
        const json grid = parse_json_text(grid_json, "grid");
        if (!grid.is_object() || grid.empty()) throw ConfigError("grid must be a non-empty object");
        std::vector<std::pair<std::string, std::vector<json>>> axes;
        for (const auto& [key, values] : grid.items()) {
            if (!values.is_array() || values.empty())
                throw ConfigError("grid: '" + key + "' must be a non-empty array");
            axes.emplace_back(key, std::vector<json>(values.begin(), values.end()));
        }
        std::vector<ExperimentVariant> out;
        std::vector<std::size_t> idx(axes.size(), 0);
        for (std::size_t combo = 0;; ++combo) {
            json cfg = base;
            ExperimentVariant v;
            std::string label;
            for (std::size_t a = 0; a < axes.size(); ++a) {
                const json& value = axes[a].second[idx[a]];
                assign_path(cfg, axes[a].first, value);
                v.assignments[axes[a].first] = value.dump();
                if (!label.empty()) label += "__";
                const std::string leaf = axes[a].first.substr(axes[a].first.find_last_of('.') + 1);
                label += leaf + "=" + (value.is_string() ? value.get<std::string>() : value.dump());
            }
            v.label = label;
            v.config = from_json(cfg);
            out.push_back(std::move(v));
            std::size_t a = axes.size();
            while (a > 0) {
                --a;
                if (++idx[a] < axes[a].second.size()) break;
                idx[a] = 0;
                if (a == 0) return out;
            }
            if (axes.empty()) return out;
        }
    });
}

}  // namespace trcl
