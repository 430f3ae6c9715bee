#include "lab/config.hpp"

#include <fstream>
#include <set>

namespace lab {

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = {"analytic-demo", "ellipse-demo", "zigzag-sweep",
                                                   "bound-check", "posterior-check", "toy-gan"};
    return names;
}

nlohmann::json load_config_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is)
        throw ConfigError("config: cannot open " + path.string());
    try {
        return nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: " + path.string() + ": " + e.what());
    }
}

namespace {

class Reader {
public:
    Reader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object())
            throw ConfigError("config: " + path_ + " must be an object");
    }

    ~Reader() = default;

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.contains(it.key()))
                throw ConfigError("config: unknown key " + path_ + "/" + it.key());
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    template <typename T>
    void get(const std::string& key, T& out, const char* type_name) {
        if (!has(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("config: " + path_ + "/" + key + " must be " + type_name);
        }
    }

    void get_double(const std::string& key, double& out) { get(key, out, "a number"); }
    void get_int(const std::string& key, int& out) { get(key, out, "an integer"); }
    void get_bool(const std::string& key, bool& out) { get(key, out, "a boolean"); }
    void get_size(const std::string& key, std::size_t& out) {
        get(key, out, "a nonnegative integer");
    }
    void get_string(const std::string& key, std::string& out) { get(key, out, "a string"); }

    void get_betas(const std::string& key, std::pair<double, double>& out) {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw ConfigError("config: " + path_ + "/" + key + " must be [beta1, beta2]");
        out = {v[0].get<double>(), v[1].get<double>()};
    }

    void get_int_list(const std::string& key, std::vector<int>& out) {
        if (!has(key)) return;
        const auto& v = j_.at(key);
        if (!v.is_array() || v.empty())
            throw ConfigError("config: " + path_ + "/" + key + " must be a nonempty array");
        out.clear();
        for (const auto& e : v) {
            if (!e.is_number_integer())
                throw ConfigError("config: " + path_ + "/" + key + " must hold integers");
            out.push_back(e.get<int>());
        }
    }

    const nlohmann::json* object(const std::string& key) {
        if (!has(key)) return nullptr;
        return &j_.at(key);
    }

private:
    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void apply_attack(const nlohmann::json& j, const std::string& path, AttackConfig& attack) {
    Reader r(j, path);
    r.get_double("epsilon", attack.epsilon);
    r.get_int("steps", attack.steps);
    r.get_double("step_size", attack.step_size);
    r.get_betas("adam_betas", attack.adam_betas);
    r.get_int("n_seeds", attack.n_seeds);
    std::string method;
    r.get_string("method", method);
    if (!method.empty()) {
        if (method == "projected-adam")
            attack.method = AttackMethod::ProjectedAdam;
        else if (method == "ifgsm")
            attack.method = AttackMethod::IFGSM;
        else
            throw ConfigError("config: " + path + "/method must be projected-adam or ifgsm");
    }
    r.get_double("ifgsm_alpha", attack.ifgsm_alpha);
    r.finish();
    try {
        attack.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + path + ": " + e.what());
    }
}

void apply_eval(const nlohmann::json& j, EvalOptions& eval) {
    Reader r(j, "eval");
    r.get_int("n_samples", eval.n_samples);
    r.get_int("k", eval.k);
    r.get_int("std_seeds", eval.std_seeds);
    r.get_bool("use_training_reals", eval.use_training_reals);
    r.get_bool("compute_w2", eval.compute_w2);
    std::string law;
    r.get_string("input_distribution", law);
    if (!law.empty()) {
        if (law == "marginal")
            eval.input_law = InputLaw::Marginal;
        else if (law == "uniform")
            eval.input_law = InputLaw::Uniform;
        else
            throw ConfigError("config: eval/input_distribution must be marginal or uniform");
    }
    r.finish();
    if (eval.n_samples <= eval.k || eval.k < 1)
        throw ConfigError("config: eval needs n_samples > k >= 1");
    if (eval.std_seeds < 2)
        throw ConfigError("config: eval/std_seeds must be >= 2");
}

}  // namespace

ScenarioConfig make_scenario_config(const std::string& scenario,
                                    const std::filesystem::path& out_dir,
                                    std::uint64_t master_seed, const nlohmann::json& overrides) {
    ScenarioConfig cfg;
    cfg.scenario = scenario;
    cfg.out_dir = out_dir;
    cfg.master_seed = master_seed;

    bool known = false;
    for (const std::string& name : scenario_names()) known = known || (name == scenario);
    if (!known)
        throw UsageError("unknown scenario: " + scenario);

    if (overrides.is_null()) {
        cfg.train = TrainConfig::reduced_preset(false, 0.0);
        return cfg;
    }

    Reader r(overrides, "");
    r.get_string("preset", cfg.preset);
    if (cfg.preset != "reduced" && cfg.preset != "full")
        throw ConfigError("config: preset must be reduced or full");
    cfg.train = (cfg.preset == "full") ? TrainConfig::full_preset(false, 0.0)
                                       : TrainConfig::reduced_preset(false, 0.0);

    r.get_int_list("widths", cfg.train.hidden_widths);
    r.get_int("total_steps", cfg.train.total_steps);
    r.get_int("batch_size", cfg.train.batch_size);
    r.get_double("lr", cfg.train.lr);
    r.get_betas("adam_betas", cfg.train.adam_betas);
    r.get_double("r1_gamma", cfg.train.r1_gamma);
    r.get_double("lambda_R", cfg.lambda_robust);
    r.get_int("robust_loss_period", cfg.train.robust_loss_period);
    r.get_size("train_size", cfg.train.train_size);
    r.get_size("val_size", cfg.train.val_size);
    r.get_int("seed_dim", cfg.train.seed_dim);

    if (const nlohmann::json* a = r.object("attack"))
        apply_attack(*a, "attack", cfg.train.attack);
    if (const nlohmann::json* e = r.object("eval"))
        apply_eval(*e, cfg.eval);

    if (const nlohmann::json* z = r.object("zigzag")) {
        Reader zr(*z, "zigzag");
        zr.get_int_list("frequencies", cfg.zigzag_frequencies);
        zr.get_int("n", cfg.zigzag_n);
        zr.finish();
        for (int f : cfg.zigzag_frequencies)
            if (f < 1)
                throw ConfigError("config: zigzag/frequencies must be positive");
        if (cfg.zigzag_n < 2 || static_cast<std::size_t>(cfg.zigzag_n) > kAssignmentCap)
            throw ConfigError("config: zigzag/n out of range");
    }
    if (const nlohmann::json* e = r.object("ellipse")) {
        Reader er(*e, "ellipse");
        er.get_double("a_outer", cfg.ellipse.a_outer);
        er.get_double("b_outer", cfg.ellipse.b_outer);
        er.get_double("a_inner", cfg.ellipse.a_inner);
        er.get_double("b_inner", cfg.ellipse.b_inner);
        er.get_int("n", cfg.ellipse_n);
        er.finish();
        try {
            cfg.ellipse.validate();
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(std::string("config: ellipse: ") + ex.what());
        }
    }
    if (const nlohmann::json* b = r.object("bound")) {
        Reader br(*b, "bound");
        br.get_int("n_inputs", cfg.bound.n_inputs);
        br.get_int("m", cfg.bound.m);
        bool saw_attack = br.has("attack");
        br.finish();
        if (saw_attack) apply_attack(b->at("attack"), "bound/attack", cfg.bound.attack);
        if (cfg.bound.n_inputs < 1)
            throw ConfigError("config: bound/n_inputs must be >= 1");
        if (cfg.bound.m < 1 || static_cast<std::size_t>(cfg.bound.m) > kAssignmentCap)
            throw ConfigError("config: bound/m out of range");
    }
    r.finish();

    if (cfg.lambda_robust < 0.0)
        throw ConfigError("config: lambda_R must be >= 0");
    cfg.train.eval_samples = cfg.eval.n_samples;
    cfg.train.eval_k = cfg.eval.k;
    cfg.train.eval_std_seeds = cfg.eval.std_seeds;
    cfg.train.eval_use_training_reals = cfg.eval.use_training_reals;
    cfg.train.eval_compute_w2 = cfg.eval.compute_w2;
    try {
        cfg.train.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

nlohmann::ordered_json ScenarioConfig::to_json() const {
    nlohmann::ordered_json j;
    j["preset"] = preset;
    j["widths"] = train.hidden_widths;
    j["total_steps"] = train.total_steps;
    j["batch_size"] = train.batch_size;
    j["lr"] = train.lr;
    j["adam_betas"] = {train.adam_betas.first, train.adam_betas.second};
    j["r1_gamma"] = train.r1_gamma;
    j["lambda_R"] = lambda_robust;
    j["robust_loss_period"] = train.robust_loss_period;
    j["train_size"] = train.train_size;
    j["val_size"] = train.val_size;
    j["attack"] = {{"epsilon", train.attack.epsilon},
                   {"steps", train.attack.steps},
                   {"step_size", train.attack.step_size},
                   {"adam_betas", {train.attack.adam_betas.first, train.attack.adam_betas.second}},
                   {"n_seeds", train.attack.n_seeds}};
    j["eval"] = {{"n_samples", eval.n_samples},
                 {"k", eval.k},
                 {"std_seeds", eval.std_seeds},
                 {"use_training_reals", eval.use_training_reals},
                 {"input_distribution", eval.input_law == InputLaw::Marginal ? "marginal" : "uniform"},
                 {"compute_w2", eval.compute_w2}};
    if (scenario == "zigzag-sweep")
        j["zigzag"] = {{"frequencies", zigzag_frequencies}, {"n", zigzag_n}};
    if (scenario == "ellipse-demo")
        j["ellipse"] = {{"a_outer", ellipse.a_outer},
                        {"b_outer", ellipse.b_outer},
                        {"a_inner", ellipse.a_inner},
                        {"b_inner", ellipse.b_inner},
                        {"n", ellipse_n}};
    if (scenario == "bound-check")
        j["bound"] = {{"n_inputs", bound.n_inputs},
                      {"m", bound.m},
                      {"attack",
                       {{"epsilon", bound.attack.epsilon},
                        {"steps", bound.attack.steps},
                        {"step_size", bound.attack.step_size},
                        {"n_seeds", bound.attack.n_seeds}}}};
    return j;
}

}  // namespace lab
