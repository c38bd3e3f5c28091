#include <cstdio>
#include <set>

#include "lfs/pipeline.hpp"

namespace lfs {

namespace {

std::string join_errors(const std::vector<std::string>& e) {
    std::string s = "invalid config:";
    for (auto& x : e) s += "\n  " + x;
    return s;
}

// typed field access that records a path-qualified error instead of throwing
class reader {
  public:
    reader(const nlohmann::json* j, std::string path, std::vector<std::string>& errs)
        : j_(j), path_(std::move(path)), errs_(errs) {
        if (j_ && !j_->is_object()) {
            errs_.push_back(where() + ": expected an object");
            j_ = nullptr;
        }
    }

    bool has(const char* key) const { return j_ && j_->contains(key); }

    const nlohmann::json* get(const char* key) {
        seen_.insert(key);
        if (!j_ || !j_->contains(key)) return nullptr;
        return &(*j_)[key];
    }

    void num(const char* key, double& out) {
        if (auto* v = get(key)) {
            if (v->is_number())
                out = v->get<double>();
            else
                bad(key, "expected a number");
        }
    }

    void integer(const char* key, int& out) {
        if (auto* v = get(key)) {
            if (v->is_number_integer())
                out = v->get<int>();
            else
                bad(key, "expected an integer");
        }
    }

    bool u64(const char* key, uint64_t& out) {
        if (auto* v = get(key)) {
            if (v->is_number_unsigned() || (v->is_number_integer() && v->get<int64_t>() >= 0)) {
                out = v->get<uint64_t>();
                return true;
            }
            bad(key, "expected a nonnegative integer");
        }
        return false;
    }

    void boolean(const char* key, bool& out) {
        if (auto* v = get(key)) {
            if (v->is_boolean())
                out = v->get<bool>();
            else
                bad(key, "expected true or false");
        }
    }

    void str(const char* key, std::string& out) {
        if (auto* v = get(key)) {
            if (v->is_string())
                out = v->get<std::string>();
            else
                bad(key, "expected a string");
        }
    }

    void nums(const char* key, std::vector<double>& out) {
        if (auto* v = get(key)) {
            if (!v->is_array()) return bad(key, "expected an array of numbers");
            std::vector<double> tmp;
            for (auto& x : *v) {
                if (!x.is_number()) return bad(key, "expected an array of numbers");
                tmp.push_back(x.get<double>());
            }
            out = tmp;
        }
    }

    void strs(const char* key, std::vector<std::string>& out) {
        if (auto* v = get(key)) {
            if (!v->is_array()) return bad(key, "expected an array of strings");
            std::vector<std::string> tmp;
            for (auto& x : *v) {
                if (!x.is_string()) return bad(key, "expected an array of strings");
                tmp.push_back(x.get<std::string>());
            }
            out = tmp;
        }
    }

    void pair(const char* key, range& out) {
        if (auto* v = get(key)) {
            if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
                return bad(key, "expected [lo, hi]");
            out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
            if (out[0] > out[1]) bad(key, "lo exceeds hi");
        }
    }

    void pairs(const char* key, std::vector<range>& out) {
        if (auto* v = get(key)) {
            if (!v->is_array()) return bad(key, "expected a list of [lo, hi]");
            std::vector<range> tmp;
            for (auto& x : *v) {
                if (!x.is_array() || x.size() != 2 || !x[0].is_number() || !x[1].is_number())
                    return bad(key, "expected a list of [lo, hi]");
                tmp.push_back({x[0].get<double>(), x[1].get<double>()});
            }
            out = tmp;
        }
    }

    reader sub(const char* key) {
        auto* v = get(key);
        return reader(v, where(key), errs_);
    }

    void finish() {
        if (!j_) return;
        for (auto& [k, _] : j_->items())
            if (!seen_.count(k)) errs_.push_back(where(k.c_str()) + ": unknown field");
    }

    void bad(const char* key, const std::string& msg) { errs_.push_back(where(key) + ": " + msg); }

    std::string where(const char* key = nullptr) const {
        if (!key) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

  private:
    const nlohmann::json* j_;
    std::string path_;
    std::vector<std::string>& errs_;
    std::set<std::string> seen_;
};

}  // namespace

config_error::config_error(std::vector<std::string> e) : error(join_errors(e)), errors(std::move(e)) {}

std::vector<double> default_sweep_values(const std::string& param) {
    if (param == "t") return {0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
    if (param == "alpha") return {0, 5, 10, 20, 30, 40, 50, 200};
    throw error("sweep: unknown parameter '" + param + "' (expected t or alpha)");
}

pipeline_config default_config(uint64_t seed) {
    pipeline_config c;
    c.seed = seed;
    c.world.seed = seed;
    c.sae.train.seed = seed;
    c.probe_seed = seed;
    c.ablate.seed = seed;
    return c;
}

pipeline_config validate_config(const nlohmann::json& j, const uint64_t* seed_override) {
    std::vector<std::string> errs;
    pipeline_config c;
    reader root(&j, "", errs);
    root.u64("seed", c.seed);
    if (seed_override) c.seed = *seed_override;
    root.boolean("deterministic", c.deterministic);

    c.world.seed = c.seed;
    c.sae.train.seed = c.seed;
    c.probe_seed = c.seed;
    c.ablate.seed = c.seed;

    {
        auto w = root.sub("world");
        auto& x = c.world;
        w.integer("d_model", x.d_model);
        w.integer("f_true", x.f_true);
        w.integer("k_true", x.k_true);
        w.integer("n_layers", x.n_layers);
        w.integer("signal_layer", x.signal_layer);
        w.num("noise_sigma", x.noise_sigma);
        w.u64("seed", x.seed);
        w.integer("n_consistency", x.n_consistency);
        w.integer("n_evidence", x.n_evidence);
        w.num("evidence_weight", x.evidence_weight);
        w.num("domain_weight", x.domain_weight);
        w.num("role_max_cos", x.role_max_cos);
        w.num("scale", x.scale);
        w.num("p_stable", x.p_stable);
        w.pair("stable_coef", x.stable_coef);
        w.pair("distractor_coef", x.distractor_coef);
        w.pair("domain_coef", x.domain_coef);
        w.integer("n_nuisance", x.n_nuisance);
        w.pair("nuisance_coef", x.nuisance_coef);
        w.num("nuisance_jitter", x.nuisance_jitter);
        w.pairs("slot_strength", x.slot_strength);
        w.integer("open_min_features", x.open_min_features);
        w.integer("open_max_features", x.open_max_features);
        w.pair("open_coef", x.open_coef);
        w.finish();
        if (x.d_model <= 0) w.bad("d_model", "must be positive");
        if (x.f_true <= x.d_model) w.bad("f_true", "must exceed world.d_model (no superposition otherwise)");
        if (x.n_layers < 2) w.bad("n_layers", "must be at least 2");
        if (x.signal_layer < 0 || x.signal_layer >= x.n_layers) w.bad("signal_layer", "must lie in [0, n_layers)");
        if (x.noise_sigma < 0) w.bad("noise_sigma", "must be >= 0");
        if (x.n_consistency < 1) w.bad("n_consistency", "must be >= 1");
        if (x.n_evidence < 1) w.bad("n_evidence", "must be >= 1");
        if (x.role_max_cos <= 0 || x.role_max_cos > 1) w.bad("role_max_cos", "must lie in (0, 1]");
        if (x.p_stable < 0 || x.p_stable > 1) w.bad("p_stable", "must lie in [0, 1]");
        if (x.slot_strength.size() < 2) w.bad("slot_strength", "need at least 2 paraphrase slots");
        if (x.slot_strength.size() > 255) w.bad("slot_strength", "at most 255 slots");
        if (x.n_nuisance < 0) w.bad("n_nuisance", "must be >= 0");
        if (x.k_true < 3 + x.n_nuisance) w.bad("k_true", "too small for the planted group coefficients");
        if (x.open_min_features < 1 || x.open_max_features < x.open_min_features)
            w.bad("open_max_features", "need 1 <= open_min_features <= open_max_features");
        if (x.open_max_features > x.k_true) w.bad("open_max_features", "must not exceed k_true");
    }
    {
        auto d = root.sub("data");
        auto& x = c.data;
        d.integer("n_open", x.n_open);
        d.integer("n_layer_pairs", x.n_layer_pairs);
        d.integer("n_contrastive", x.n_contrastive);
        d.integer("n_eval_groups", x.n_eval_groups);
        d.integer("n_ood", x.n_ood);
        d.finish();
        if (x.n_open < 1) d.bad("n_open", "must be positive");
        if (x.n_layer_pairs < 10) d.bad("n_layer_pairs", "must be >= 10");
        if (x.n_contrastive < 1) d.bad("n_contrastive", "must be positive");
        if (x.n_eval_groups < 1) d.bad("n_eval_groups", "must be positive");
        if (x.n_ood < 1) d.bad("n_ood", "must be positive");
    }
    {
        auto s = root.sub("sae");
        s.integer("F", c.sae.F);
        s.integer("k", c.sae.k);
        s.integer("layer", c.sae.layer);
        auto t = s.sub("train");
        auto& x = c.sae.train;
        t.integer("steps", x.steps);
        t.num("learning_rate", x.learning_rate);
        t.integer("batch_size", x.batch_size);
        t.num("beta1", x.beta1);
        t.num("beta2", x.beta2);
        t.num("eps", x.eps);
        t.u64("seed", x.seed);
        t.integer("dead_feature_window", x.dead_feature_window);
        t.num("decay_frac", x.decay_frac);
        t.integer("warmup_samples", x.warmup_samples);
        t.integer("log_every", x.log_every);
        t.finish();
        s.finish();
        if (c.sae.F <= 0) s.bad("F", "must be positive");
        if (c.sae.k <= 0) s.bad("k", "must be positive");
        if (c.sae.k > c.sae.F) s.bad("k", "k exceeds F");
        if (c.sae.layer < -1) s.bad("layer", "must be -1 (located layer) or a layer index");
        if (x.steps <= 0) t.bad("steps", "must be positive");
        if (x.learning_rate < 0) t.bad("learning_rate", "negative learning rate");
        if (x.batch_size <= 0) t.bad("batch_size", "must be positive");
        if (x.beta1 < 0 || x.beta1 >= 1) t.bad("beta1", "must lie in [0, 1)");
        if (x.beta2 < 0 || x.beta2 >= 1) t.bad("beta2", "must lie in [0, 1)");
        if (x.eps <= 0) t.bad("eps", "must be positive");
        if (x.decay_frac < 0 || x.decay_frac > 1) t.bad("decay_frac", "must lie in [0, 1]");
        if (x.dead_feature_window <= 0) t.bad("dead_feature_window", "must be positive");
        if (x.log_every <= 0) t.bad("log_every", "must be positive");
    }
    {
        auto p = root.sub("probe");
        auto& x = c.probe;
        std::vector<double> ratio{double(x.train_part), double(x.test_part)};
        p.nums("split", ratio);
        if (ratio.size() != 2 || ratio[0] != int(ratio[0]) || ratio[1] != int(ratio[1]) || ratio[0] <= 0 ||
            ratio[1] <= 0)
            p.bad("split", "expected [train, test] positive integers");
        else
            x.train_part = ratio[0], x.test_part = ratio[1];
        p.num("learning_rate", x.learning_rate);
        p.num("l2", x.l2);
        p.integer("max_iters", x.max_iters);
        p.num("tol", x.tol);
        p.integer("patience", x.patience);
        p.u64("seed", c.probe_seed);
        p.finish();
        if (x.learning_rate <= 0) p.bad("learning_rate", "must be positive");
        if (x.l2 < 0) p.bad("l2", "must be >= 0");
        if (x.max_iters <= 0) p.bad("max_iters", "must be positive");
    }
    {
        auto f = root.sub("features");
        f.num("t", c.features.t);
        std::string mode = "absolute";
        f.str("mode", mode);
        f.integer("top_n", c.features.top_n);
        f.finish();
        if (!(c.features.t > 0)) f.bad("t", "must be > 0");
        if (mode == "absolute")
            c.features.mode = diff_mode::absolute;
        else if (mode == "signed")
            c.features.mode = diff_mode::signed_diff;
        else
            f.bad("mode", "expected absolute or signed");
        if (c.features.top_n < 0) f.bad("top_n", "must be >= 0");
    }
    {
        auto s = root.sub("steering");
        s.num("alpha", c.steering.alpha);
        s.boolean("passthrough", c.steering.passthrough);
        s.boolean("last_token_only", c.steering.last_token_only);
        s.finish();
        if (c.steering.alpha < 0) s.bad("alpha", "must be >= 0");
    }
    {
        auto e = root.sub("eval");
        e.num("ood_max_cos", c.eval.ood_max_cos);
        e.num("locality_tolerance", c.eval.locality_tolerance);
        e.finish();
        if (c.eval.ood_max_cos <= 0 || c.eval.ood_max_cos > 1) e.bad("ood_max_cos", "must lie in (0, 1]");
        if (c.eval.locality_tolerance < 0) e.bad("locality_tolerance", "must be >= 0");
    }
    {
        auto s = root.sub("sweep");
        s.str("param", c.sweep.param);
        s.nums("values", c.sweep.values);
        s.finish();
        if (c.sweep.param != "t" && c.sweep.param != "alpha")
            s.bad("param", "expected t or alpha");
        else if (c.sweep.values.empty())
            c.sweep.values = default_sweep_values(c.sweep.param);
        if (c.sweep.values.size() < 2) s.bad("values", "need at least 2 values");
    }
    {
        auto a = root.sub("ablate");
        a.strs("modes", c.ablate.modes);
        a.u64("seed", c.ablate.seed);
        a.finish();
        for (auto& m : c.ablate.modes)
            if (m != "random_features" && m != "random_layer")
                a.bad("modes", "unknown mode '" + m + "' (expected random_features or random_layer)");
    }
    {
        auto p = root.sub("paths");
        p.str("out_dir", c.paths.out_dir);
        p.str("shards", c.paths.shards);
        p.str("manifests", c.paths.manifests);
        p.str("checkpoints", c.paths.checkpoints);
        p.str("reports", c.paths.reports);
        p.finish();
    }
    root.finish();
    c.sae.train.deterministic = c.deterministic;

    if (c.sae.layer >= c.world.n_layers) errs.push_back("sae.layer: beyond world.n_layers");
    if (!errs.empty()) throw config_error(errs);
    return c;
}

ojson config_to_json(const pipeline_config& c) {
    auto rng_json = [](const range& r) { return ojson::array({r[0], r[1]}); };
    ojson j;
    j["seed"] = c.seed;
    j["deterministic"] = c.deterministic;
    auto& w = c.world;
    ojson wj;
    wj["d_model"] = w.d_model;
    wj["f_true"] = w.f_true;
    wj["k_true"] = w.k_true;
    wj["n_layers"] = w.n_layers;
    wj["signal_layer"] = w.signal_layer;
    wj["noise_sigma"] = w.noise_sigma;
    wj["seed"] = w.seed;
    wj["n_consistency"] = w.n_consistency;
    wj["n_evidence"] = w.n_evidence;
    wj["evidence_weight"] = w.evidence_weight;
    wj["domain_weight"] = w.domain_weight;
    wj["role_max_cos"] = w.role_max_cos;
    wj["scale"] = w.scale;
    wj["p_stable"] = w.p_stable;
    wj["stable_coef"] = rng_json(w.stable_coef);
    wj["distractor_coef"] = rng_json(w.distractor_coef);
    wj["domain_coef"] = rng_json(w.domain_coef);
    wj["n_nuisance"] = w.n_nuisance;
    wj["nuisance_coef"] = rng_json(w.nuisance_coef);
    wj["nuisance_jitter"] = w.nuisance_jitter;
    ojson slots = ojson::array();
    for (auto& r : w.slot_strength) slots.push_back(rng_json(r));
    wj["slot_strength"] = slots;
    wj["open_min_features"] = w.open_min_features;
    wj["open_max_features"] = w.open_max_features;
    wj["open_coef"] = rng_json(w.open_coef);
    j["world"] = wj;
    j["data"] = {{"n_open", c.data.n_open},
                 {"n_layer_pairs", c.data.n_layer_pairs},
                 {"n_contrastive", c.data.n_contrastive},
                 {"n_eval_groups", c.data.n_eval_groups},
                 {"n_ood", c.data.n_ood}};
    auto& t = c.sae.train;
    ojson tj;
    tj["steps"] = t.steps;
    tj["learning_rate"] = t.learning_rate;
    tj["batch_size"] = t.batch_size;
    tj["beta1"] = t.beta1;
    tj["beta2"] = t.beta2;
    tj["eps"] = t.eps;
    tj["seed"] = t.seed;
    tj["dead_feature_window"] = t.dead_feature_window;
    tj["decay_frac"] = t.decay_frac;
    tj["warmup_samples"] = t.warmup_samples;
    tj["log_every"] = t.log_every;
    j["sae"] = {{"F", c.sae.F}, {"k", c.sae.k}, {"layer", c.sae.layer}, {"train", tj}};
    j["probe"] = {{"split", {c.probe.train_part, c.probe.test_part}},
                  {"learning_rate", c.probe.learning_rate},
                  {"l2", c.probe.l2},
                  {"max_iters", c.probe.max_iters},
                  {"tol", c.probe.tol},
                  {"patience", c.probe.patience},
                  {"seed", c.probe_seed}};
    j["features"] = {{"t", c.features.t},
                     {"mode", c.features.mode == diff_mode::absolute ? "absolute" : "signed"},
                     {"top_n", c.features.top_n}};
    j["steering"] = {{"alpha", c.steering.alpha},
                     {"passthrough", c.steering.passthrough},
                     {"last_token_only", c.steering.last_token_only}};
    j["eval"] = {{"ood_max_cos", c.eval.ood_max_cos}, {"locality_tolerance", c.eval.locality_tolerance}};
    j["sweep"] = {{"param", c.sweep.param}, {"values", c.sweep.values}};
    j["ablate"] = {{"modes", c.ablate.modes}, {"seed", c.ablate.seed}};
    return j;
}

std::string config_hash(const pipeline_config& c) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)fnv1a(config_to_json(c).dump()));
    return buf;
}

}  // namespace lfs
