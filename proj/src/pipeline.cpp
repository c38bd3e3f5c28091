#include "lfs/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace lfs {

namespace {

std::span<const float> vec_of(const shard_set& s, uint64_t pid, int layer) {
    auto* r = s.last_token(pid, uint16_t(layer));
    if (!r)
        throw error("no activation for prompt " + std::to_string(pid) + " at layer " + std::to_string(layer));
    return r->vec;
}

std::vector<double> to_double(std::span<const float> v) { return {v.begin(), v.end()}; }

void add_slot(shard_set& s, const std::vector<activation_record>& recs, int slot, int n_layers) {
    for (int l = 0; l < n_layers; ++l) s.add(recs[size_t(slot) * n_layers + l]);
}

}  // namespace

// ---- data ----

dataset generate_dataset(const pipeline_config& c) {
    dataset ds;
    ds.world = generate_world(c.world);
    const auto& w = ds.world;
    const int L = w.cfg.n_layers, sig = w.cfg.signal_layer;
    const int V = int(w.cfg.slot_strength.size());
    ds.dev.d_model = ds.bench.d_model = uint32_t(w.cfg.d_model);

    // D_l: (original, paraphrase) pairs labelled by whether the head agrees on them.
    // balanced over (gold, label) so the probe cannot lean on either
    {
        const int n = c.data.n_layer_pairs;
        int quota[2][2];
        for (int q = 0; q < 4; ++q) quota[q / 2][q % 2] = n / 4 + (q < n % 4);
        rng r(derive_seed(c.seed, "dl"));
        int filled = 0;
        for (uint64_t i = 0; filled < n; ++i) {
            if (i > 1000ull * n) throw error("gen: could not balance D_l");
            int gold = int(i % 2);
            auto g = make_group(w, pool_group(pool_layerloc, i), gold);
            int ns = 1 + int(r.below(V - 1));
            auto recs = emit_activations(w, g);
            auto& hm = recs[size_t(0) * L + sig].vec;
            auto& hn = recs[size_t(ns) * L + sig].vec;
            int label = head_predict(w, std::span<const float>(hm)) == head_predict(w, std::span<const float>(hn));
            if (quota[gold][label] == 0) continue;
            quota[gold][label]--;
            ++filled;
            ds.dl.push_back({prompt_id_of(g.group_id, 0), prompt_id_of(g.group_id, ns), label});
            add_slot(ds.dev, recs, 0, L);
            add_slot(ds.dev, recs, ns, L);
        }
    }

    // D_f: a correctly answered variant against a wrong one from the same group
    {
        rng r(derive_seed(c.seed, "df"));
        for (uint64_t i = 0; int(ds.df.size()) < c.data.n_contrastive; ++i) {
            if (i > 1000ull * c.data.n_contrastive) throw error("gen: could not fill D_f");
            auto g = make_group(w, pool_group(pool_contrastive, i), int(i % 2));
            auto recs = emit_activations(w, g);
            std::vector<int> right, wrong;
            for (int s = 0; s < V; ++s)
                (head_predict(w, std::span<const float>(recs[size_t(s) * L + sig].vec)) == g.gold_label ? right
                                                                                                       : wrong)
                    .push_back(s);
            if (right.empty() || wrong.empty()) continue;
            int u = right[0], v = r.pick(wrong);
            ds.df.push_back({prompt_id_of(g.group_id, u), prompt_id_of(g.group_id, v)});
            add_slot(ds.dev, recs, u, L);
            add_slot(ds.dev, recs, v, L);
        }
    }

    for (int i = 0; i < c.data.n_eval_groups; ++i) {
        auto g = make_group(w, pool_group(pool_bench, uint64_t(i)), i % 2);
        ds.bench.add_all(emit_activations(w, g));
        ds.bench_groups.push_back({g.group_id, g.gold_label, V});
    }

    for (int l = 0; l < L; ++l) {
        rng r(derive_seed(c.seed, "open", uint64_t(l)));
        for (int i = 0; i < c.data.n_open; ++i) {
            auto h = open_sample(w, r);
            activation_record rec;
            rec.prompt_id = prompt_id_of(pool_group(pool_open, uint64_t(i)), 0);
            rec.layer_index = uint16_t(l);
            rec.vec.assign(h.begin(), h.end());
            ds.open.push_back(std::move(rec));
        }
    }
    return ds;
}

std::vector<manifest_record> bench_manifest(const std::vector<group_ref>& groups) {
    std::vector<manifest_record> m;
    for (auto& g : groups) {
        manifest_record r;
        r.kind = "bench_group";
        for (int s = 0; s < g.n_slots; ++s) r.ids.push_back(prompt_id_of(g.group_id, s));
        r.label = g.gold;
        m.push_back(std::move(r));
    }
    return m;
}

std::vector<group_ref> bench_groups_from(const std::vector<manifest_record>& m) {
    std::vector<group_ref> out;
    for (auto& r : m) {
        if (r.kind != "bench_group") throw error("bench manifest: unexpected kind '" + r.kind + "'");
        if (r.ids.size() < 2) throw error("bench manifest: group with fewer than 2 variants");
        if (r.label != 0 && r.label != 1) throw error("bench manifest: gold label must be 0 or 1");
        group_ref g{group_of(r.ids[0]), r.label, int(r.ids.size())};
        for (int s = 0; s < g.n_slots; ++s)
            if (r.ids[s] != prompt_id_of(g.group_id, s)) throw error("bench manifest: ids are not one group");
        out.push_back(g);
    }
    return out;
}

// ---- stages ----

std::vector<int> all_layers(const pipeline_config& c) {
    std::vector<int> l(c.world.n_layers);
    for (int i = 0; i < c.world.n_layers; ++i) l[i] = i;
    return l;
}

std::vector<probe_result> locate_layer(const pipeline_config& c, const shard_set& dev,
                                       const std::vector<layer_loc_pair>& dl) {
    return rank_layers(dev, dl, all_layers(c), c.probe, c.probe_seed);
}

std::vector<double> open_rows(const std::vector<activation_record>& open, int layer, int& n) {
    std::vector<double> rows;
    n = 0;
    for (auto& r : open)
        if (r.layer_index == layer) {
            rows.insert(rows.end(), r.vec.begin(), r.vec.end());
            ++n;
        }
    return rows;
}

train_result train_sae(const pipeline_config& c, const std::vector<activation_record>& open, int layer) {
    int n = 0;
    auto rows = open_rows(open, layer, n);
    if (n == 0) throw error("train-sae: no D_o records at layer " + std::to_string(layer));
    int d = int(rows.size() / n);
    auto init = init_params(d, c.sae.F, c.sae.k, rows, n, c.sae.train.warmup_samples, c.sae.train.seed);
    auto res = train(std::move(init), rows, n, c.sae.train);
    round_to_f32(res.params);
    return res;
}

located_features locate_features(const pipeline_config& c, const sae_params& sae, const shard_set& dev,
                                 const std::vector<contrastive_pair>& df, int layer,
                                 const std::string& ckpt_ref) {
    located_features lf;
    lf.g = avg_feature_diff(sae, dev, df, layer, c.features.mode);
    lf.spec.indices = select_key_features(lf.g, c.features.t);
    lf.spec.bias = lf.g;
    lf.spec.threshold = c.features.t;
    lf.spec.strength = c.steering.alpha;
    lf.spec.layer = layer;
    lf.spec.sae_checkpoint_ref = ckpt_ref;
    lf.spec.mode = c.features.mode;
    return lf;
}

steering_spec with_features(const steering_spec& base, const std::vector<double>& g, double t) {
    steering_spec s = base;
    s.bias = g;
    s.threshold = t;
    s.indices = select_key_features(g, t, true);
    return s;
}

bench_eval evaluate_bench(const pipeline_config&, const planted_world& w, const shard_set& bench,
                          const std::vector<group_ref>& groups, const steering_session* s) {
    const int sig = w.cfg.signal_layer;
    bench_eval out;
    eval_set es;
    uint64_t before = s ? s->stats.tokens_steered.load() : 0;
    for (auto& g : groups) {
        eval_group eg;
        eg.group_id = g.group_id;
        eg.gold = g.gold;
        for (int slot = 0; slot < g.n_slots; ++slot) {
            uint64_t pid = prompt_id_of(g.group_id, slot);
            auto h = to_double(vec_of(bench, pid, sig));
            int base = head_predict(w, h);
            if (s) {
                if (s->spec.layer == sig)
                    h = steer_hidden_state(*s, h);
                else
                    // the head reads the signal layer only, so steering elsewhere cannot reach it
                    steer_hidden_state(*s, to_double(vec_of(bench, pid, s->spec.layer)));
            }
            int pred = head_predict(w, h);
            if (base != g.gold) {
                out.previously_wrong++;
                out.fixed += pred == g.gold;
            }
            eg.predictions.push_back(pred);
            eg.embeddings.push_back(std::move(h));
        }
        es.groups.push_back(std::move(eg));
    }
    out.acc = accuracy_and_std(es);
    out.consistency = mean_pairwise_cosine(es);
    if (s) out.tokens_steered = s->stats.tokens_steered.load() - before;
    return out;
}

std::vector<int> match_latents(const planted_world& w, const sae_params& sae) {
    const int d = w.cfg.d_model;
    if (sae.d_model != d) throw error("match_latents: sae and world disagree on d_model");
    std::vector<int> m(w.cfg.f_true);
    for (int j = 0; j < w.cfg.f_true; ++j) {
        const double* a = w.column(j);
        double best = -2;
        for (int i = 0; i < sae.F; ++i) {
            const double* b = sae.dec_col(i);
            double dot = 0, nb = 0;
            for (int x = 0; x < d; ++x) dot += a[x] * b[x], nb += b[x] * b[x];
            double cs = nb > 0 ? dot / std::sqrt(nb) : 0;
            if (cs > best) best = cs, m[j] = i;
        }
    }
    return m;
}

double mean_max_cosine(const planted_world& w, const sae_params& sae) {
    const int d = w.cfg.d_model;
    auto m = match_latents(w, sae);
    double total = 0;
    for (int j = 0; j < w.cfg.f_true; ++j) {
        const double* a = w.column(j);
        const double* b = sae.dec_col(m[j]);
        double dot = 0, nb = 0;
        for (int x = 0; x < d; ++x) dot += a[x] * b[x], nb += b[x] * b[x];
        total += nb > 0 ? dot / std::sqrt(nb) : 0;
    }
    return total / w.cfg.f_true;
}

ood_eval evaluate_ood(const pipeline_config& c, const planted_world& w, const steering_session& s) {
    const int d = w.cfg.d_model, sig = w.cfg.signal_layer;
    auto match = match_latents(w, s.sae);
    // an OOD feature must be unrelated to I: not matched to a latent in I, and far from every one of them
    auto allowed = [&](int j) {
        if (s.in_I[match[j]]) return false;
        for (int i : s.spec.indices) {
            const double* b = s.sae.dec_col(i);
            double dot = 0, nb = 0;
            for (int x = 0; x < d; ++x) dot += w.column(j)[x] * b[x], nb += b[x] * b[x];
            if (nb > 0 && dot / std::sqrt(nb) >= c.eval.ood_max_cos) return false;
        }
        return true;
    };
    std::vector<int> ev, nu;
    for (int j : w.evidence_pos)
        if (allowed(j)) ev.push_back(j);
    for (int j : w.evidence_neg)
        if (allowed(j)) ev.push_back(j);
    for (int j : w.nuisance)
        if (allowed(j)) nu.push_back(j);
    if (ev.empty()) throw error("evaluate: every OOD evidence feature overlaps the located features");
    if (int(nu.size()) < w.cfg.n_nuisance + 1) throw error("evaluate: too few nuisance features avoid I for OOD");

    ood_eval out;
    rng r(derive_seed(c.seed, "ood"));
    int domain = r.pick(nu);
    nu.erase(std::find(nu.begin(), nu.end(), domain));
    out.evidence_pool = int(ev.size());
    out.nuisance_pool = int(nu.size());
    int right_before = 0, right_after = 0;
    for (int i = 0; i < c.data.n_ood; ++i) {
        auto it = make_ood_item(w, ev, domain, nu, r);
        int p0 = head_predict(w, it.h);
        int p1 = p0;
        if (s.spec.layer == sig) p1 = head_predict(w, steer_hidden_state(s, it.h));
        right_before += p0 == it.gold;
        right_after += p1 == it.gold;
        out.flips += p0 != p1;
    }
    out.n = c.data.n_ood;
    out.before = double(right_before) / out.n;
    out.after = double(right_after) / out.n;
    out.loc = locality_delta({"ood", "accuracy", out.before}, {"ood", "accuracy", out.after},
                             c.eval.locality_tolerance);
    return out;
}

std::vector<sweep_row> sweep_param(const pipeline_config& c, const planted_world& w, const shard_set& bench,
                                   const std::vector<group_ref>& groups, const sae_params& sae,
                                   const located_features& lf, const std::string& param,
                                   const std::vector<double>& values) {
    if (param != "t" && param != "alpha") throw error("sweep: unknown parameter '" + param + "'");
    return sweep(values, [&](double v) {
        steering_spec spec = lf.spec;
        if (param == "t") {
            if (!(v > 0)) throw error("t must be > 0");
            spec = with_features(lf.spec, lf.g, v);
        } else {
            if (v < 0) throw error("alpha must be >= 0");
            spec.strength = v;
        }
        steering_session s(sae, spec, c.steering.passthrough, c.steering.last_token_only);
        auto e = evaluate_bench(c, w, bench, groups, &s);
        return sweep_point{int(spec.indices.size()), e.acc.mean, e.acc.std, e.consistency};
    });
}

std::vector<ablation_row> ablate(const pipeline_config& c, const dataset& data, const sae_params& sae,
                                 const located_features& lf, const std::string& mode, uint64_t seed) {
    const auto& w = data.world;
    auto row = [&](std::string name, const steering_spec* spec) {
        ablation_row r;
        r.name = std::move(name);
        bench_eval e;
        if (spec) {
            steering_session s(sae, *spec, c.steering.passthrough, c.steering.last_token_only);
            e = evaluate_bench(c, w, data.bench, data.bench_groups, &s);
            r.layer = spec->layer;
            r.n_features = int(spec->indices.size());
        } else {
            e = evaluate_bench(c, w, data.bench, data.bench_groups, nullptr);
        }
        r.accuracy = e.acc.mean;
        r.std = e.acc.std;
        return r;
    };

    std::vector<ablation_row> rows;
    rows.push_back(row("baseline", nullptr));
    rows.push_back(row("located", &lf.spec));
    if (mode == "random_features") {
        // same number of features and the same bias values, placed on random latents
        rng r(derive_seed(seed, "ablate-features"));
        std::vector<int> all(sae.F);
        for (int i = 0; i < sae.F; ++i) all[i] = i;
        auto pick = r.sample(all, int(lf.spec.indices.size()));
        auto perm = r.permutation(int(lf.spec.indices.size()));
        steering_spec s = lf.spec;
        s.bias.assign(sae.F, 0.0);
        for (size_t a = 0; a < pick.size(); ++a) s.bias[pick[a]] = lf.g[lf.spec.indices[perm[a]]];
        std::sort(pick.begin(), pick.end());
        s.indices = pick;
        rows.push_back(row("random_features", &s));
    } else if (mode == "random_layer") {
        rng r(derive_seed(seed, "ablate-layer"));
        std::vector<int> others;
        for (int l : all_layers(c))
            if (l != lf.spec.layer) others.push_back(l);
        int layer = r.pick(others);
        auto g = avg_feature_diff(sae, data.dev, data.df, layer, c.features.mode);
        steering_spec s = with_features(lf.spec, g, c.features.t);
        s.layer = layer;
        rows.push_back(row("random_layer", &s));
    } else {
        throw error("ablate: unknown mode '" + mode + "'");
    }
    return rows;
}

pipeline_run run_pipeline(const pipeline_config& c) {
    pipeline_run run;
    run.data = generate_dataset(c);
    run.ranking = locate_layer(c, run.data.dev, run.data.dl);
    run.layer = c.sae.layer >= 0 ? c.sae.layer : run.ranking.front().layer_index;
    run.sae = train_sae(c, run.data.open, run.layer);
    run.located = locate_features(c, run.sae.params, run.data.dev, run.data.df, run.layer);
    run.base = evaluate_bench(c, run.data.world, run.data.bench, run.data.bench_groups, nullptr);
    steering_session s(run.sae.params, run.located.spec, c.steering.passthrough, c.steering.last_token_only);
    run.steered = evaluate_bench(c, run.data.world, run.data.bench, run.data.bench_groups, &s);
    run.ood = evaluate_ood(c, run.data.world, s);
    return run;
}

// ---- report json ----

ojson to_json(const probe_result& r) {
    ojson j;
    j["layer"] = r.layer_index;
    j["test_accuracy"] = r.test_accuracy;
    j["train_accuracy"] = r.train_accuracy;
    j["iterations"] = r.iterations;
    return j;
}

ojson to_json(const slot_accuracy& a) {
    ojson j;
    j["mean"] = a.mean;
    j["std"] = a.std;
    j["slots"] = a.slots;
    return j;
}

ojson to_json(const bench_eval& e) {
    ojson j;
    j["accuracy"] = to_json(e.acc);
    j["consistency"] = e.consistency;
    j["previously_wrong"] = e.previously_wrong;
    j["fixed"] = e.fixed;
    j["tokens_steered"] = e.tokens_steered;
    return j;
}

ojson to_json(const ood_eval& e) {
    ojson j;
    j["n"] = e.n;
    j["before"] = e.before;
    j["after"] = e.after;
    j["delta"] = e.loc.delta;
    j["flagged"] = e.loc.flagged;
    j["flips"] = e.flips;
    j["evidence_pool"] = e.evidence_pool;
    j["nuisance_pool"] = e.nuisance_pool;
    return j;
}

ojson to_json(const std::vector<sweep_row>& rows) {
    ojson a = ojson::array();
    for (auto& r : rows) {
        ojson j;
        j["value"] = r.value;
        j["ok"] = r.ok;
        if (r.ok) {
            j["n_features"] = r.point.n_features;
            j["accuracy"] = r.point.accuracy;
            j["std"] = r.point.std;
            j["consistency"] = r.point.consistency;
        } else {
            j["error"] = r.error;
        }
        a.push_back(j);
    }
    return a;
}

ojson to_json(const std::vector<ablation_row>& rows) {
    ojson a = ojson::array();
    for (auto& r : rows) {
        ojson j;
        j["name"] = r.name;
        j["layer"] = r.layer;
        j["n_features"] = r.n_features;
        j["accuracy"] = r.accuracy;
        j["std"] = r.std;
        a.push_back(j);
    }
    return a;
}

ojson to_json(const train_report& r) {
    ojson j;
    j["steps_run"] = r.steps_run;
    j["initial_loss"] = r.initial_loss;
    j["final_loss"] = r.final_loss;
    j["final_nmse"] = r.final_nmse;
    j["dead_features"] = r.dead_features;
    j["diverged"] = r.diverged;
    if (!r.message.empty()) j["message"] = r.message;
    j["loss_curve"] = r.loss_curve;
    return j;
}

}  // namespace lfs
