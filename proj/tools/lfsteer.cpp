// lfsteer: one entrypoint for every pipeline stage.
// layout under the out dir:
//   shards/{dev,bench,open}.actv  manifests/{dl,df,bench}.jsonl  world.json
//   checkpoints/{layer.json,sae.ckpt,spec.bin}  reports/<stage>-<config hash>.json
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <iterator>
#include <optional>

#include "CLI11.hpp"
#include "lfs/pipeline.hpp"

namespace fs = std::filesystem;
using namespace lfs;

namespace {

// missing prerequisite; the message names the stage to run first
struct missing_stage : error {
    using error::error;
};

struct layout {
    std::string shards, manifests, checkpoints, reports, root;

    std::string shard(const std::string& n) const { return shards + "/" + n + ".actv"; }
    std::string manifest(const std::string& n) const { return manifests + "/" + n + ".jsonl"; }
    std::string ckpt(const std::string& n) const { return checkpoints + "/" + n; }
    std::string world() const { return root + "/world.json"; }
};

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? v : fallback;
}

layout resolve_layout(const pipeline_config& c) {
    layout l;
    l.root = c.paths.out_dir;
    l.shards = env_or("LFS_SHARDS_DIR", c.paths.shards.empty() ? l.root + "/shards" : c.paths.shards);
    l.manifests = env_or("LFS_MANIFESTS_DIR", c.paths.manifests.empty() ? l.root + "/manifests" : c.paths.manifests);
    l.checkpoints =
        env_or("LFS_CHECKPOINTS_DIR", c.paths.checkpoints.empty() ? l.root + "/checkpoints" : c.paths.checkpoints);
    l.reports = env_or("LFS_REPORTS_DIR", c.paths.reports.empty() ? l.root + "/reports" : c.paths.reports);
    return l;
}

void need(const std::string& path, const std::string& stage) {
    if (!fs::exists(path)) throw missing_stage("missing " + path + ": run `" + stage + "` first");
}

std::string hex(uint64_t x) {
    char b[17];
    std::snprintf(b, sizeof b, "%016llx", (unsigned long long)x);
    return b;
}

// reports are never overwritten: an identical rerun is fine, a different one is an error
std::string write_report(const layout& l, const std::string& name, const pipeline_config& c, ojson body) {
    ojson j;
    j["stage"] = name;
    j["config_hash"] = config_hash(c);
    j["config"] = config_to_json(c);
    for (auto& [k, v] : body.items()) j[k] = v;
    std::string text = j.dump(2) + "\n";
    fs::create_directories(l.reports);
    std::string path = l.reports + "/" + name + "-" + config_hash(c) + ".json";
    if (fs::exists(path)) {
        if (read_file(path) != text)
            throw error("report " + path + " exists with different content; reports are never overwritten");
        return path;
    }
    write_file_atomic(path, text);
    return path;
}

shard_set load_set(const std::string& path, const std::string& stage) {
    need(path, stage);
    shard_set s;
    s.add_all(read_shard(path));
    return s;
}

// the world fingerprint covers everything the evaluator's head depends on
uint64_t world_fingerprint(const planted_world& w) {
    std::string bytes;
    bytes.append(reinterpret_cast<const char*>(w.dict.data()), w.dict.size() * sizeof(double));
    bytes.append(reinterpret_cast<const char*>(w.head.data()), w.head.size() * sizeof(double));
    return fnv1a(bytes);
}

ojson world_json(const planted_world& w) {
    ojson j;
    j["format"] = "lfs-world";
    j["fingerprint"] = hex(world_fingerprint(w));
    j["d_model"] = w.cfg.d_model;
    j["f_true"] = w.cfg.f_true;
    j["n_layers"] = w.cfg.n_layers;
    j["signal_layer"] = w.cfg.signal_layer;
    j["consistency_pos"] = w.consistency_pos;
    j["consistency_neg"] = w.consistency_neg;
    j["evidence_pos"] = w.evidence_pos;
    j["evidence_neg"] = w.evidence_neg;
    j["domain_feature"] = w.domain_feature;
    return j;
}

// evaluation needs the planted head, so data must come from gen with this world config
planted_world load_world(const pipeline_config& c, const layout& l) {
    need(l.world(), "gen");
    auto j = nlohmann::json::parse(read_file(l.world()));
    auto w = generate_world(c.world);
    if (j.value("fingerprint", "") != hex(world_fingerprint(w)))
        throw error(l.world() + " was generated with a different world config; rerun `gen`");
    return w;
}

int located_layer(const pipeline_config& c, const layout& l) {
    if (c.sae.layer >= 0) return c.sae.layer;
    need(l.ckpt("layer.json"), "locate-layer");
    return nlohmann::json::parse(read_file(l.ckpt("layer.json"))).at("layer").get<int>();
}

sae_params load_sae(const layout& l) {
    need(l.ckpt("sae.ckpt"), "train-sae");
    return load_checkpoint(l.ckpt("sae.ckpt"));
}

std::string sae_ref(const layout& l) { return "sae.ckpt#" + hex(fnv1a(read_file(l.ckpt("sae.ckpt")))); }

located_features load_located(const layout& l) {
    need(l.ckpt("spec.bin"), "locate-features");
    located_features lf;
    lf.spec = read_spec(l.ckpt("spec.bin"));
    if (lf.spec.sae_checkpoint_ref != sae_ref(l))
        throw missing_stage("spec.bin was located with a different SAE checkpoint: run `locate-features` again");
    lf.g = lf.spec.bias;
    return lf;
}

void print_bench(const char* name, const bench_eval& e) {
    std::printf("%-10s acc %.4f  std %.4f  consistency %.4f\n", name, e.acc.mean, e.acc.std, e.consistency);
}

// ---- stages ----

int do_gen(const pipeline_config& c, const layout& l) {
    auto ds = generate_dataset(c);
    fs::create_directories(l.shards);
    fs::create_directories(l.manifests);
    ojson files;
    auto note = [&](const std::string& key, const shard_summary& s) {
        files[key] = {{"records", s.count}, {"d_model", s.d_model}, {"checksum", hex(s.checksum)}};
    };
    note("dev", write_shard(ds.dev.records, l.shard("dev")));
    note("bench", write_shard(ds.bench.records, l.shard("bench")));
    note("open", write_shard(ds.open, l.shard("open")));
    write_manifest(to_manifest(ds.dl), l.manifest("dl"));
    write_manifest(to_manifest(ds.df), l.manifest("df"));
    write_manifest(bench_manifest(ds.bench_groups), l.manifest("bench"));
    write_file_atomic(l.world(), world_json(ds.world).dump(2) + "\n");
    ojson body;
    body["shards"] = files;
    body["layer_pairs"] = ds.dl.size();
    body["contrastive_pairs"] = ds.df.size();
    body["bench_groups"] = ds.bench_groups.size();
    body["world"] = world_json(ds.world);
    auto path = write_report(l, "gen", c, body);
    std::printf("gen: %zu D_l pairs, %zu D_f pairs, %zu bench groups, %zu D_o records\n", ds.dl.size(), ds.df.size(),
                ds.bench_groups.size(), ds.open.size());
    std::printf("report %s\n", path.c_str());
    return 0;
}

struct ingest_args {
    std::vector<std::string> dev, open, bench;
    std::string dl, df, bench_manifest;
};

std::vector<activation_record> read_all(const std::vector<std::string>& paths, uint32_t& d) {
    std::vector<activation_record> out;
    for (auto& p : paths) {
        auto recs = read_shard(p);
        for (auto& r : recs) {
            if (d == 0) d = uint32_t(r.vec.size());
            if (r.vec.size() != d)
                throw error(p + ": dimension mismatch (" + std::to_string(r.vec.size()) + " vs " +
                            std::to_string(d) + ")");
        }
        out.insert(out.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
    }
    return out;
}

int do_ingest(const pipeline_config& c, const layout& l, const ingest_args& a) {
    uint32_t d = 0;
    shard_set dev;
    dev.add_all(read_all(a.dev, d));
    auto open = read_all(a.open, d);
    auto dl = layer_loc_pairs(read_manifest(a.dl));
    auto df = contrastive_pairs(read_manifest(a.df));
    auto layers = dev.layers();
    auto check = [&](uint64_t id, const std::string& what) {
        for (auto layer : layers)
            if (!dev.last_token(id, layer))
                throw error(what + ": prompt " + std::to_string(id) + " has no record at layer " +
                            std::to_string(layer));
    };
    for (auto& p : dl) check(p.m, "D_l"), check(p.n, "D_l");
    for (auto& p : df) check(p.u, "D_f"), check(p.v, "D_f");

    fs::create_directories(l.shards);
    fs::create_directories(l.manifests);
    ojson files;
    auto s1 = write_shard(dev.records, l.shard("dev"));
    auto s2 = write_shard(open, l.shard("open"));
    files["dev"] = {{"records", s1.count}, {"d_model", s1.d_model}, {"checksum", hex(s1.checksum)}};
    files["open"] = {{"records", s2.count}, {"d_model", s2.d_model}, {"checksum", hex(s2.checksum)}};
    write_manifest(to_manifest(dl), l.manifest("dl"));
    write_manifest(to_manifest(df), l.manifest("df"));
    if (!a.bench.empty()) {
        auto bench = read_all(a.bench, d);
        auto s3 = write_shard(bench, l.shard("bench"));
        files["bench"] = {{"records", s3.count}, {"d_model", s3.d_model}, {"checksum", hex(s3.checksum)}};
        if (!a.bench_manifest.empty()) write_manifest(read_manifest(a.bench_manifest), l.manifest("bench"));
    }
    ojson body;
    body["shards"] = files;
    body["layer_pairs"] = dl.size();
    body["contrastive_pairs"] = df.size();
    auto path = write_report(l, "ingest", c, body);
    std::printf("ingest: d_model %u, %zu D_l pairs, %zu D_f pairs\nreport %s\n", d, dl.size(), df.size(),
                path.c_str());
    return 0;
}

int do_locate_layer(const pipeline_config& c, const layout& l) {
    auto dev = load_set(l.shard("dev"), "gen");
    need(l.manifest("dl"), "gen");
    auto dl = layer_loc_pairs(read_manifest(l.manifest("dl")));
    std::vector<int> layers;
    for (auto x : dev.layers()) layers.push_back(x);
    auto ranking = rank_layers(dev, dl, layers, c.probe, c.probe_seed);
    ojson rk = ojson::array();
    for (auto& r : ranking) rk.push_back(to_json(r));
    fs::create_directories(l.checkpoints);
    ojson ck;
    ck["layer"] = ranking.front().layer_index;
    ck["ranking"] = rk;
    write_file_atomic(l.ckpt("layer.json"), ck.dump(2) + "\n");
    auto path = write_report(l, "locate-layer", c, ojson{{"layer", ranking.front().layer_index}, {"ranking", rk}});
    std::printf("layer  test_acc  train_acc\n");
    for (auto& r : ranking) std::printf("%5d  %8.4f  %9.4f\n", r.layer_index, r.test_accuracy, r.train_accuracy);
    std::printf("top-1 layer %d\nreport %s\n", ranking.front().layer_index, path.c_str());
    return 0;
}

int do_train_sae(const pipeline_config& c, const layout& l) {
    int layer = located_layer(c, l);
    need(l.shard("open"), "gen");
    auto open = read_shard(l.shard("open"));
    auto res = train_sae(c, open, layer);
    ojson body;
    body["layer"] = layer;
    body["report"] = to_json(res.report);
    if (res.report.diverged) {
        auto path = write_report(l, "train-sae", c, body);
        std::fprintf(stderr, "train-sae: %s (report %s)\n", res.report.message.c_str(), path.c_str());
        return 1;
    }
    fs::create_directories(l.checkpoints);
    save_checkpoint(res.params, l.ckpt("sae.ckpt"));
    body["checkpoint"] = sae_ref(l);
    auto path = write_report(l, "train-sae", c, body);
    std::printf("train-sae: layer %d, loss %.6f -> %.6f, nmse %.4f, dead features %d\nreport %s\n", layer,
                res.report.initial_loss, res.report.final_loss, res.report.final_nmse, res.report.dead_features,
                path.c_str());
    return 0;
}

int do_locate_features(const pipeline_config& c, const layout& l) {
    auto sae = load_sae(l);
    int layer = located_layer(c, l);
    auto dev = load_set(l.shard("dev"), "gen");
    need(l.manifest("df"), "gen");
    auto df = contrastive_pairs(read_manifest(l.manifest("df")));
    auto lf = locate_features(c, sae, dev, df, layer, sae_ref(l));
    write_spec(lf.spec, l.ckpt("spec.bin"));
    ojson body;
    body["layer"] = layer;
    body["t"] = c.features.t;
    body["indices"] = lf.spec.indices;
    body["top_features"] = top_features_report(sae, dev, df, layer, lf.g, c.features.top_n);
    auto path = write_report(l, "locate-features", c, body);
    std::printf("locate-features: |I| = %zu at t = %g\n", lf.spec.indices.size(), c.features.t);
    for (int i : lf.spec.indices) std::printf("  feature %4d  g %.4f\n", i, lf.g[i]);
    std::printf("report %s\n", path.c_str());
    return 0;
}

int do_steer(const pipeline_config& c, const layout& l, const std::string& in, const std::string& out) {
    auto sae = load_sae(l);
    auto lf = load_located(l);
    lf.spec.strength = c.steering.alpha;
    steering_session s(sae, lf.spec, c.steering.passthrough, c.steering.last_token_only);

    std::string bytes;
    if (in == "-")
        bytes.assign(std::istreambuf_iterator<char>(std::cin), {});
    else
        bytes = read_file(in);
    auto recs = decode_shard(bytes);

    // last token per prompt at the steered layer; other layers pass through untouched
    std::map<uint64_t, uint32_t> last;
    for (auto& r : recs)
        if (r.layer_index == s.spec.layer) {
            auto [it, fresh] = last.emplace(r.prompt_id, r.token_position);
            if (!fresh) it->second = std::max(it->second, r.token_position);
        }
    for (auto& r : recs) {
        if (r.layer_index != s.spec.layer) continue;
        if (s.last_token_only && r.token_position != last[r.prompt_id]) continue;
        std::vector<double> h(r.vec.begin(), r.vec.end());
        auto h2 = steer_hidden_state(s, h);
        r.vec.assign(h2.begin(), h2.end());
    }
    auto encoded = encode_shard(recs);
    if (out == "-") {
        std::fwrite(encoded.data(), 1, encoded.size(), stdout);
        std::fflush(stdout);
    } else {
        write_file_atomic(out, encoded);
    }
    std::fprintf(stderr, "steer: layer %d, %llu of %llu tokens steered\n", s.spec.layer,
                 (unsigned long long)s.stats.tokens_steered.load(), (unsigned long long)s.stats.tokens_seen.load());
    return 0;
}

struct eval_inputs {
    planted_world world;
    shard_set bench;
    std::vector<group_ref> groups;
    sae_params sae;
    located_features lf;
};

eval_inputs load_eval(const pipeline_config& c, const layout& l) {
    eval_inputs e;
    e.world = load_world(c, l);
    e.sae = load_sae(l);
    e.lf = load_located(l);
    e.lf.spec.strength = c.steering.alpha;
    e.bench = load_set(l.shard("bench"), "gen");
    need(l.manifest("bench"), "gen");
    e.groups = bench_groups_from(read_manifest(l.manifest("bench")));
    return e;
}

int do_evaluate(const pipeline_config& c, const layout& l) {
    auto e = load_eval(c, l);
    auto base = evaluate_bench(c, e.world, e.bench, e.groups, nullptr);
    steering_session s(e.sae, e.lf.spec, c.steering.passthrough, c.steering.last_token_only);
    auto steered = evaluate_bench(c, e.world, e.bench, e.groups, &s);
    auto ood = evaluate_ood(c, e.world, s);
    ojson body;
    body["layer"] = e.lf.spec.layer;
    body["n_features"] = e.lf.spec.indices.size();
    body["alpha"] = c.steering.alpha;
    body["baseline"] = to_json(base);
    body["steered"] = to_json(steered);
    body["ood"] = to_json(ood);
    auto path = write_report(l, "evaluate", c, body);
    print_bench("baseline", base);
    print_bench("steered", steered);
    std::printf("fixed %d of %d previously wrong variants\n", steered.fixed, steered.previously_wrong);
    std::printf("ood       acc %.4f -> %.4f  delta %+.4f%s\n", ood.before, ood.after, ood.loc.delta,
                ood.loc.flagged ? "  FLAGGED" : "");
    std::printf("report %s\n", path.c_str());
    return 0;
}

int do_sweep(const pipeline_config& c, const layout& l) {
    auto e = load_eval(c, l);
    auto rows = sweep_param(c, e.world, e.bench, e.groups, e.sae, e.lf, c.sweep.param, c.sweep.values);
    auto path = write_report(l, "sweep", c, ojson{{"param", c.sweep.param}, {"rows", to_json(rows)}});
    std::printf("%8s  %4s  %8s  %8s  %11s\n", c.sweep.param.c_str(), "|I|", "accuracy", "std", "consistency");
    int failed = 0;
    for (auto& r : rows) {
        if (r.ok)
            std::printf("%8g  %4d  %8.4f  %8.4f  %11.4f\n", r.value, r.point.n_features, r.point.accuracy,
                        r.point.std, r.point.consistency);
        else
            std::printf("%8g  failed: %s\n", r.value, r.error.c_str()), ++failed;
    }
    std::printf("report %s\n", path.c_str());
    return failed ? 1 : 0;
}

int do_ablate(const pipeline_config& c, const layout& l) {
    dataset ds;
    auto e = load_eval(c, l);
    ds.world = std::move(e.world);
    ds.bench = std::move(e.bench);
    ds.bench_groups = std::move(e.groups);
    ds.dev = load_set(l.shard("dev"), "gen");
    need(l.manifest("df"), "gen");
    ds.df = contrastive_pairs(read_manifest(l.manifest("df")));
    ojson body;
    std::printf("%-16s  %5s  %4s  %8s  %8s\n", "run", "layer", "|I|", "accuracy", "std");
    for (auto& mode : c.ablate.modes) {
        auto rows = ablate(c, ds, e.sae, e.lf, mode, c.ablate.seed);
        body[mode] = to_json(rows);
        for (auto& r : rows)
            std::printf("%-16s  %5d  %4d  %8.4f  %8.4f\n", r.name.c_str(), r.layer, r.n_features, r.accuracy,
                        r.std);
    }
    auto path = write_report(l, "ablate", c, body);
    std::printf("report %s\n", path.c_str());
    return 0;
}

int do_report(const pipeline_config& c, const layout& l) {
    const char* stages[] = {"gen", "ingest", "locate-layer", "train-sae", "locate-features",
                            "evaluate", "sweep", "ablate"};
    ojson all;
    int found = 0;
    for (auto* s : stages) {
        std::string p = l.reports + "/" + s + "-" + config_hash(c) + ".json";
        if (!fs::exists(p)) continue;
        auto j = ojson::parse(read_file(p));
        j.erase("config");
        j.erase("config_hash");
        j.erase("stage");
        all[s] = j;
        ++found;
        std::printf("%-16s %s\n", s, p.c_str());
    }
    if (!found) throw missing_stage("no reports for config " + config_hash(c) + ": run `gen` first");
    auto path = write_report(l, "summary", c, ojson{{"stages", all}});
    std::printf("report %s\n", path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lfsteer: locate and steer consistency features with a sparse autoencoder"};
    app.require_subcommand(0, 1);
    std::string config_path;
    std::optional<uint64_t> seed_override;
    std::string out_dir;
    std::optional<bool> deterministic;
    bool print_config = false;
    app.add_option("--config", config_path, "pipeline config (json)")->check(CLI::ExistingFile);
    app.add_option("--seed-override", seed_override, "replace the top-level seed");
    app.add_option("--out-dir", out_dir, "root for shards, manifests, checkpoints and reports");
    app.add_flag("--deterministic,!--no-deterministic", deterministic, "fixed-order parallel reductions");
    app.add_flag("--print-config", print_config, "print the normalized config and exit");

    auto* gen = app.add_subcommand("gen", "generate the planted world and its datasets");
    ingest_args ia;
    auto* ingest = app.add_subcommand("ingest", "validate external shards and manifests and copy them in");
    ingest->add_option("--dev", ia.dev, "shards holding the D_l and D_f prompts")->required();
    ingest->add_option("--open", ia.open, "D_o shards for SAE training")->required();
    ingest->add_option("--dl", ia.dl, "layer-locating manifest")->required();
    ingest->add_option("--df", ia.df, "contrastive manifest")->required();
    ingest->add_option("--bench", ia.bench, "evaluation shards");
    ingest->add_option("--bench-manifest", ia.bench_manifest, "evaluation groups manifest");
    auto* ll = app.add_subcommand("locate-layer", "rank layers by probe accuracy");
    auto* ts = app.add_subcommand("train-sae", "train the TopK SAE on D_o at the located layer");
    auto* lfc = app.add_subcommand("locate-features", "average feature differences over D_f and select I");
    std::string steer_in = "-", steer_out = "-";
    auto* st = app.add_subcommand("steer", "steer an ACTV1 stream at the located layer");
    st->add_option("--input", steer_in, "ACTV1 file, or - for stdin");
    st->add_option("--output", steer_out, "ACTV1 file, or - for stdout");
    auto* ev = app.add_subcommand("evaluate", "baseline vs steered accuracy, consistency and locality");
    std::string sweep_param_name;
    std::vector<double> sweep_values;
    auto* sw = app.add_subcommand("sweep", "sweep t or alpha");
    sw->add_option("--param", sweep_param_name, "t or alpha");
    sw->add_option("--values", sweep_values, "values to try, comma separated")->delimiter(',');
    std::vector<std::string> ablate_modes;
    auto* ab = app.add_subcommand("ablate", "compare located features with random features / a random layer");
    ab->add_option("--mode", ablate_modes, "random_features, random_layer")->delimiter(',');
    auto* rp = app.add_subcommand("report", "collect every stage report for this config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors share the config-error code
    }

    try {
        nlohmann::json j = nlohmann::json::object();
        if (!config_path.empty()) {
            try {
                j = nlohmann::json::parse(read_file(config_path));
            } catch (const nlohmann::json::parse_error& e) {
                throw config_error({config_path + ": " + e.what()});
            }
        }
        if (sw->parsed()) {
            if (!sweep_param_name.empty()) {
                j["sweep"]["param"] = sweep_param_name;
                if (sweep_values.empty()) j["sweep"].erase("values");
            }
            if (!sweep_values.empty()) j["sweep"]["values"] = sweep_values;
        }
        if (ab->parsed() && !ablate_modes.empty()) j["ablate"]["modes"] = ablate_modes;
        if (deterministic) j["deterministic"] = *deterministic;
        auto c = validate_config(j, seed_override ? &*seed_override : nullptr);
        c.paths.out_dir = !out_dir.empty() ? out_dir : env_or("LFS_OUT_DIR", c.paths.out_dir);
        if (fs::exists(c.paths.out_dir) && !fs::is_directory(c.paths.out_dir))
            throw error("paths.out_dir: " + c.paths.out_dir + " is not a directory");

        if (print_config) {
            auto cj = config_to_json(c);
            auto l = resolve_layout(c);
            cj["paths"] = {{"out_dir", c.paths.out_dir},
                           {"shards", l.shards},
                           {"manifests", l.manifests},
                           {"checkpoints", l.checkpoints},
                           {"reports", l.reports}};
            std::cout << cj.dump(2) << "\n";
            return 0;
        }
        auto l = resolve_layout(c);
        if (gen->parsed()) return do_gen(c, l);
        if (ingest->parsed()) return do_ingest(c, l, ia);
        if (ll->parsed()) return do_locate_layer(c, l);
        if (ts->parsed()) return do_train_sae(c, l);
        if (lfc->parsed()) return do_locate_features(c, l);
        if (st->parsed()) return do_steer(c, l, steer_in, steer_out);
        if (ev->parsed()) return do_evaluate(c, l);
        if (sw->parsed()) return do_sweep(c, l);
        if (ab->parsed()) return do_ablate(c, l);
        if (rp->parsed()) return do_report(c, l);
        std::cerr << app.help() << "\n";
        return 2;
    } catch (const config_error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const missing_stage& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
