#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "lfs/eval.hpp"
#include "lfs/features.hpp"
#include "lfs/probe.hpp"
#include "lfs/sae.hpp"
#include "lfs/steer.hpp"
#include "lfs/store.hpp"
#include "lfs/world.hpp"

namespace lfs {

using ojson = nlohmann::ordered_json;

struct data_config {
    int n_open = 32768;  // D_o records per layer
    int n_layer_pairs = 500;
    int n_contrastive = 500;
    int n_eval_groups = 400;
    int n_ood = 1000;
};

struct sae_section {
    int F = 256;
    int k = 8;
    int layer = -1;  // -1: use the located layer
    train_config train;
};

struct features_section {
    double t = 0.1;
    diff_mode mode = diff_mode::absolute;
    int top_n = 10;
};

struct steering_section {
    double alpha = 20;
    bool passthrough = true;
    bool last_token_only = false;
};

struct eval_section {
    double ood_max_cos = 0.2;  // OOD features must stay below this cosine to every decoder column in I
    double locality_tolerance = 0.02;
};

struct sweep_section {
    std::string param = "t";
    std::vector<double> values;  // empty: default grid for the parameter
};

struct ablate_section {
    std::vector<std::string> modes{"random_features", "random_layer"};
    uint64_t seed = 0;
};

struct path_section {
    std::string out_dir = "lfs-run";
    std::string shards, manifests, checkpoints, reports;  // default under out_dir
};

struct pipeline_config {
    uint64_t seed = 7;
    bool deterministic = true;
    world_config world;
    data_config data;
    sae_section sae;
    probe_config probe;
    uint64_t probe_seed = 0;
    features_section features;
    steering_section steering;
    eval_section eval;
    sweep_section sweep;
    ablate_section ablate;
    path_section paths;
};

struct config_error : error {
    std::vector<std::string> errors;
    explicit config_error(std::vector<std::string> e);
};

// fills defaults, derives unset seeds from the top-level seed, checks types and ranges.
// every reported error carries its field path
pipeline_config validate_config(const nlohmann::json& j, const uint64_t* seed_override = nullptr);
pipeline_config default_config(uint64_t seed = 7);
// normalized config without paths; this is what reports echo and what the hash covers
ojson config_to_json(const pipeline_config& c);
std::string config_hash(const pipeline_config& c);

std::vector<double> default_sweep_values(const std::string& param);

// ---- data ----

struct group_ref {
    uint64_t group_id = 0;
    int gold = 0;
    int n_slots = 0;
};

struct dataset {
    planted_world world;
    shard_set dev;  // prompts referenced by D_l and D_f, every layer
    std::vector<layer_loc_pair> dl;
    std::vector<contrastive_pair> df;
    shard_set bench;
    std::vector<group_ref> bench_groups;
    std::vector<activation_record> open;  // D_o, every layer
};

enum pool : uint64_t { pool_layerloc = 1, pool_contrastive = 2, pool_bench = 3, pool_open = 4 };
inline uint64_t pool_group(pool p, uint64_t i) { return (uint64_t(p) << 32) | i; }

dataset generate_dataset(const pipeline_config& c);

std::vector<manifest_record> bench_manifest(const std::vector<group_ref>& g);
std::vector<group_ref> bench_groups_from(const std::vector<manifest_record>& m);

// ---- stages ----

std::vector<int> all_layers(const pipeline_config& c);
std::vector<probe_result> locate_layer(const pipeline_config& c, const shard_set& dev,
                                       const std::vector<layer_loc_pair>& dl);

// rows of D_o at one layer, as doubles
std::vector<double> open_rows(const std::vector<activation_record>& open, int layer, int& n);
train_result train_sae(const pipeline_config& c, const std::vector<activation_record>& open, int layer);

struct located_features {
    std::vector<double> g;
    steering_spec spec;
};
located_features locate_features(const pipeline_config& c, const sae_params& sae, const shard_set& dev,
                                 const std::vector<contrastive_pair>& df, int layer,
                                 const std::string& ckpt_ref = "");

steering_spec with_features(const steering_spec& base, const std::vector<double>& g, double t);

struct bench_eval {
    slot_accuracy acc;
    double consistency = 0;
    int previously_wrong = 0, fixed = 0;  // variants wrong before steering, and how many steering fixed
    uint64_t tokens_steered = 0;
};

// predictions come from the signal layer; steering is applied at spec.layer
bench_eval evaluate_bench(const pipeline_config& c, const planted_world& w, const shard_set& bench,
                          const std::vector<group_ref>& groups, const steering_session* s);

// argmax-cosine latent for every planted feature
std::vector<int> match_latents(const planted_world& w, const sae_params& sae);
double mean_max_cosine(const planted_world& w, const sae_params& sae);

struct ood_eval {
    double before = 0, after = 0;
    int flips = 0, n = 0;
    int evidence_pool = 0, nuisance_pool = 0;
    locality_report loc;
};
ood_eval evaluate_ood(const pipeline_config& c, const planted_world& w, const steering_session& s);

std::vector<sweep_row> sweep_param(const pipeline_config& c, const planted_world& w, const shard_set& bench,
                                   const std::vector<group_ref>& groups, const sae_params& sae,
                                   const located_features& lf, const std::string& param,
                                   const std::vector<double>& values);

struct ablation_row {
    std::string name;
    int layer = -1;
    int n_features = 0;
    double accuracy = 0, std = 0;
};
std::vector<ablation_row> ablate(const pipeline_config& c, const dataset& data, const sae_params& sae,
                                 const located_features& lf, const std::string& mode, uint64_t seed);

// everything in memory, no files
struct pipeline_run {
    dataset data;
    std::vector<probe_result> ranking;
    int layer = -1;
    train_result sae;
    located_features located;
    bench_eval base, steered;
    ood_eval ood;
};
pipeline_run run_pipeline(const pipeline_config& c);

// ---- report json ----
ojson to_json(const probe_result& r);
ojson to_json(const slot_accuracy& a);
ojson to_json(const bench_eval& e);
ojson to_json(const ood_eval& e);
ojson to_json(const std::vector<sweep_row>& rows);
ojson to_json(const std::vector<ablation_row>& rows);
ojson to_json(const train_report& r);

}  // namespace lfs
