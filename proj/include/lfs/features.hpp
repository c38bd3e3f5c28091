#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "lfs/sae.hpp"
#include "lfs/store.hpp"

namespace lfs {

enum class diff_mode { absolute, signed_diff };

struct steering_spec {
    std::vector<int> indices;  // I, ascending
    std::vector<double> bias;  // g, length F
    double threshold = 0.1;
    double strength = 20;
    int layer = -1;
    std::string sae_checkpoint_ref;
    diff_mode mode = diff_mode::absolute;
};

std::vector<double> last_token_features(const sae_params& p, const shard_set& shards, uint64_t prompt_id,
                                        int layer);

// mean over pairs of |z(u) - z(v)| (or z(u) - z(v) in signed mode); zu/zv are n rows of F
std::vector<double> feature_diff(const std::vector<double>& zu, const std::vector<double>& zv, int n, int F,
                                 diff_mode mode = diff_mode::absolute);
std::vector<double> avg_feature_diff(const sae_params& p, const shard_set& shards,
                                     const std::vector<contrastive_pair>& pairs, int layer,
                                     diff_mode mode = diff_mode::absolute);

// I = { i : g_i > t }. warns on stderr when nothing passes
std::vector<int> select_key_features(const std::vector<double>& g, double t, bool quiet = false);

// header line of json, then F little-endian f32 bias values
std::string encode_spec(const steering_spec& s);
steering_spec decode_spec(std::string_view bytes);
void write_spec(const steering_spec& s, const std::string& path);
steering_spec read_spec(const std::string& path);

// top-n features by g with the prompts that activate each most strongly
nlohmann::ordered_json top_features_report(const sae_params& p, const shard_set& shards,
                                           const std::vector<contrastive_pair>& pairs, int layer,
                                           const std::vector<double>& g, int top_n, int per_feature = 3);

}  // namespace lfs
