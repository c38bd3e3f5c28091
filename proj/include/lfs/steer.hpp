#pragma once

#include <atomic>
#include <span>
#include <vector>

#include "lfs/features.hpp"
#include "lfs/sae.hpp"

namespace lfs {

// z'_i = z_i + strength * g_i for i in I with z_i != 0
std::vector<double> steer_features(std::span<const double> z, const steering_spec& spec);

struct steer_stats {
    std::atomic<uint64_t> tokens_seen{0};
    std::atomic<uint64_t> tokens_steered{0};    // tokens whose support meets I
    std::atomic<uint64_t> features_touched{0};  // total boosted (token, feature) pairs
};

struct steering_session {
    sae_params sae;
    steering_spec spec;
    bool residual_passthrough = true;
    bool last_token_only = false;
    std::vector<char> in_I;
    mutable steer_stats stats;

    steering_session(sae_params p, steering_spec s, bool passthrough = true, bool last_only = false);
};

std::vector<double> steer_hidden_state(const steering_session& s, std::span<const double> h);

// per-token stream at one layer; order preserving
std::vector<std::vector<float>> host_hook(const steering_session& s, int layer_index,
                                          const std::vector<std::vector<float>>& tokens);

}  // namespace lfs
