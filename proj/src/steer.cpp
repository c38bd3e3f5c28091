#include "lfs/steer.hpp"

#include <cmath>

namespace lfs {

std::vector<double> steer_features(std::span<const double> z, const steering_spec& spec) {
    if (z.size() != spec.bias.size()) throw error("steer_features: length mismatch");
    std::vector<double> out(z.begin(), z.end());
    for (int i : spec.indices) {
        if (i < 0 || size_t(i) >= z.size()) throw error("steer_features: index out of range");
        if (z[i] != 0) out[i] += spec.strength * spec.bias[i];
    }
    return out;
}

steering_session::steering_session(sae_params p, steering_spec s, bool passthrough, bool last_only)
    : sae(std::move(p)), spec(std::move(s)), residual_passthrough(passthrough), last_token_only(last_only) {
    sae.check();
    if (spec.bias.size() != size_t(sae.F)) throw error("steering spec length does not match sae F");
    in_I.assign(sae.F, 0);
    for (int i : spec.indices) {
        if (i < 0 || i >= sae.F) throw error("steering spec index out of range");
        in_I[i] = 1;
    }
}

std::vector<double> steer_hidden_state(const steering_session& s, std::span<const double> h) {
    if (h.size() != size_t(s.sae.d_model)) throw error("steer: dimension mismatch");
    auto z = encode(s.sae, h);
    uint64_t touched = 0;
    for (int i = 0; i < s.sae.F; ++i) touched += s.in_I[i] && z[i] != 0;
    auto z2 = steer_features(z, s.spec);
    auto out = decode(s.sae, z2);
    if (s.residual_passthrough) {
        auto rec = decode(s.sae, z);
        for (size_t j = 0; j < out.size(); ++j) out[j] += h[j] - rec[j];
    }
    if (!all_finite(out.data(), out.size()))
        throw error("steer: non-finite steered state (strength " + std::to_string(s.spec.strength) + ")");
    s.stats.tokens_seen++;
    if (touched) s.stats.tokens_steered++;
    s.stats.features_touched += touched;
    return out;
}

std::vector<std::vector<float>> host_hook(const steering_session& s, int layer_index,
                                          const std::vector<std::vector<float>>& tokens) {
    if (layer_index != s.spec.layer)
        throw error("wrong layer: session steers layer " + std::to_string(s.spec.layer) + ", hook called at " +
                    std::to_string(layer_index));
    std::vector<std::vector<float>> out;
    out.reserve(tokens.size());
    for (size_t t = 0; t < tokens.size(); ++t) {
        if (s.last_token_only && t + 1 != tokens.size()) {
            out.push_back(tokens[t]);
            continue;
        }
        std::vector<double> h(tokens[t].begin(), tokens[t].end());
        auto h2 = steer_hidden_state(s, h);
        out.emplace_back(h2.begin(), h2.end());
    }
    return out;
}

}  // namespace lfs
