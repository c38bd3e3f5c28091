#include "lfs/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "lfs/kernels.hpp"

namespace lfs {

std::vector<double> last_token_features(const sae_params& p, const shard_set& shards, uint64_t prompt_id,
                                        int layer) {
    auto* r = shards.last_token(prompt_id, layer);
    if (!r)
        throw error("missing record: prompt " + std::to_string(prompt_id) + " at layer " +
                    std::to_string(layer));
    return encode(p, std::span<const float>(r->vec));
}

std::vector<double> feature_diff(const std::vector<double>& zu, const std::vector<double>& zv, int n, int F,
                                 diff_mode mode) {
    if (n <= 0) throw error("avg_feature_diff: empty pair set");
    if (zu.size() != size_t(n) * F || zv.size() != size_t(n) * F)
        throw error("avg_feature_diff: dimension mismatch");
    std::vector<double> g(F);
    kern::par::feature_diff(zu.data(), zv.data(), n, F, mode == diff_mode::signed_diff, g.data());
    return g;
}

namespace {

// dense codes for a list of prompts
std::vector<double> dense_codes(const sae_params& p, const shard_set& shards, const std::vector<uint64_t>& ids,
                                int layer) {
    const int d = p.d_model, n = ids.size();
    std::vector<double> x(size_t(n) * d);
    for (int i = 0; i < n; ++i) {
        auto* r = shards.last_token(ids[i], layer);
        if (!r)
            throw error("missing record: prompt " + std::to_string(ids[i]) + " at layer " +
                        std::to_string(layer));
        if (int(r->vec.size()) != d) throw error("dimension mismatch between shard and sae");
        for (int j = 0; j < d; ++j) x[size_t(i) * d + j] = r->vec[j];
    }
    if (!all_finite(x.data(), x.size())) throw error("non-finite activation");
    std::vector<int> idx(size_t(n) * p.k);
    std::vector<double> val(size_t(n) * p.k), z(size_t(n) * p.F, 0.0);
    kern::par::encode_batch(p, x.data(), n, idx.data(), val.data());
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < p.k; ++a) z[size_t(i) * p.F + idx[size_t(i) * p.k + a]] = val[size_t(i) * p.k + a];
    return z;
}

}  // namespace

std::vector<double> avg_feature_diff(const sae_params& p, const shard_set& shards,
                                     const std::vector<contrastive_pair>& pairs, int layer, diff_mode mode) {
    if (pairs.empty()) throw error("avg_feature_diff: empty pair set");
    std::vector<uint64_t> us, vs;
    for (auto& q : pairs) {
        if (q.u == q.v) throw error("contrastive pair references the same prompt twice");
        us.push_back(q.u);
        vs.push_back(q.v);
    }
    auto zu = dense_codes(p, shards, us, layer), zv = dense_codes(p, shards, vs, layer);
    return feature_diff(zu, zv, pairs.size(), p.F, mode);
}

std::vector<int> select_key_features(const std::vector<double>& g, double t, bool quiet) {
    if (!(t > 0)) throw error("threshold t must be positive");
    std::vector<int> I;
    for (size_t i = 0; i < g.size(); ++i)
        if (g[i] > t) I.push_back(i);
    if (I.empty() && !quiet) std::fprintf(stderr, "warning: no feature exceeds t=%g, steering will be a no-op\n", t);
    return I;
}

std::string encode_spec(const steering_spec& s) {
    nlohmann::ordered_json h;
    h["format"] = "lfs-steering-spec";
    h["version"] = 1;
    h["F"] = s.bias.size();
    h["layer"] = s.layer;
    h["threshold"] = s.threshold;
    h["strength"] = s.strength;
    h["mode"] = s.mode == diff_mode::absolute ? "absolute" : "signed";
    h["sae_checkpoint"] = s.sae_checkpoint_ref;
    h["indices"] = s.indices;
    std::string out = h.dump() + "\n";
    for (double x : s.bias) {
        float f = float(x);
        uint32_t u;
        std::memcpy(&u, &f, 4);
        for (int i = 0; i < 4; ++i) out.push_back(char((u >> (8 * i)) & 0xff));
    }
    return out;
}

steering_spec decode_spec(std::string_view bytes) {
    auto nl = bytes.find('\n');
    if (nl == std::string_view::npos) throw error("steering spec: missing header line");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(bytes.substr(0, nl));
    } catch (const nlohmann::json::exception& e) {
        throw error(std::string("steering spec: bad header: ") + e.what());
    }
    if (h.value("format", "") != "lfs-steering-spec") throw error("steering spec: bad format tag");
    steering_spec s;
    size_t F = h.at("F").get<size_t>();
    s.layer = h.at("layer").get<int>();
    s.threshold = h.at("threshold").get<double>();
    s.strength = h.at("strength").get<double>();
    s.mode = h.at("mode").get<std::string>() == "signed" ? diff_mode::signed_diff : diff_mode::absolute;
    s.sae_checkpoint_ref = h.at("sae_checkpoint").get<std::string>();
    s.indices = h.at("indices").get<std::vector<int>>();
    auto payload = bytes.substr(nl + 1);
    if (payload.size() != 4 * F) throw error("steering spec: payload size does not match F");
    auto q = reinterpret_cast<const unsigned char*>(payload.data());
    s.bias.resize(F);
    for (size_t i = 0; i < F; ++i) {
        uint32_t u = uint32_t(q[4 * i]) | uint32_t(q[4 * i + 1]) << 8 | uint32_t(q[4 * i + 2]) << 16 |
                     uint32_t(q[4 * i + 3]) << 24;
        float f;
        std::memcpy(&f, &u, 4);
        if (!std::isfinite(f)) throw error("steering spec: non-finite bias");
        s.bias[i] = f;
    }
    for (int i : s.indices)
        if (i < 0 || size_t(i) >= F) throw error("steering spec: index out of range");
    return s;
}

void write_spec(const steering_spec& s, const std::string& path) { write_file_atomic(path, encode_spec(s)); }

steering_spec read_spec(const std::string& path) { return decode_spec(read_file(path)); }

nlohmann::ordered_json top_features_report(const sae_params& p, const shard_set& shards,
                                           const std::vector<contrastive_pair>& pairs, int layer,
                                           const std::vector<double>& g, int top_n, int per_feature) {
    std::vector<uint64_t> ids;
    for (auto& q : pairs) ids.push_back(q.u), ids.push_back(q.v);
    auto z = dense_codes(p, shards, ids, layer);
    std::vector<int> order(g.size());
    for (size_t i = 0; i < g.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return g[a] > g[b]; });
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (int r = 0; r < std::min<int>(top_n, order.size()); ++r) {
        int f = order[r];
        std::vector<int> who(ids.size());
        for (size_t i = 0; i < ids.size(); ++i) who[i] = i;
        std::stable_sort(who.begin(), who.end(),
                         [&](int a, int b) { return z[size_t(a) * p.F + f] > z[size_t(b) * p.F + f]; });
        nlohmann::ordered_json e;
        e["feature"] = f;
        e["g"] = g[f];
        nlohmann::ordered_json top = nlohmann::ordered_json::array();
        for (int a = 0; a < std::min<int>(per_feature, who.size()); ++a) {
            double act = z[size_t(who[a]) * p.F + f];
            if (act <= 0) break;
            top.push_back({{"prompt_id", ids[who[a]]}, {"activation", act}});
        }
        e["top_prompts"] = top;
        out.push_back(e);
    }
    return out;
}

}  // namespace lfs
