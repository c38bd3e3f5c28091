#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lfs/common.hpp"

namespace lfs {

struct activation_record {
    uint64_t prompt_id = 0;
    uint16_t layer_index = 0;
    uint32_t token_position = 0;
    std::vector<float> vec;

    bool operator==(const activation_record& o) const {
        return prompt_id == o.prompt_id && layer_index == o.layer_index &&
               token_position == o.token_position && vec == o.vec;
    }
};

struct shard_summary {
    uint64_t count = 0;
    uint32_t d_model = 0;
    uint64_t checksum = 0;  // fnv1a over the file bytes
};

constexpr size_t shard_header_bytes = 24;
inline size_t shard_record_bytes(uint32_t d) { return 14 + 4 * size_t(d); }

std::string encode_shard(const std::vector<activation_record>& recs);
std::vector<activation_record> decode_shard(std::string_view bytes);

shard_summary write_shard(const std::vector<activation_record>& recs, const std::string& path);
std::vector<activation_record> read_shard(const std::string& path);

// write to a sibling temp file, then rename over the target
void write_file_atomic(const std::string& path, std::string_view bytes);
std::string read_file(const std::string& path);

// manifests: one json object per line, {"kind":..,"ids":[..],"label":..}
struct manifest_record {
    std::string kind;
    std::vector<uint64_t> ids;
    int label = -1;  // -1 when the record carries none
};

void write_manifest(const std::vector<manifest_record>& recs, const std::string& path);
std::vector<manifest_record> read_manifest(const std::string& path);

struct layer_loc_pair {
    uint64_t m = 0, n = 0;
    int label = 0;
};

struct contrastive_pair {
    uint64_t u = 0, v = 0;
};

std::vector<manifest_record> to_manifest(const std::vector<layer_loc_pair>& p);
std::vector<manifest_record> to_manifest(const std::vector<contrastive_pair>& p);
std::vector<layer_loc_pair> layer_loc_pairs(const std::vector<manifest_record>& m);
std::vector<contrastive_pair> contrastive_pairs(const std::vector<manifest_record>& m);

// floor-based split, remainder to train; returns index lists into the input
std::pair<std::vector<size_t>, std::vector<size_t>> split_indices(size_t n, int train_part,
                                                                  int test_part, uint64_t seed);

template <class T>
std::pair<std::vector<T>, std::vector<T>> split_train_test(const std::vector<T>& items,
                                                           int train_part, int test_part,
                                                           uint64_t seed) {
    auto [a, b] = split_indices(items.size(), train_part, test_part, seed);
    std::pair<std::vector<T>, std::vector<T>> out;
    for (auto i : a) out.first.push_back(items[i]);
    for (auto i : b) out.second.push_back(items[i]);
    return out;
}

// lookup over a set of shards by (prompt, layer), last token wins
struct shard_set {
    uint32_t d_model = 0;
    std::vector<activation_record> records;
    std::map<std::pair<uint64_t, uint16_t>, size_t> last;

    void add(activation_record r);
    void add_all(std::vector<activation_record> rs);
    const activation_record* last_token(uint64_t prompt_id, uint16_t layer) const;
    std::set<uint16_t> layers() const;
};

}  // namespace lfs
