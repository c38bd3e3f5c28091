#pragma once

#include <vector>

#include "lfs/store.hpp"

namespace lfs {

struct probe_config {
    int train_part = 4, test_part = 1;
    double learning_rate = 0.5;
    double l2 = 0.01;
    int max_iters = 3000;
    // stop once the training loss improves by less than tol over `patience` iterations
    double tol = 1e-7;
    int patience = 50;
};

struct probe_result {
    int layer_index = -1;
    double test_accuracy = 0, train_accuracy = 0;
    std::vector<double> weights;  // over standardized inputs
    double bias = 0;
    std::vector<double> mean;  // standardization fitted on the training split
    double scale = 1;
    int iterations = 0;
};

// [h(m); h(n)] from last-token records
std::vector<double> build_pair_features(const shard_set& shards, const layer_loc_pair& pair, int layer);

probe_result train_probe(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                         const probe_config& cfg, uint64_t seed);

// one probe per expected layer, sorted by test accuracy desc, ties to the lower layer
std::vector<probe_result> rank_layers(const shard_set& shards, const std::vector<layer_loc_pair>& pairs,
                                      const std::vector<int>& layers, const probe_config& cfg,
                                      uint64_t seed);

}  // namespace lfs
