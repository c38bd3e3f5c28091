#pragma once

#include <functional>
#include <string>
#include <vector>

namespace lfs {

struct eval_group {
    uint64_t group_id = 0;
    int gold = 0;
    std::vector<int> predictions;                  // one per variant slot
    std::vector<std::vector<double>> embeddings;  // optional, one per slot
};

struct eval_set {
    std::vector<eval_group> groups;
};

struct slot_accuracy {
    double mean = 0;
    double std = 0;  // population std over slots
    std::vector<double> slots;
};

slot_accuracy accuracy_and_std(const eval_set& s);
double mean_pairwise_cosine(const eval_set& s);

struct metric {
    std::string dataset;
    std::string kind;  // e.g. "accuracy"
    double value = 0;
};

struct locality_report {
    std::string dataset, kind;
    double before = 0, after = 0, delta = 0;
    bool flagged = false;  // delta < -tolerance
};

locality_report locality_delta(const metric& before, const metric& after, double tolerance);

struct sweep_point {
    int n_features = 0;
    double accuracy = 0, std = 0, consistency = 0;
};

struct sweep_row {
    double value = 0;
    bool ok = false;
    std::string error;
    sweep_point point;
};

// runs fn per value; a failing value is recorded and the sweep moves on
std::vector<sweep_row> sweep(const std::vector<double>& values, const std::function<sweep_point(double)>& fn);

}  // namespace lfs
