#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "vbx/radiomics.hpp"
#include "vbx/rng.hpp"

namespace vbx {

// Embedding followed by the radiomics descriptors, in their fixed order.
std::vector<double> fuse(const std::vector<double>& embedding, const RadiomicsVector& radiomics);

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<std::int64_t> class_counts; // populated for leaves
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // node 0 is the root

    // Class predicted by the leaf this sample routes to (argmax of leaf
    // counts, lowest class on ties).
    int predict(const std::vector<double>& x) const;
};

struct TreeParams {
    int max_depth = 0;          // 0 = unlimited
    int min_samples_split = 2;
    int max_features = 0;       // 0 = all features
};

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 0;          // 0 = unlimited
    int min_samples_split = 2;
    int max_features = 0;       // 0 = ceil(sqrt(d))
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

struct ForestModel {
    ForestConfig config;
    int n_features = 0;
    int n_classes = 0;
    std::vector<DecisionTree> trees;
    std::vector<double> feature_importances; // sums to 1 when any split exists
};

// CART with greedy Gini-decrease splits. Candidate features are
// `max_features` distinct indices drawn per node; thresholds are midpoints
// between consecutive distinct sorted values. Ties in impurity decrease go to
// the lowest feature index, then the lowest threshold. `importance_accum`,
// when given, receives per-feature impurity decreases weighted by the node
// sample fraction.
DecisionTree fit_tree(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                      int n_classes, const TreeParams& params, Rng& rng,
                      std::vector<double>* importance_accum = nullptr);

// Each tree trains on a bootstrap resample (same size, with replacement)
// using the substream derive_seed(config.seed, "tree", index), so parallel
// and sequential fits agree. Importances are accumulated over all trees and
// normalized once.
ForestModel fit_forest(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                       int n_classes, const ForestConfig& config);

struct ForestPrediction {
    int class_index = 0;
    std::vector<std::int64_t> votes;
};

// Majority vote over trees; ties go to the lowest class index.
ForestPrediction predict(const ForestModel& model, const std::vector<double>& x);

// Per-class vote fractions, usable as ROC scores.
std::vector<double> vote_fractions(const ForestModel& model, const std::vector<double>& x);

nlohmann::json forest_to_json(const ForestModel& model);
ForestModel forest_from_json(const nlohmann::json& j);

} // namespace vbx
