#include "vbx/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vbx/error.hpp"

namespace vbx {

std::vector<double> fuse(const std::vector<double>& embedding, const RadiomicsVector& radiomics) {
    std::vector<double> fused;
    fused.reserve(embedding.size() + 8);
    fused.insert(fused.end(), embedding.begin(), embedding.end());
    const auto r = radiomics.as_array();
    fused.insert(fused.end(), r.begin(), r.end());
    return fused;
}

int DecisionTree::predict(const std::vector<double>& x) const {
    int idx = 0;
    while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
        const TreeNode& node = nodes[static_cast<std::size_t>(idx)];
        idx = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    const auto& counts = nodes[static_cast<std::size_t>(idx)].class_counts;
    int best = 0;
    for (int c = 1; c < static_cast<int>(counts.size()); ++c) {
        if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = c;
    }
    return best;
}

namespace {

double gini(const std::vector<std::int64_t>& counts, std::int64_t n) {
    if (n == 0) return 0.0;
    double sum_sq = 0.0;
    for (const std::int64_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(n);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;
};

struct TreeBuilder {
    const std::vector<std::vector<double>>& X;
    const std::vector<int>& y;
    int n_classes;
    const TreeParams& params;
    Rng& rng;
    std::vector<double>* importance_accum;
    std::size_t n_root;
    DecisionTree tree;

    // Distinct candidate feature indices for one node. With max_features
    // covering all features the natural order is used and no randomness is
    // consumed, so a full-feature tree is reproducible independently of rng.
    std::vector<int> candidate_features() const {
        const int d = static_cast<int>(X[0].size());
        const int k = params.max_features > 0 ? std::min(params.max_features, d) : d;
        std::vector<int> all(static_cast<std::size_t>(d));
        std::iota(all.begin(), all.end(), 0);
        if (k >= d) return all;
        for (int i = 0; i < k; ++i) {
            const auto j = static_cast<std::size_t>(
                rng.next_below(static_cast<std::uint64_t>(d - i)) + static_cast<std::uint64_t>(i));
            std::swap(all[static_cast<std::size_t>(i)], all[j]);
        }
        all.resize(static_cast<std::size_t>(k));
        return all;
    }

    SplitChoice best_split(const std::vector<std::size_t>& indices,
                           const std::vector<std::int64_t>& counts) const {
        const auto n = static_cast<std::int64_t>(indices.size());
        const double parent_gini = gini(counts, n);

        SplitChoice best;
        std::vector<std::pair<double, int>> values(indices.size());
        std::vector<std::int64_t> left_counts(static_cast<std::size_t>(n_classes));

        for (const int f : candidate_features()) {
            for (std::size_t i = 0; i < indices.size(); ++i) {
                values[i] = {X[indices[i]][static_cast<std::size_t>(f)], y[indices[i]]};
            }
            std::sort(values.begin(), values.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::fill(left_counts.begin(), left_counts.end(), 0);
            std::int64_t n_left = 0;
            for (std::size_t i = 0; i + 1 < values.size(); ++i) {
                left_counts[static_cast<std::size_t>(values[i].second)]++;
                ++n_left;
                if (values[i].first == values[i + 1].first) continue;

                double threshold = 0.5 * (values[i].first + values[i + 1].first);
                // Midpoints can round up onto the right value; fall back so
                // the partition stays value <= threshold.
                if (threshold >= values[i + 1].first) threshold = values[i].first;

                double right_sq = 0.0, left_sq = 0.0;
                const std::int64_t n_right = n - n_left;
                for (int c = 0; c < n_classes; ++c) {
                    const double lc = static_cast<double>(left_counts[static_cast<std::size_t>(c)]);
                    const double rc = static_cast<double>(counts[static_cast<std::size_t>(c)]) - lc;
                    left_sq += lc * lc;
                    right_sq += rc * rc;
                }
                const double gini_left = 1.0 - left_sq / (static_cast<double>(n_left) * n_left);
                const double gini_right = 1.0 - right_sq / (static_cast<double>(n_right) * n_right);
                const double decrease =
                    parent_gini - (static_cast<double>(n_left) / n) * gini_left -
                    (static_cast<double>(n_right) / n) * gini_right;

                const bool better =
                    !best.found || decrease > best.decrease ||
                    (decrease == best.decrease &&
                     (f < best.feature || (f == best.feature && threshold < best.threshold)));
                if (better && decrease > 0.0) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = threshold;
                    best.decrease = decrease;
                }
            }
        }
        return best;
    }

    int build(const std::vector<std::size_t>& indices, int depth) {
        std::vector<std::int64_t> counts(static_cast<std::size_t>(n_classes), 0);
        for (const std::size_t i : indices) counts[static_cast<std::size_t>(y[i])]++;

        const bool pure =
            std::count_if(counts.begin(), counts.end(), [](std::int64_t c) { return c > 0; }) <= 1;
        const bool depth_capped = params.max_depth > 0 && depth >= params.max_depth;
        const bool too_small = static_cast<int>(indices.size()) < params.min_samples_split;

        SplitChoice split;
        if (!pure && !depth_capped && !too_small) split = best_split(indices, counts);

        const int node_index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        if (!split.found) {
            tree.nodes[static_cast<std::size_t>(node_index)].class_counts = std::move(counts);
            return node_index;
        }

        if (importance_accum) {
            (*importance_accum)[static_cast<std::size_t>(split.feature)] +=
                (static_cast<double>(indices.size()) / static_cast<double>(n_root)) * split.decrease;
        }

        std::vector<std::size_t> left_idx, right_idx;
        for (const std::size_t i : indices) {
            (X[i][static_cast<std::size_t>(split.feature)] <= split.threshold ? left_idx : right_idx)
                .push_back(i);
        }

        tree.nodes[static_cast<std::size_t>(node_index)].feature = split.feature;
        tree.nodes[static_cast<std::size_t>(node_index)].threshold = split.threshold;
        const int left = build(left_idx, depth + 1);
        tree.nodes[static_cast<std::size_t>(node_index)].left = left;
        const int right = build(right_idx, depth + 1);
        tree.nodes[static_cast<std::size_t>(node_index)].right = right;
        return node_index;
    }
};

} // namespace

DecisionTree fit_tree(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                      int n_classes, const TreeParams& params, Rng& rng,
                      std::vector<double>* importance_accum) {
    if (X.empty()) throw ShapeError("fit_tree: no samples");
    if (X.size() != y.size()) throw ShapeError("fit_tree: X and y lengths differ");

    TreeBuilder builder{X, y, n_classes, params, rng, importance_accum, X.size(), {}};
    std::vector<std::size_t> indices(X.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    builder.build(indices, 0);
    return std::move(builder.tree);
}

ForestModel fit_forest(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                       int n_classes, const ForestConfig& config) {
    if (X.empty()) throw ShapeError("fit_forest: no samples");
    const int d = static_cast<int>(X[0].size());

    ForestModel model;
    model.config = config;
    model.n_features = d;
    model.n_classes = n_classes;
    model.feature_importances.assign(static_cast<std::size_t>(d), 0.0);

    TreeParams tree_params;
    tree_params.max_depth = config.max_depth;
    tree_params.min_samples_split = config.min_samples_split;
    tree_params.max_features =
        config.max_features > 0
            ? config.max_features
            : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));

    const std::size_t n = X.size();
    for (int t = 0; t < config.n_trees; ++t) {
        Rng rng(derive_seed(config.seed, "tree", static_cast<std::uint64_t>(t)));
        std::vector<std::vector<double>> Xt;
        std::vector<int> yt;
        if (config.bootstrap) {
            Xt.reserve(n);
            yt.reserve(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto j = static_cast<std::size_t>(rng.next_below(n));
                Xt.push_back(X[j]);
                yt.push_back(y[j]);
            }
            model.trees.push_back(fit_tree(Xt, yt, n_classes, tree_params, rng,
                                           &model.feature_importances));
        } else {
            model.trees.push_back(
                fit_tree(X, y, n_classes, tree_params, rng, &model.feature_importances));
        }
    }

    const double total = std::accumulate(model.feature_importances.begin(),
                                         model.feature_importances.end(), 0.0);
    if (total > 0.0) {
        for (double& v : model.feature_importances) v /= total;
    }
    return model;
}

ForestPrediction predict(const ForestModel& model, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != model.n_features) {
        throw ShapeError("predict: feature vector length mismatch");
    }
    ForestPrediction pred;
    pred.votes.assign(static_cast<std::size_t>(model.n_classes), 0);
    for (const DecisionTree& tree : model.trees) {
        pred.votes[static_cast<std::size_t>(tree.predict(x))]++;
    }
    int best = 0;
    for (int c = 1; c < model.n_classes; ++c) {
        if (pred.votes[static_cast<std::size_t>(c)] > pred.votes[static_cast<std::size_t>(best)]) {
            best = c;
        }
    }
    pred.class_index = best;
    return pred;
}

std::vector<double> vote_fractions(const ForestModel& model, const std::vector<double>& x) {
    const ForestPrediction pred = predict(model, x);
    std::vector<double> fractions(pred.votes.size());
    const auto n_trees = static_cast<double>(model.trees.size());
    for (std::size_t c = 0; c < pred.votes.size(); ++c) {
        fractions[c] = static_cast<double>(pred.votes[c]) / n_trees;
    }
    return fractions;
}

nlohmann::json forest_to_json(const ForestModel& model) {
    nlohmann::json j;
    j["config"] = {{"n_trees", model.config.n_trees},
                   {"max_depth", model.config.max_depth},
                   {"min_samples_split", model.config.min_samples_split},
                   {"max_features", model.config.max_features},
                   {"bootstrap", model.config.bootstrap},
                   {"seed", model.config.seed}};
    j["n_features"] = model.n_features;
    j["n_classes"] = model.n_classes;
    j["feature_importances"] = model.feature_importances;

    nlohmann::json trees = nlohmann::json::array();
    for (const DecisionTree& tree : model.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const TreeNode& node : tree.nodes) {
            if (node.feature < 0) {
                nodes.push_back({{"counts", node.class_counts}});
            } else {
                nodes.push_back({{"feature", node.feature},
                                 {"threshold", node.threshold},
                                 {"left", node.left},
                                 {"right", node.right}});
            }
        }
        trees.push_back({{"nodes", nodes}});
    }
    j["trees"] = trees;
    return j;
}

ForestModel forest_from_json(const nlohmann::json& j) {
    ForestModel model;
    const auto& cfg = j.at("config");
    model.config.n_trees = cfg.at("n_trees").get<int>();
    model.config.max_depth = cfg.at("max_depth").get<int>();
    model.config.min_samples_split = cfg.at("min_samples_split").get<int>();
    model.config.max_features = cfg.at("max_features").get<int>();
    model.config.bootstrap = cfg.at("bootstrap").get<bool>();
    model.config.seed = cfg.at("seed").get<std::uint64_t>();
    model.n_features = j.at("n_features").get<int>();
    model.n_classes = j.at("n_classes").get<int>();
    model.feature_importances = j.at("feature_importances").get<std::vector<double>>();

    for (const auto& tj : j.at("trees")) {
        DecisionTree tree;
        for (const auto& nj : tj.at("nodes")) {
            TreeNode node;
            if (nj.contains("counts")) {
                node.class_counts = nj.at("counts").get<std::vector<std::int64_t>>();
            } else {
                node.feature = nj.at("feature").get<int>();
                node.threshold = nj.at("threshold").get<double>();
                node.left = nj.at("left").get<int>();
                node.right = nj.at("right").get<int>();
            }
            tree.nodes.push_back(std::move(node));
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

} // namespace vbx
