#include "vbx/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "vbx/error.hpp"
#include "vbx/rng.hpp"

namespace fs = std::filesystem;

namespace vbx {

Dataset load_dataset(const std::string& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw ConfigError("dataset root is not a readable directory: " + root);
    }

    std::vector<std::string> class_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) class_dirs.push_back(entry.path().filename().string());
    }
    if (class_dirs.empty()) {
        throw ConfigError("dataset root contains no class folders: " + root);
    }
    std::sort(class_dirs.begin(), class_dirs.end());

    Dataset ds;
    ds.class_names = class_dirs;
    for (std::size_t ci = 0; ci < class_dirs.size(); ++ci) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(fs::path(root) / class_dirs[ci])) {
            if (entry.is_regular_file()) files.push_back(entry.path().string());
        }
        std::sort(files.begin(), files.end());
        for (const std::string& file : files) {
            ds.samples.push_back({file, static_cast<int>(ci), class_dirs[ci]});
        }
    }
    return ds;
}

namespace {

// ceil(n * fraction) evaluated with a small tolerance so that fractions like
// 0.2, which are not exactly representable, still give the intended integer
// at exact multiples (10 * 0.2 -> 2, not 3).
std::size_t validation_count(std::size_t n, double fraction) {
    const double x = static_cast<double>(n) * fraction;
    return static_cast<std::size_t>(std::ceil(x - 1e-8));
}

} // namespace

DatasetSplit split_dataset(const std::vector<LabeledSample>& samples, double validation_fraction,
                           std::uint64_t seed) {
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        throw RangeError("validation_fraction must be in (0, 1)");
    }

    int max_class = -1;
    for (const LabeledSample& s : samples) max_class = std::max(max_class, s.class_index);

    DatasetSplit split;
    split.seed = seed;
    for (int ci = 0; ci <= max_class; ++ci) {
        std::vector<LabeledSample> members;
        for (const LabeledSample& s : samples) {
            if (s.class_index == ci) members.push_back(s);
        }
        if (members.empty()) continue;
        Rng rng(derive_seed(seed, "split-class", static_cast<std::uint64_t>(ci)));
        rng.shuffle(members);
        std::size_t n_val = validation_count(members.size(), validation_fraction);
        if (samples.size() == 1) n_val = 0;
        const std::size_t n_train = members.size() - n_val;
        for (std::size_t i = 0; i < members.size(); ++i) {
            (i < n_train ? split.train : split.validation).push_back(members[i]);
        }
    }
    return split;
}

nlohmann::json split_manifest(const DatasetSplit& split, double validation_fraction) {
    nlohmann::json j;
    j["seed"] = split.seed;
    j["validation_fraction"] = validation_fraction;
    auto paths = [](const std::vector<LabeledSample>& v) {
        std::vector<std::string> out;
        out.reserve(v.size());
        for (const LabeledSample& s : v) out.push_back(s.image_path);
        return out;
    };
    j["train"] = paths(split.train);
    j["validation"] = paths(split.validation);
    return j;
}

} // namespace vbx
