#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace vbx {

struct LabeledSample {
    std::string image_path;
    int class_index = 0;
    std::string class_name;
};

// Samples plus the sorted class-name table. Empty class folders still count
// as classes.
struct Dataset {
    std::vector<LabeledSample> samples;
    std::vector<std::string> class_names;
};

struct DatasetSplit {
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> validation;
    std::uint64_t seed = 0;
};

// Scans `root` for one subdirectory per class. Class indices follow the
// lexicographic order of folder names; samples within a class are ordered
// lexicographically by filename, so the result is independent of directory
// enumeration order.
Dataset load_dataset(const std::string& root);

// Stratified split: each class is shuffled with its own substream
// (derive_seed(seed, "split-class", class_index)) and the last
// ceil(n_c * validation_fraction) samples go to validation. A dataset with a
// single sample overall keeps it in train.
DatasetSplit split_dataset(const std::vector<LabeledSample>& samples, double validation_fraction,
                           std::uint64_t seed);

nlohmann::json split_manifest(const DatasetSplit& split, double validation_fraction);

} // namespace vbx
