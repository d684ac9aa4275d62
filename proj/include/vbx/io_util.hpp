#pragma once

#include <array>
#include <string>
#include <vector>

namespace vbx {

// Writes content to `path` via a temp file + rename so readers never observe
// a partially written artifact.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// 17 significant digits: enough to round-trip any double exactly.
std::string format_double(double value);

// One row of the extracted-feature table.
struct FeatureRow {
    std::string path;
    int label = 0;
    std::array<double, 8> values{};
};

extern const char* const kFeatureCsvHeader;

std::string feature_csv(const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> parse_feature_csv(const std::string& content);

} // namespace vbx
