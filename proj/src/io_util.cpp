#include "vbx/io_util.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vbx/error.hpp"

namespace vbx {

void atomic_write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open file for writing: " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw InputError("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

const char* const kFeatureCsvHeader =
    "path,label,area,eccentricity,solidity,mean_intensity,std_intensity,"
    "glcm_contrast,glcm_homogeneity,glcm_entropy";

std::string feature_csv(const std::vector<FeatureRow>& rows) {
    std::ostringstream out;
    out << kFeatureCsvHeader << "\n";
    for (const FeatureRow& row : rows) {
        out << row.path << "," << row.label;
        for (const double v : row.values) out << "," << format_double(v);
        out << "\n";
    }
    return out.str();
}

std::vector<FeatureRow> parse_feature_csv(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) throw InputError("feature CSV is empty");
    if (line != kFeatureCsvHeader) throw InputError("feature CSV header mismatch");

    std::vector<FeatureRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string cur;
        for (const char c : line) {
            if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        fields.push_back(cur);
        if (fields.size() != 10) throw InputError("feature CSV row has wrong field count");
        FeatureRow row;
        row.path = fields[0];
        row.label = std::stoi(fields[1]);
        for (int i = 0; i < 8; ++i) row.values[static_cast<std::size_t>(i)] = std::stod(fields[2 + i]);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace vbx
