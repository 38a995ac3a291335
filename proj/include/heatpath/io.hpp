#pragma once

// CSV and JSON emission. Every CSV starts with versioned '#' header lines and
// numbers are written in shortest round-trip form, so files re-ingest
// losslessly and identical runs produce byte-identical output.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatpath/errors.hpp"

namespace heatpath::io {

inline constexpr int k_schema_version = 1;

inline std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& kind,
              const std::map<std::string, std::string>& meta,
              const std::vector<std::string>& columns)
        : out_(path) {
        if (!out_) throw ConfigError("cannot open output file " + path.string());
        out_ << "# heatpath " << kind << " schema_version=" << k_schema_version << "\n";
        for (const auto& [key, value] : meta) out_ << "# " << key << "=" << value << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << columns[i] << (i + 1 == columns.size() ? "\n" : ",");
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << cells[i] << (i + 1 == cells.size() ? "\n" : ",");
    }

private:
    std::ofstream out_;
};

struct CsvFile {
    int schema_version = 0;
    std::map<std::string, std::string> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    double number(std::size_t row, std::size_t col) const {
        const std::string& cell = rows[row][col];
        double v = 0.0;
        auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc{}) throw ConfigError("CSV cell is not a number: " + cell);
        return v;
    }
};

inline CsvFile read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open CSV " + path.string());
    CsvFile file;
    std::string line;
    bool saw_columns = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto sv = line.find("schema_version=");
            if (sv != std::string::npos) {
                file.schema_version = std::atoi(line.c_str() + sv + 15);
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos || line.size() < 3) continue;
            file.meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!saw_columns) {
            file.columns = cells;
            saw_columns = true;
        } else {
            file.rows.push_back(std::move(cells));
        }
    }
    if (file.schema_version != k_schema_version)
        throw ConfigError("CSV " + path.string() + " has unsupported schema_version " +
                          std::to_string(file.schema_version));
    return file;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file " + path.string());
    out << doc.dump(2) << "\n";
}

} // namespace heatpath::io
