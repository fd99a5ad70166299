#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gyrolim {

// CSV emission with a fixed column order and 17-significant-digit formatting,
// so reruns with the same seed are byte-identical.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns) : path_(path) {
        out_.open(path);
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
        for (std::size_t k = 0; k < columns.size(); ++k) {
            if (k) out_ << ',';
            out_ << columns[k];
        }
        out_ << '\n';
        ncols_ = columns.size();
    }

    static std::string format(double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    void row(const std::vector<double>& values) {
        if (values.size() != ncols_)
            throw std::runtime_error("csv row width mismatch in " + path_);
        for (std::size_t k = 0; k < values.size(); ++k) {
            if (k) out_ << ',';
            out_ << format(values[k]);
        }
        out_ << '\n';
    }

    // mixed row for status-style columns
    void row_raw(const std::vector<std::string>& values) {
        if (values.size() != ncols_)
            throw std::runtime_error("csv row width mismatch in " + path_);
        for (std::size_t k = 0; k < values.size(); ++k) {
            if (k) out_ << ',';
            out_ << values[k];
        }
        out_ << '\n';
    }

    void close() { out_.close(); }

private:
    std::string path_;
    std::ofstream out_;
    std::size_t ncols_ = 0;
};

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t k = 0; k < columns.size(); ++k)
            if (columns[k] == name) return static_cast<int>(k);
        return -1;
    }
    double number(std::size_t row, int col) const { return std::stod(rows[row][col]); }
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read csv: " + path);
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            t.columns = cells;
            first = false;
        } else {
            if (cells.size() != t.columns.size())
                throw std::runtime_error("malformed csv (ragged row): " + path);
            t.rows.push_back(cells);
        }
    }
    if (first) throw std::runtime_error("malformed csv (no header): " + path);
    return t;
}

} // namespace gyrolim
