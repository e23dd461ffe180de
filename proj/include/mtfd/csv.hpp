#ifndef MTFD_CSV_HPP
#define MTFD_CSV_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mtfd/errors.hpp"

namespace mtfd {

// 17 significant digits: round-trips any double and is byte-deterministic
// across runs (no locale dependence; snprintf with the C locale format).
inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw spec_error("CsvWriter: cannot open '" + path + "'");
    }
    void header(const std::vector<std::string>& names) {
        write_strings(names);
    }
    void row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(format_full(v));
        write_strings(cells);
    }
    void raw_row(const std::vector<std::string>& cells) { write_strings(cells); }
    void close() { out_.close(); }

private:
    void write_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
        if (!out_) throw numeric_error("CsvWriter: write failed");
    }
    std::ofstream out_;
};

// Reads a numeric CSV with a header row; returns columns by header name.
struct CsvTable {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;  // one vector per name

    const std::vector<double>& column(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return columns[i];
        throw spec_error("CsvTable: missing column '" + name + "'");
    }
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw spec_error("read_csv: cannot open '" + path + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw spec_error("read_csv: empty file '" + path + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.names.push_back(cell);
    }
    if (t.names.empty()) throw spec_error("read_csv: empty header in '" + path + "'");
    t.columns.resize(t.names.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            if (c >= t.names.size())
                throw spec_error("read_csv: too many cells at line " + std::to_string(line_no));
            try {
                t.columns[c].push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw spec_error("read_csv: non-numeric cell '" + cell + "' at line " +
                                 std::to_string(line_no));
            }
            ++c;
        }
        if (c != t.names.size())
            throw spec_error("read_csv: short row at line " + std::to_string(line_no));
    }
    return t;
}

}  // namespace mtfd

#endif
