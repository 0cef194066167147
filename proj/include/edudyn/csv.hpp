#pragma once

// Deterministic CSV output: '#'-prefixed header lines, one column-name line,
// then data rows. Floating point is serialized with 17 significant digits so
// identical configs produce byte-identical files.

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "edudyn/errors.hpp"

namespace edudyn::csv {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string format_int(long long v) {
    return std::to_string(v);
}

struct Table {
    std::vector<std::string> header_lines;  // without the leading '#'
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

class Writer {
public:
    void comment(const std::string& line) { table_.header_lines.push_back(line); }

    void columns(std::vector<std::string> names) { table_.columns = std::move(names); }

    void row(std::vector<std::string> fields) {
        if (fields.size() != table_.columns.size())
            throw Error("csv row width " + std::to_string(fields.size()) +
                        " does not match column count " + std::to_string(table_.columns.size()));
        table_.rows.push_back(std::move(fields));
    }

    std::string str() const {
        std::ostringstream os;
        for (const auto& line : table_.header_lines) os << "# " << line << "\n";
        for (std::size_t i = 0; i < table_.columns.size(); ++i)
            os << (i ? "," : "") << table_.columns[i];
        os << "\n";
        for (const auto& r : table_.rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << "\n";
        }
        return os.str();
    }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot open output file: " + path);
        out << str();
        if (!out) throw Error("write failed: " + path);
    }

private:
    Table table_;
};

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

// Re-parse an emitted file: every data row must match the column count and
// each field must be a number (nan/inf included) or a lowercase token.
inline Table validate_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);
    Table t;
    std::string line;
    bool have_columns = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            t.header_lines.push_back(line.size() > 1 ? line.substr(2) : "");
            continue;
        }
        if (!have_columns) {
            t.columns = split_fields(line);
            if (t.columns.empty())
                throw Error(path + ":" + std::to_string(line_no) + ": empty column line");
            have_columns = true;
            continue;
        }
        auto fields = split_fields(line);
        if (fields.size() != t.columns.size())
            throw Error(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(t.columns.size()) + " fields, got " +
                        std::to_string(fields.size()));
        for (const auto& f : fields) {
            if (f.empty())
                throw Error(path + ":" + std::to_string(line_no) + ": empty field");
            char* end = nullptr;
            std::strtod(f.c_str(), &end);
            const bool numeric = end && *end == '\0';
            if (numeric) continue;
            bool token = true;
            for (char c : f)
                if (!(std::islower(static_cast<unsigned char>(c)) || c == '-' || c == '_'))
                    token = false;
            if (!token)
                throw Error(path + ":" + std::to_string(line_no) + ": field '" + f +
                            "' is neither numeric nor a token");
        }
        t.rows.push_back(std::move(fields));
    }
    if (!have_columns) throw Error(path + ": no column line found");
    return t;
}

} // namespace edudyn::csv
