#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace habitfbp {

// Round-trip formatting with a fixed locale-free convention ('.' decimal
// separator), so reruns emit byte-identical files.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    out += '"';
    return out;
}

// Minimal RFC-4180 writer: mandatory header row, CRLF line endings.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path, const std::vector<std::string>& header)
        : os_(path, std::ios::binary) {
        if (!os_) throw std::runtime_error("csv: cannot open " + path);
        write_row_strings(header);
    }

    void row(const std::vector<double>& values) {
        std::string line;
        for (size_t i = 0; i < values.size(); ++i) {
            if (i) line += ',';
            line += fmt_double(values[i]);
        }
        os_ << line << "\r\n";
    }

    void row_mixed(const std::vector<std::string>& fields) { write_row_strings(fields); }

private:
    void write_row_strings(const std::vector<std::string>& fields) {
        std::string line;
        for (size_t i = 0; i < fields.size(); ++i) {
            if (i) line += ',';
            line += csv_quote(fields[i]);
        }
        os_ << line << "\r\n";
    }

    std::ofstream os_;
};

}  // namespace habitfbp
