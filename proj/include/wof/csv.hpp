#pragma once

// CSV output: '#'-prefixed metadata lines (format version and every input
// parameter), one header row, then comma-separated rows. Numbers are printed
// with a fixed format so reruns produce identical bytes.

#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace wof {

inline constexpr std::string_view kVersion = "1.0.0";
inline constexpr int kCsvSchema = 1;

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::string_view command) : out_(out) {
        out_ << "# wof " << kVersion << " schema=" << kCsvSchema << " command=" << command << '\n';
    }

    void param(std::string_view key, std::string_view value) { out_ << "# " << key << '=' << value << '\n'; }
    void param(std::string_view key, double value) { param(key, format_number(value)); }

    void header(std::initializer_list<std::string_view> columns) {
        bool first = true;
        for (auto c : columns) {
            if (!first) out_ << ',';
            out_ << c;
            first = false;
        }
        out_ << '\n';
        columns_ = columns.size();
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            out_ << format_number(values[i]);
        }
        out_ << '\n';
    }

    std::size_t columns() const noexcept { return columns_; }

private:
    std::ostream& out_;
    std::size_t columns_ = 0;
};

} // namespace wof
