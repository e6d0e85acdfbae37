#pragma once

// Plain CSV in and out. Every file starts with a "# ..." line recording the
// active bound modes, then a header row. Numbers use 12 significant digits.

#include <cstdio>
#include <string>
#include <vector>

namespace adpp::csv {

/// "%.12g"
std::string num(double x);

class Writer {
public:
    Writer(const std::string& path, const std::string& comment, const std::vector<std::string>& columns);
    ~Writer();
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;

    void row(const std::vector<std::string>& cells);
    void row(const std::vector<double>& values);
    /// Column count of the header; rows must match it.
    std::size_t width() const noexcept { return width_; }

private:
    std::FILE* f_ = nullptr;
    std::string path_;
    std::size_t width_;
};

struct Table {
    std::vector<std::string> comments;  ///< without the leading "# "
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    /// Index of a named column; throws Error if absent.
    std::size_t column(const std::string& name) const;
};

/// Throws Error when the file is missing or a row has the wrong width.
Table read(const std::string& path);

/// Parses a decimal cell; throws Error on anything else.
double to_double(const std::string& cell);

}  // namespace adpp::csv
