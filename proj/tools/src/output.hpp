#pragma once

// Deterministic text output: 17 significant digits, '.' separator, '\n'
// line endings, atomic temp-and-rename writes.

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace bkl::cli {

inline constexpr int kOutputSchemaVersion = 1;

/// Locale-independent, 17 significant digits.
std::string format_double(double v);

/// CSV with a leading "# bkl <kind> schema_version=N" comment line.
class CsvWriter {
public:
    CsvWriter(std::string_view kind, std::initializer_list<std::string_view> columns);
    CsvWriter(std::string_view kind, const std::vector<std::string>& columns);

    void row(std::initializer_list<double> values);
    void row(const std::vector<double>& values);

    std::size_t columns() const { return columns_; }
    std::size_t rows() const { return rows_; }
    const std::string& text() const { return text_; }

private:
    void header(std::string_view kind, const std::vector<std::string>& columns);

    std::string text_;
    std::size_t columns_ = 0;
    std::size_t rows_ = 0;
};

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace bkl::cli
