#pragma once

// Tables, CSV/SVG output and seed derivation for experiment drivers.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace noisyq {

// splitmix64 over (base, stream, index): independent per-trial seeds that do
// not depend on execution order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  void add(std::vector<std::string> row);
};

// Shortest round-trip decimal form, so output is stable and lossless.
std::string format_number(double v);

std::string to_csv(const Table& table, const std::string& comment);
void write_csv(const Table& table, const std::string& comment, const std::filesystem::path& path);

// Line chart of y_columns against x_column. Throws (and writes nothing) on an
// empty table or a non-numeric cell.
std::string render_svg(const Table& table, const std::string& x_column, const std::vector<std::string>& y_columns,
                       const std::string& title = "");
void emit_plot(const Table& table, const std::string& x_column, const std::vector<std::string>& y_columns,
               const std::filesystem::path& path, const std::string& title = "");

}  // namespace noisyq
