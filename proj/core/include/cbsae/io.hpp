#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cbsae/area_data.hpp"
#include "cbsae/estimators.hpp"
#include "cbsae/graph_smoothness.hpp"

namespace cbsae {

/// Round-trippable fixed formatting (17 significant digits).
std::string format_double(double v);

/// Parses a full cell as a double; std::nullopt when the cell is not numeric.
std::optional<double> parse_double(std::string_view cell);

/// Comma-separated table with a header row. Quoted fields ("a,b", "") are
/// supported; blank lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text, const std::string& source = "<memory>");
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Column-name mapping for area files.
struct AreaSchema {
  std::string label = "label";
  std::string y = "y";
  std::string sampling_variance = "D";
  std::vector<std::string> covariates;
  bool intercept = true;
  std::optional<std::string> loss_weight;
  std::optional<std::string> benchmark_weight;
  std::optional<std::string> group;
};

inline constexpr const char* kInterceptName = "(intercept)";

/// Reads and validates an area file. Row order defines area indices.
AreaDataset load_area_csv(const std::filesystem::path& path, const AreaSchema& schema);
AreaDataset parse_area_csv(const CsvTable& table, const AreaSchema& schema,
                           const std::string& source);

/// Writes `data` so that load_area_csv(path, schema_for(data)) reproduces it.
void write_area_csv(const std::filesystem::path& path, const AreaDataset& data);
AreaSchema schema_for(const AreaDataset& data);

/// `label_i,label_j[,weight]` per line; `#` starts a comment.
std::vector<Edge> read_edge_list(const std::filesystem::path& path);
std::vector<Edge> parse_edge_list(std::string_view text, const std::string& source);

/// Constraint file: header `target,<label>,<label>,...`, one row per
/// constraint. Labels missing from the header get coefficient 0.
ConstraintSet read_constraints(const std::filesystem::path& path,
                               const std::vector<std::string>& labels);

}  // namespace cbsae
