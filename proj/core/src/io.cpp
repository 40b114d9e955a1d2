#include "cbsae/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cbsae/error.hpp"

namespace cbsae {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_record(std::string_view line, const std::string& source,
                                      std::size_t lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cur += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      out.push_back(was_quoted ? cur : std::string(trim(cur)));
      cur.clear();
      was_quoted = false;
    } else {
      cur += c;
    }
  }
  if (quoted) {
    throw ValidationError(source + ":" + std::to_string(lineno) + ": unterminated quote");
  }
  out.push_back(was_quoted ? cur : std::string(trim(cur)));
  return out;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos && trim(s) == s) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::optional<double> parse_double(std::string_view cell) {
  cell = trim(cell);
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return v;
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  return std::nullopt;
}

CsvTable parse_csv(std::string_view text, const std::string& source) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  CsvTable table;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (trim(line).empty()) {
      if (nl == text.size()) break;
      continue;
    }
    auto fields = split_record(line, source, lineno);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      std::set<std::string> seen;
      for (const auto& h : table.header) {
        if (!seen.insert(h).second) {
          throw ValidationError(source + ": duplicate column \"" + h + "\"");
        }
      }
    } else {
      if (fields.size() != table.header.size()) {
        throw ValidationError(source + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(table.header.size()) + " fields, found " +
                              std::to_string(fields.size()));
      }
      table.rows.push_back(std::move(fields));
    }
    if (nl == text.size()) break;
  }
  if (!have_header) throw ValidationError(source + ": empty file");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  return parse_csv(read_file(path), path.string());
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << ',';
      out << quote_if_needed(row[k]);
    }
    out << '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
  if (!out) throw ValidationError("write failed for " + path.string());
}

AreaDataset parse_area_csv(const CsvTable& table, const AreaSchema& schema,
                           const std::string& source) {
  auto require = [&](const std::string& name) {
    const auto c = table.column(name);
    if (!c) throw ValidationError(source + ": missing column \"" + name + "\"");
    return *c;
  };
  const auto label_col = require(schema.label);
  const auto y_col = require(schema.y);
  const auto d_col = require(schema.sampling_variance);
  if (schema.covariates.empty() && !schema.intercept) {
    throw ValidationError(source + ": at least one covariate is required");
  }
  std::vector<std::size_t> cov_cols;
  for (const auto& c : schema.covariates) cov_cols.push_back(require(c));
  std::optional<std::size_t> phi_col;
  std::optional<std::size_t> w_col;
  std::optional<std::size_t> g_col;
  if (schema.loss_weight) phi_col = require(*schema.loss_weight);
  if (schema.benchmark_weight) w_col = require(*schema.benchmark_weight);
  if (schema.group) g_col = require(*schema.group);

  const auto m = static_cast<Eigen::Index>(table.rows.size());
  const auto offset = schema.intercept ? 1 : 0;
  const auto p = static_cast<Eigen::Index>(cov_cols.size()) + offset;

  AreaDataset data;
  data.y.resize(m);
  data.sampling_variance.resize(m);
  data.covariates.resize(m, p);
  if (schema.intercept) data.covariate_names.push_back(kInterceptName);
  for (const auto& c : schema.covariates) data.covariate_names.push_back(c);
  if (phi_col) data.loss_weights = Eigen::VectorXd(m);
  if (w_col) data.benchmark_weights = Eigen::VectorXd(m);
  if (g_col) data.groups = std::vector<std::string>();

  auto number = [&](Eigen::Index row, std::size_t col) {
    const auto& cell = table.rows[static_cast<std::size_t>(row)][col];
    const auto v = parse_double(cell);
    if (!v || !std::isfinite(*v)) {
      throw ValidationError(source + ": non-numeric value \"" + cell + "\" at row " +
                            std::to_string(row + 1) + ", column \"" + table.header[col] +
                            "\"");
    }
    return *v;
  };

  std::set<std::string> seen;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const auto& label = row[label_col];
    if (label.empty()) {
      throw ValidationError(source + ": empty label at row " + std::to_string(i + 1));
    }
    if (!seen.insert(label).second) {
      throw ValidationError(source + ": duplicate label " + label);
    }
    data.labels.push_back(label);
    data.y[i] = number(i, y_col);
    data.sampling_variance[i] = number(i, d_col);
    if (data.sampling_variance[i] < 0.0) {
      throw ValidationError(source + ": negative sampling variance at row " +
                            std::to_string(i + 1) + " (" + label + ")");
    }
    if (schema.intercept) data.covariates(i, 0) = 1.0;
    for (std::size_t k = 0; k < cov_cols.size(); ++k) {
      data.covariates(i, static_cast<Eigen::Index>(k) + offset) = number(i, cov_cols[k]);
    }
    if (phi_col) (*data.loss_weights)[i] = number(i, *phi_col);
    if (w_col) (*data.benchmark_weights)[i] = number(i, *w_col);
    if (g_col) data.groups->push_back(row[*g_col]);
  }
  data.validate();
  return data;
}

AreaDataset load_area_csv(const std::filesystem::path& path, const AreaSchema& schema) {
  return parse_area_csv(read_csv(path), schema, path.string());
}

AreaSchema schema_for(const AreaDataset& data) {
  AreaSchema schema;
  schema.intercept = !data.covariate_names.empty() &&
                     data.covariate_names.front() == kInterceptName;
  for (std::size_t k = schema.intercept ? 1 : 0; k < data.covariate_names.size(); ++k) {
    schema.covariates.push_back(data.covariate_names[k]);
  }
  if (data.loss_weights) schema.loss_weight = "phi";
  if (data.benchmark_weights) schema.benchmark_weight = "w";
  if (data.groups) schema.group = "group";
  return schema;
}

void write_area_csv(const std::filesystem::path& path, const AreaDataset& data) {
  const auto schema = schema_for(data);
  CsvTable t;
  t.header = {schema.label, schema.y, schema.sampling_variance};
  for (const auto& c : schema.covariates) t.header.push_back(c);
  if (schema.loss_weight) t.header.push_back(*schema.loss_weight);
  if (schema.benchmark_weight) t.header.push_back(*schema.benchmark_weight);
  if (schema.group) t.header.push_back(*schema.group);
  const Eigen::Index first_cov = schema.intercept ? 1 : 0;
  for (std::size_t i = 0; i < data.areas(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    std::vector<std::string> row{data.labels[i], format_double(data.y[r]),
                                 format_double(data.sampling_variance[r])};
    for (Eigen::Index c = first_cov; c < data.covariates.cols(); ++c) {
      row.push_back(format_double(data.covariates(r, c)));
    }
    if (data.loss_weights) row.push_back(format_double((*data.loss_weights)[r]));
    if (data.benchmark_weights) row.push_back(format_double((*data.benchmark_weights)[r]));
    if (data.groups) row.push_back((*data.groups)[i]);
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

std::vector<Edge> parse_edge_list(std::string_view text, const std::string& source) {
  std::vector<Edge> edges;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    if (trim(line).empty()) continue;
    const auto fields = split_record(line, source, lineno);
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty()) {
      throw ValidationError(source + ":" + std::to_string(lineno) +
                            ": expected label_i,label_j[,weight]");
    }
    Edge e{fields[0], fields[1], 1.0};
    if (fields.size() == 3) {
      const auto w = parse_double(fields[2]);
      if (!w) {
        throw ValidationError(source + ":" + std::to_string(lineno) +
                              ": non-numeric weight \"" + fields[2] + "\"");
      }
      e.weight = *w;
    }
    edges.push_back(std::move(e));
  }
  return edges;
}

std::vector<Edge> read_edge_list(const std::filesystem::path& path) {
  return parse_edge_list(read_file(path), path.string());
}

ConstraintSet read_constraints(const std::filesystem::path& path,
                               const std::vector<std::string>& labels) {
  const auto table = read_csv(path);
  const auto source = path.string();
  const auto target_col = table.column("target");
  if (!target_col) throw ValidationError(source + ": missing column \"target\"");
  std::map<std::string, Eigen::Index> index;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    index.emplace(labels[k], static_cast<Eigen::Index>(k));
  }
  std::vector<std::pair<std::size_t, Eigen::Index>> cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == *target_col) continue;
    const auto it = index.find(table.header[c]);
    if (it == index.end()) {
      throw ValidationError(source + ": unknown label \"" + table.header[c] + "\"");
    }
    cols.emplace_back(c, it->second);
  }
  const auto k = static_cast<Eigen::Index>(table.rows.size());
  if (k == 0) throw ValidationError(source + ": no constraints");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, static_cast<Eigen::Index>(labels.size()));
  Eigen::VectorXd t(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto& row = table.rows[static_cast<std::size_t>(r)];
    auto cell = [&](std::size_t c) {
      const auto v = parse_double(row[c]);
      if (!v) {
        throw ValidationError(source + ": non-numeric value \"" + row[c] + "\" at row " +
                              std::to_string(r + 1) + ", column \"" + table.header[c] +
                              "\"");
      }
      return *v;
    };
    t[r] = cell(*target_col);
    for (const auto& [c, idx] : cols) m(r, idx) = cell(c);
  }
  return ConstraintSet(std::move(m), std::move(t));
}

}  // namespace cbsae
