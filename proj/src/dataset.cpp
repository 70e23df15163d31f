#include "clustertune/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "clustertune/errors.hpp"

namespace clustertune {

std::string_view to_string(Scaling s) noexcept {
  switch (s) {
    case Scaling::raw:
      return "raw";
    case Scaling::standardized:
      return "standardized";
    case Scaling::minmax:
      return "minmax";
  }
  return "raw";
}

namespace {

void validate_key_features(const std::vector<std::string>& columns,
                           const std::vector<std::string>& keys) {
  std::set<std::string> seen;
  for (const auto& k : keys) {
    if (std::find(columns.begin(), columns.end(), k) == columns.end()) {
      throw SchemaError("key feature '" + k + "' is not a dataset column");
    }
    if (!seen.insert(k).second) {
      throw SchemaError("key feature '" + k + "' listed twice");
    }
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

bool parse_finite(std::string_view cell, double& out) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) return false;
  out = v;
  return true;
}

}  // namespace

Dataset::Dataset(std::vector<std::string> columns, Matrix values,
                 std::vector<std::string> key_features, Scaling scaling)
    : columns_(std::move(columns)),
      values_(std::move(values)),
      key_features_(std::move(key_features)),
      scaling_(scaling) {
  if (columns_.empty()) throw SchemaError("dataset needs at least one column");
  if (values_.cols() != columns_.size()) {
    throw SchemaError("matrix has " + std::to_string(values_.cols()) + " columns but " +
                      std::to_string(columns_.size()) + " names were given");
  }
  std::set<std::string> names;
  for (const auto& c : columns_) {
    if (c.empty()) throw SchemaError("empty column name");
    if (!names.insert(c).second) throw SchemaError("duplicate column name '" + c + "'");
  }
  if (values_.rows() < 2) {
    throw InsufficientDataError("dataset needs at least 2 rows, got " +
                                std::to_string(values_.rows()));
  }
  for (std::size_t r = 0; r < values_.rows(); ++r) {
    for (std::size_t c = 0; c < values_.cols(); ++c) {
      if (!std::isfinite(values_(r, c))) {
        throw SchemaError("non-finite value at row " + std::to_string(r) + ", column '" +
                          columns_[c] + "'");
      }
    }
  }
  if (key_features_.empty()) {
    key_features_ = columns_;
  } else {
    validate_key_features(columns_, key_features_);
  }
}

std::size_t Dataset::column_index(std::string_view name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) throw SchemaError("unknown column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - columns_.begin());
}

Dataset Dataset::with_key_features(std::vector<std::string> key_features) const {
  return Dataset(columns_, values_, std::move(key_features), scaling_);
}

LoadResult parse_csv(std::string_view text, bool drop_na) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<std::string> header;
  std::vector<double> cells;
  std::size_t source_rows = 0;
  std::size_t dropped = 0;
  std::size_t record = 0;
  bool have_header = false;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++record;
    if (line.empty()) continue;

    const auto fields = split_commas(line);
    if (!have_header) {
      std::set<std::string> seen;
      for (const auto f : fields) {
        if (f.empty()) throw SchemaError("empty column name in header");
        if (!seen.emplace(f).second) {
          throw SchemaError("duplicate column name '" + std::string(f) + "' in header");
        }
        header.emplace_back(f);
      }
      have_header = true;
      continue;
    }

    ++source_rows;
    if (fields.size() > header.size()) {
      throw IngestionError(record, "<extra>",
                           "row has " + std::to_string(fields.size()) + " cells, header has " +
                               std::to_string(header.size()));
    }
    std::vector<double> row(header.size());
    bool ok = true;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const std::string_view cell = c < fields.size() ? fields[c] : std::string_view{};
      if (!parse_finite(cell, row[c])) {
        if (!drop_na) {
          throw IngestionError(record, header[c],
                               cell.empty() ? "empty cell" : "'" + std::string(cell) + "'");
        }
        ok = false;
        break;
      }
    }
    if (!ok) {
      ++dropped;
      continue;
    }
    cells.insert(cells.end(), row.begin(), row.end());
  }

  if (!have_header) throw SchemaError("missing header row");
  const std::size_t kept = source_rows - dropped;
  if (kept < 2) {
    throw InsufficientDataError("only " + std::to_string(kept) + " usable data rows (" +
                                std::to_string(dropped) + " dropped)");
  }
  Matrix m(kept, header.size(), std::move(cells));
  return LoadResult{Dataset(std::move(header), std::move(m)), dropped, source_rows};
}

LoadResult load_csv(const std::filesystem::path& path, bool drop_na) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), drop_na);
}

namespace {

struct ColumnMoments {
  double mean = 0.0;
  double std = 0.0;
};

ColumnMoments column_moments(const Matrix& m, std::size_t c) {
  const double n = static_cast<double>(m.rows());
  double sum = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) sum += m(r, c);
  const double mean = sum / n;
  double ss = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double d = m(r, c) - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / n)};
}

}  // namespace

Dataset standardize(const Dataset& d) {
  Matrix out = d.values();
  for (std::size_t c = 0; c < out.cols(); ++c) {
    const auto [mean, sd] = column_moments(d.values(), c);
    double max_abs = 0.0;
    for (std::size_t r = 0; r < out.rows(); ++r) max_abs = std::max(max_abs, std::abs(out(r, c)));
    // Spread at the rounding-noise level of the column counts as constant.
    const bool constant = !(sd > 1e-13 * max_abs);
    for (std::size_t r = 0; r < out.rows(); ++r) {
      out(r, c) = constant ? 0.0 : (out(r, c) - mean) / sd;
    }
  }
  return Dataset(d.columns(), std::move(out), d.key_features(), Scaling::standardized);
}

Dataset minmax_scale(const Dataset& d) {
  Matrix out = d.values();
  for (std::size_t c = 0; c < out.cols(); ++c) {
    double lo = out(0, c);
    double hi = out(0, c);
    for (std::size_t r = 1; r < out.rows(); ++r) {
      lo = std::min(lo, out(r, c));
      hi = std::max(hi, out(r, c));
    }
    const double span = hi - lo;
    for (std::size_t r = 0; r < out.rows(); ++r) {
      out(r, c) = span > 0.0 ? std::clamp((out(r, c) - lo) / span, 0.0, 1.0) : 0.5;
    }
  }
  return Dataset(d.columns(), std::move(out), d.key_features(), Scaling::minmax);
}

}  // namespace clustertune
