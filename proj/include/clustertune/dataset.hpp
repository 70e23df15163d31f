#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "clustertune/matrix.hpp"

namespace clustertune {

enum class Scaling { raw, standardized, minmax };

std::string_view to_string(Scaling s) noexcept;

// Immutable numeric feature matrix with named columns.
//
// Invariants enforced at construction: rows >= 2, columns >= 1, every cell
// finite, column names unique and nonempty, key features a subset of the
// columns. When no key features are given, every column is a key feature.
class Dataset {
 public:
  Dataset(std::vector<std::string> columns, Matrix values,
          std::vector<std::string> key_features = {}, Scaling scaling = Scaling::raw);

  std::size_t rows() const noexcept { return values_.rows(); }
  std::size_t cols() const noexcept { return values_.cols(); }
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::string>& key_features() const noexcept { return key_features_; }
  const Matrix& values() const noexcept { return values_; }
  Scaling scaling() const noexcept { return scaling_; }

  // Index of a column by name; throws SchemaError when absent.
  std::size_t column_index(std::string_view name) const;

  // Same values, new key-feature selection (validated).
  Dataset with_key_features(std::vector<std::string> key_features) const;

 private:
  std::vector<std::string> columns_;
  Matrix values_;
  std::vector<std::string> key_features_;
  Scaling scaling_;
};

struct LoadResult {
  Dataset dataset;
  std::size_t dropped_rows = 0;
  std::size_t source_rows = 0;
};

// Reads a comma-delimited UTF-8 CSV whose first record is the header.
// Unparseable or empty cells raise IngestionError unless drop_na is set, in
// which case the offending rows are skipped and counted.
LoadResult load_csv(const std::filesystem::path& path, bool drop_na = false);

// Same as load_csv but from in-memory text.
LoadResult parse_csv(std::string_view text, bool drop_na = false);

// z-score per column with the population standard deviation (divisor n);
// constant columns become all-zero.
Dataset standardize(const Dataset& d);

// Affine map of each column onto [0,1]; constant columns become all-0.5.
Dataset minmax_scale(const Dataset& d);

}  // namespace clustertune
