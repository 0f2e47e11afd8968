#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rfsr/types.hpp"

namespace rfsr::harness {

struct CsvOptions {
  /// Zero-based column holding the label.
  int label_column = 0;
  char delimiter = ',';
  bool header = false;
  std::optional<std::size_t> max_rows;
  /// Zero-based feature columns to keep, in order. Empty keeps every
  /// non-label column.
  std::vector<int> feature_columns;
  /// Warn when the resulting feature count differs from this.
  std::optional<int> expected_dim;
  bool standardize = false;
  /// Rows used for standardization statistics (the training split). Empty
  /// means all rows.
  std::optional<std::size_t> train_rows;
};

struct CsvDataset {
  Matrix X;
  Vector y;
  /// Per-feature shift and scale applied when standardizing (empty otherwise).
  Vector mean;
  Vector scale;
  std::vector<std::string> warnings;
};

/// Throws InvalidArgument with a line number on malformed input.
CsvDataset ingest_csv_dataset(const std::filesystem::path& path, const CsvOptions& options = {});
CsvDataset parse_csv_dataset(const std::string& text, const CsvOptions& options = {});

/// Column means and standard deviations over the first `rows` rows. Zero
/// deviations are replaced by one.
void standardization_stats(const Matrix& X, std::size_t rows, Vector& mean, Vector& scale);
void apply_standardization(Matrix& X, const Vector& mean, const Vector& scale);

}  // namespace rfsr::harness
