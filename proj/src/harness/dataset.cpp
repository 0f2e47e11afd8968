#include "rfsr/harness/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rfsr/errors.hpp"

namespace rfsr::harness {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, delimiter)) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == delimiter) cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no, std::size_t column) {
  const std::string where =
      "csv line " + std::to_string(line_no) + ", column " + std::to_string(column);
  if (cell.empty()) throw InvalidArgument(where + ": empty cell");
  // Accept a leading '+' and the unicode minus that spreadsheets sometimes emit.
  std::string text = cell;
  if (text.rfind("\xE2\x88\x92", 0) == 0) text = "-" + text.substr(3);
  if (text.front() == '+') text.erase(0, 1);
  double value = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw InvalidArgument(where + ": non-numeric cell '" + cell + "'");
  if (!std::isfinite(value)) throw InvalidArgument(where + ": non-finite value");
  return value;
}

}  // namespace

void standardization_stats(const Matrix& X, std::size_t rows, Vector& mean, Vector& scale) {
  if (rows == 0 || rows > static_cast<std::size_t>(X.rows()))
    throw InvalidArgument("standardization: training rows out of range");
  const auto head = X.topRows(static_cast<Eigen::Index>(rows));
  mean = head.colwise().mean().transpose();
  scale.resize(X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double var = (head.col(c).array() - mean(c)).square().mean();
    scale(c) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
}

void apply_standardization(Matrix& X, const Vector& mean, const Vector& scale) {
  if (mean.size() != X.cols() || scale.size() != X.cols())
    throw DimensionMismatch("standardization: statistics do not match the column count");
  X.rowwise() -= mean.transpose();
  X.array().rowwise() /= scale.transpose().array();
}

CsvDataset parse_csv_dataset(const std::string& text, const CsvOptions& options) {
  if (options.label_column < 0) throw InvalidArgument("csv: label column must be >= 0");
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  std::vector<int> columns = options.feature_columns;
  std::vector<double> values;
  std::vector<double> labels;
  bool header_pending = options.header;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    if (options.max_rows && labels.size() >= *options.max_rows) break;
    const auto cells = split(line, options.delimiter);
    if (width == 0) {
      width = cells.size();
      if (static_cast<std::size_t>(options.label_column) >= width)
        throw InvalidArgument("csv line " + std::to_string(line_no) + ": label column " +
                              std::to_string(options.label_column) + " out of range");
      if (columns.empty()) {
        for (int c = 0; c < static_cast<int>(width); ++c)
          if (c != options.label_column) columns.push_back(c);
      }
      for (int c : columns)
        if (c < 0 || static_cast<std::size_t>(c) >= width || c == options.label_column)
          throw InvalidArgument("csv: feature column " + std::to_string(c) + " is invalid");
    } else if (cells.size() != width) {
      throw InvalidArgument("csv line " + std::to_string(line_no) + ": expected " +
                            std::to_string(width) + " columns, found " +
                            std::to_string(cells.size()));
    }
    labels.push_back(parse_cell(cells[static_cast<std::size_t>(options.label_column)], line_no,
                                static_cast<std::size_t>(options.label_column)));
    for (int c : columns)
      values.push_back(parse_cell(cells[static_cast<std::size_t>(c)], line_no,
                                  static_cast<std::size_t>(c)));
  }
  if (labels.empty()) throw InvalidArgument("csv: no data rows");

  CsvDataset out;
  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto d = static_cast<Eigen::Index>(columns.size());
  out.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, d);
  out.y = Eigen::Map<const Vector>(labels.data(), n);
  if (options.expected_dim && *options.expected_dim != static_cast<int>(d))
    out.warnings.push_back("csv: " + std::to_string(d) + " feature columns but " +
                           std::to_string(*options.expected_dim) +
                           " expected; select columns explicitly to match");
  if (options.standardize) {
    const std::size_t rows = options.train_rows.value_or(labels.size());
    standardization_stats(out.X, rows, out.mean, out.scale);
    apply_standardization(out.X, out.mean, out.scale);
  }
  return out;
}

CsvDataset ingest_csv_dataset(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("csv: cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (trim(text).empty()) throw InvalidArgument("csv: '" + path.string() + "' is empty");
  return parse_csv_dataset(text, options);
}

}  // namespace rfsr::harness
