#pragma once

// CSV ingestion and emission for the three table schemas:
//   labeled data   x_1..x_p, y_1..y_d
//   feature sets   x_1..x_p
//   predictions    id, yhat_1..yhat_d   (ids exactly 0..m-1)
// Parsing is strict: header row required, plain decimal numbers, every value
// finite. Violations raise DataError.

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "confsel/core.hpp"

namespace confsel::csv {

struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// ===== low-level cells =====

inline std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline double parse_cell(const std::string& cell, const std::string& context) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (last[-1] == ' ' || last[-1] == '\r' || last[-1] == '\t')) --last;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw DataError(context + ": cannot parse numeric cell '" + cell + "'");
  if (!std::isfinite(v)) throw DataError(context + ": non-finite value");
  return v;
}

// Shortest round-trip decimal form; keeps emitted files byte-stable.
inline std::string format_number(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw DataError(path + ": empty file");
  return lines;
}

namespace detail {

inline void check_header(const std::vector<std::string>& header,
                         const std::vector<std::string>& expected, const std::string& path) {
  if (header.size() != expected.size())
    throw DataError(path + ": expected " + std::to_string(expected.size()) +
                    " header columns, found " + std::to_string(header.size()));
  for (std::size_t i = 0; i < expected.size(); ++i) {
    std::string h = header[i];
    while (!h.empty() && (h.back() == ' ' || h.back() == '\t')) h.pop_back();
    while (!h.empty() && (h.front() == ' ' || h.front() == '\t')) h.erase(h.begin());
    if (h != expected[i])
      throw DataError(path + ": header column " + std::to_string(i + 1) + " is '" + h +
                      "', expected '" + expected[i] + "'");
  }
}

inline std::vector<std::string> numbered(const std::string& stem, int count) {
  std::vector<std::string> names;
  names.reserve(count);
  for (int i = 1; i <= count; ++i) names.push_back(stem + std::to_string(i));
  return names;
}

// Counts columns matching stem_1, stem_2, ... at position `from`.
inline int count_prefixed(const std::vector<std::string>& header, const std::string& stem,
                          std::size_t from) {
  int n = 0;
  for (std::size_t i = from; i < header.size(); ++i) {
    if (header[i] == stem + std::to_string(n + 1))
      ++n;
    else
      break;
  }
  return n;
}

}  // namespace detail

// ===== schema readers =====

inline core::LabeledSet read_labeled(const std::string& path) {
  const auto lines = read_lines(path);
  const auto header = split_row(lines.front());
  const int p = detail::count_prefixed(header, "x_", 0);
  if (p < 1) throw DataError(path + ": expected leading x_1..x_p columns");
  const int d = detail::count_prefixed(header, "y_", p);
  if (d < 1) throw DataError(path + ": expected trailing y_1..y_d columns");
  auto expected = detail::numbered("x_", p);
  for (auto& y : detail::numbered("y_", d)) expected.push_back(y);
  detail::check_header(header, expected, path);

  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  if (n < 1) throw DataError(path + ": no data rows");
  Eigen::MatrixXd x(n, p), y(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto cells = split_row(lines[r + 1]);
    if (static_cast<int>(cells.size()) != p + d)
      throw DataError(path + ": row " + std::to_string(r + 2) + " has " +
                      std::to_string(cells.size()) + " cells, expected " + std::to_string(p + d));
    const std::string ctx = path + ": row " + std::to_string(r + 2);
    for (int c = 0; c < p; ++c) x(r, c) = parse_cell(cells[c], ctx);
    for (int c = 0; c < d; ++c) y(r, c) = parse_cell(cells[p + c], ctx);
  }
  return core::LabeledSet(std::move(x), std::move(y));
}

inline core::FeatureSet read_features(const std::string& path) {
  const auto lines = read_lines(path);
  const auto header = split_row(lines.front());
  const int p = detail::count_prefixed(header, "x_", 0);
  if (p < 1) throw DataError(path + ": expected x_1..x_p columns");
  detail::check_header(header, detail::numbered("x_", p), path);

  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  if (n < 1) throw DataError(path + ": no data rows");
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto cells = split_row(lines[r + 1]);
    if (static_cast<int>(cells.size()) != p)
      throw DataError(path + ": row " + std::to_string(r + 2) + " has wrong cell count");
    const std::string ctx = path + ": row " + std::to_string(r + 2);
    for (int c = 0; c < p; ++c) x(r, c) = parse_cell(cells[c], ctx);
  }
  return core::FeatureSet(std::move(x));
}

// Precomputed predictions, one row per unit. Rows may appear in any order but
// ids must be exactly 0..m-1 with no gaps or repeats.
inline Eigen::MatrixXd read_predictions(const std::string& path) {
  const auto lines = read_lines(path);
  const auto header = split_row(lines.front());
  if (header.empty() || header.front() != "id")
    throw DataError(path + ": first column must be 'id'");
  const int d = detail::count_prefixed(header, "yhat_", 1);
  if (d < 1) throw DataError(path + ": expected yhat_1..yhat_d columns");
  std::vector<std::string> expected{"id"};
  for (auto& c : detail::numbered("yhat_", d)) expected.push_back(c);
  detail::check_header(header, expected, path);

  const auto m = static_cast<Eigen::Index>(lines.size() - 1);
  if (m < 1) throw DataError(path + ": no data rows");
  Eigen::MatrixXd preds(m, d);
  std::vector<bool> seen(m, false);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto cells = split_row(lines[r + 1]);
    if (static_cast<int>(cells.size()) != d + 1)
      throw DataError(path + ": row " + std::to_string(r + 2) + " has wrong cell count");
    const std::string ctx = path + ": row " + std::to_string(r + 2);
    const double id_raw = parse_cell(cells[0], ctx);
    const auto id = static_cast<Eigen::Index>(id_raw);
    if (static_cast<double>(id) != id_raw || id < 0 || id >= m)
      throw DataError(ctx + ": id must be an integer in [0, " + std::to_string(m - 1) + "]");
    if (seen[id]) throw DataError(ctx + ": duplicate id " + std::to_string(id));
    seen[id] = true;
    for (int c = 0; c < d; ++c) preds(id, c) = parse_cell(cells[c + 1], ctx);
  }
  return preds;
}

// ===== schema writers =====

inline void write_labeled(const std::string& path, const core::LabeledSet& set) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  const int p = static_cast<int>(set.feature_dim());
  const int d = static_cast<int>(set.response_dim());
  for (int c = 1; c <= p; ++c) out << "x_" << c << (c < p || d > 0 ? "," : "");
  for (int c = 1; c <= d; ++c) out << "y_" << c << (c < d ? "," : "");
  out << "\n";
  for (Eigen::Index r = 0; r < set.rows(); ++r) {
    for (int c = 0; c < p; ++c) out << format_number(set.features()(r, c)) << ",";
    for (int c = 0; c < d; ++c)
      out << format_number(set.responses()(r, c)) << (c + 1 < d ? "," : "");
    out << "\n";
  }
}

inline void write_predictions(const std::string& path, const Eigen::MatrixXd& preds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << "id";
  for (int c = 1; c <= preds.cols(); ++c) out << ",yhat_" << c;
  out << "\n";
  for (Eigen::Index r = 0; r < preds.rows(); ++r) {
    out << r;
    for (int c = 0; c < preds.cols(); ++c) out << "," << format_number(preds(r, c));
    out << "\n";
  }
}

}  // namespace confsel::csv
