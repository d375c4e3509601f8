#pragma once

#include "eegscrub/error.hpp"
#include "eegscrub/features.hpp"
#include "eegscrub/signal.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace eegscrub {

inline constexpr double kDefaultRawFs = 256.0;

struct LabeledDataset {
  FeatureMatrix features;  // labels always present
  std::vector<std::string> class_names;
  std::string source;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

// Comma-separated fields; double quotes group commas and "" escapes a quote.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Whole-cell numeric parse; nullopt when the text is not a number.
inline std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc::result_out_of_range) return std::copysign(std::numeric_limits<double>::infinity(), s.front() == '-' ? -1.0 : 1.0);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string where(const std::string& source, std::size_t line, const std::string& column) {
  return source + ": row " + std::to_string(line) + (column.empty() ? "" : ", column '" + column + "'");
}

struct CsvLines {
  std::istream& is;
  std::size_t line_no = 0;
  bool next(std::string& line) {
    while (std::getline(is, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (!trim(line).empty()) return true;
    }
    return false;
  }
};

inline std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::io, "cannot open '" + path + "'");
  return is;
}

}  // namespace detail

inline const std::vector<std::string>& emotion_class_names() {
  static const std::vector<std::string> names = {"NEGATIVE", "NEUTRAL", "POSITIVE"};
  return names;
}

// NEGATIVE/NEUTRAL/POSITIVE in any case, or the integer codes 0/1/2.
inline std::optional<int> parse_emotion_label(std::string_view text) {
  const auto t = detail::lower(detail::trim(text));
  const auto& names = emotion_class_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (t == detail::lower(names[i])) return static_cast<int>(i);
  if (const auto v = detail::parse_double(t); v && (*v == 0.0 || *v == 1.0 || *v == 2.0)) return static_cast<int>(*v);
  return std::nullopt;
}

// With label_optional a file without the label column loads unlabeled
// (features.labels empty), for prediction inputs.
inline LabeledDataset read_feature_csv(std::istream& is, const std::string& source, const std::string& label_column = "label",
                                       bool label_optional = false) {
  detail::CsvLines lines{is};
  std::string line;
  if (!lines.next(line)) fail(ErrorKind::parse, source + ": empty file");
  const auto header = detail::split_csv_line(line);
  const auto lab_it = std::find(header.begin(), header.end(), label_column);
  const bool labeled = lab_it != header.end();
  if (!labeled && !label_optional) fail(ErrorKind::parse, source + ": no '" + label_column + "' column in header");
  const auto lab = labeled ? static_cast<std::size_t>(lab_it - header.begin()) : header.size();

  LabeledDataset ds;
  ds.source = source;
  ds.class_names = emotion_class_names();
  if (labeled) ds.features.labels.emplace();
  for (std::size_t j = 0; j < header.size(); ++j)
    if (j != lab) ds.features.feature_names.push_back(header[j]);
  while (lines.next(line)) {
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      fail(ErrorKind::parse, detail::where(source, lines.line_no, "") + ": expected " + std::to_string(header.size()) +
                                 " fields, found " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(header.size() - 1);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j == lab) continue;
      const auto v = detail::parse_double(cells[j]);
      if (!v || !std::isfinite(*v)) {
        fail(ErrorKind::parse, detail::where(source, lines.line_no, header[j]) + ": '" + cells[j] + "' is not a finite number");
      }
      row.push_back(*v);
    }
    if (labeled) {
      const auto y = parse_emotion_label(cells[lab]);
      if (!y) fail(ErrorKind::parse, detail::where(source, lines.line_no, label_column) + ": unknown label '" + cells[lab] + "'");
      ds.features.labels->push_back(*y);
    }
    ds.features.rows.push_back(std::move(row));
  }
  if (ds.features.rows.empty()) fail(ErrorKind::parse, source + ": no data rows");
  return ds;
}

inline LabeledDataset load_feature_csv(const std::string& path, const std::string& label_column = "label",
                                       bool label_optional = false) {
  auto is = detail::open_in(path);
  return read_feature_csv(is, path, label_column, label_optional);
}

// Header of feature names plus a trailing label column holding class names.
inline void write_feature_csv(std::ostream& os, const FeatureMatrix& fm,
                              const std::vector<std::string>& class_names = emotion_class_names()) {
  os.precision(17);
  for (std::size_t j = 0; j < fm.feature_names.size(); ++j) os << (j ? "," : "") << fm.feature_names[j];
  if (fm.labels) os << (fm.feature_names.empty() ? "" : ",") << "label";
  os << '\n';
  for (std::size_t r = 0; r < fm.rows.size(); ++r) {
    for (std::size_t j = 0; j < fm.rows[r].size(); ++j) os << (j ? "," : "") << fm.rows[r][j];
    if (fm.labels) {
      const int y = (*fm.labels)[r];
      os << (fm.rows[r].empty() ? "" : ",")
         << (y >= 0 && static_cast<std::size_t>(y) < class_names.size() ? class_names[static_cast<std::size_t>(y)] : std::to_string(y));
    }
    os << '\n';
  }
}

// ------------------------------------------------------------------ raw

struct RawLoad {
  Recording recording;
  std::size_t rejected_rows = 0;  // rows with a non-finite or empty cell
  bool dropped_timestamp = false;
};

inline bool is_timestamp_column(const std::string& name) {
  const auto n = detail::lower(name);
  return n == "timestamp" || n == "timestamps" || n == "time" || n == "time_s" || n == "t";
}

inline RawLoad read_raw_csv(std::istream& is, const std::string& source, double fs = kDefaultRawFs) {
  if (!(fs > 0.0) || !std::isfinite(fs)) fail(ErrorKind::invalid_argument, "sampling rate must be positive");
  detail::CsvLines lines{is};
  std::string line;
  if (!lines.next(line)) fail(ErrorKind::parse, source + ": empty file");
  auto header = detail::split_csv_line(line);
  const bool ts = !header.empty() && is_timestamp_column(header.front());
  const std::size_t first = ts ? 1 : 0;
  if (header.size() <= first) fail(ErrorKind::parse, source + ": no channel columns");
  std::vector<std::string> names(header.begin() + static_cast<std::ptrdiff_t>(first), header.end());
  std::vector<std::vector<double>> chans(names.size());
  std::size_t rejected = 0;
  while (lines.next(line)) {
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      fail(ErrorKind::parse, detail::where(source, lines.line_no, "") + ": expected " + std::to_string(header.size()) +
                                 " fields, found " + std::to_string(cells.size()));
    }
    std::vector<double> vals;
    bool finite = true;
    for (std::size_t j = first; j < cells.size(); ++j) {
      if (cells[j].empty()) {
        finite = false;
        continue;
      }
      const auto v = detail::parse_double(cells[j]);
      if (!v) fail(ErrorKind::parse, detail::where(source, lines.line_no, header[j]) + ": '" + cells[j] + "' is not a number");
      finite = finite && std::isfinite(*v);
      vals.push_back(*v);
    }
    if (!finite) {
      ++rejected;
      continue;
    }
    for (std::size_t c = 0; c < names.size(); ++c) chans[c].push_back(vals[c]);
  }
  if (chans.front().empty()) fail(ErrorKind::parse, source + ": no usable rows (" + std::to_string(rejected) + " rejected)");
  std::vector<Signal> sig;
  for (auto& c : chans) sig.emplace_back(std::move(c), fs);
  return {Recording(std::move(sig), std::move(names), {{"source", source}}), rejected, ts};
}

inline RawLoad load_raw_csv(const std::string& path, double fs = kDefaultRawFs) {
  auto is = detail::open_in(path);
  return read_raw_csv(is, path, fs);
}

inline void write_raw_csv(std::ostream& os, const Recording& rec) {
  os.precision(17);
  for (std::size_t c = 0; c < rec.channel_count(); ++c) os << (c ? "," : "") << rec.names()[c];
  os << '\n';
  for (std::size_t i = 0; i < rec.size(); ++i) {
    for (std::size_t c = 0; c < rec.channel_count(); ++c) os << (c ? "," : "") << rec.channel(c)[i];
    os << '\n';
  }
}

}  // namespace eegscrub
