#include "memv/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "memv/errors.hpp"

namespace memv {

namespace {

// Splits one physical line into fields. Quoted fields may contain commas
// and doubled quotes; quotes elsewhere are taken literally.
std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(ch);
      }
    } else if (ch == '"' && current.empty()) {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return s.substr(b, e - b);
}

double parse_number(const std::string& raw, const std::string& column,
                    long row) {
  const std::string s = trim(raw);
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || begin == end ||
      !std::isfinite(value)) {
    std::ostringstream msg;
    msg << "row " << row << ": cannot parse '" << raw << "' in column '"
        << column << "' as a number";
    throw data_error(msg.str());
  }
  return value;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& response,
                 const std::vector<std::string>& covariates) {
  if (covariates.empty()) {
    throw usage_error("at least one covariate column is required");
  }
  std::vector<std::string> selectors;
  selectors.push_back(response);
  selectors.insert(selectors.end(), covariates.begin(), covariates.end());
  for (std::size_t i = 0; i < selectors.size(); ++i) {
    for (std::size_t j = i + 1; j < selectors.size(); ++j) {
      if (selectors[i] == selectors[j]) {
        throw usage_error("column '" + selectors[i] + "' selected twice");
      }
    }
  }

  std::ifstream in(path);
  if (!in) {
    throw data_error("cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw data_error("'" + path + "' is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header_raw = split_fields(line);
  std::vector<std::string> header;
  header.reserve(header_raw.size());
  for (const std::string& h : header_raw) header.push_back(trim(h));

  std::vector<Eigen::Index> col_of;
  col_of.reserve(selectors.size());
  for (const std::string& name : selectors) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw data_error("column '" + name + "' not found in '" + path + "'");
    }
    col_of.push_back(it - header.begin());
  }

  std::vector<double> y_values;
  std::vector<double> w_values;
  long row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const std::vector<std::string> fields = split_fields(line);
    for (std::size_t k = 0; k < selectors.size(); ++k) {
      if (col_of[k] >= static_cast<Eigen::Index>(fields.size())) {
        std::ostringstream msg;
        msg << "row " << row << ": only " << fields.size()
            << " fields, column '" << selectors[k] << "' is missing";
        throw data_error(msg.str());
      }
      const double v = parse_number(fields[static_cast<std::size_t>(col_of[k])],
                                    selectors[k], row);
      (k == 0 ? y_values : w_values).push_back(v);
    }
  }
  if (row == 0) {
    throw data_error("'" + path + "' contains no data rows");
  }

  const Eigen::Index n = row;
  const Eigen::Index m = static_cast<Eigen::Index>(covariates.size());
  Eigen::VectorXd y(n);
  Eigen::MatrixXd w(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = y_values[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m; ++j) {
      w(i, j) = w_values[static_cast<std::size_t>(i * m + j)];
    }
  }
  return Dataset(std::move(y), std::move(w), covariates);
}

}  // namespace memv
