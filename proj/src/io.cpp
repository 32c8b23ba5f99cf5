#include "r2margin/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <type_traits>

namespace r2margin {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                               : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no, std::size_t column) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last) {
    throw InputFormatError("line " + std::to_string(line_no) + ", column " + std::to_string(column) +
                           ": cannot parse '" + std::string(field) + "' as a number");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) {
      throw InputFormatError("line " + std::to_string(line_no) + ", column " + std::to_string(column) +
                             ": non-finite value");
    }
  }
  return value;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool skippable(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

}  // namespace

LabeledDataset read_data_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  LabeledDataset out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw InputFormatError("data CSV is empty");
  for (auto f : split_fields(line)) out.header.emplace_back(f);
  if (line_no == 1 && out.header.front().rfind("\xEF\xBB\xBF", 0) == 0) out.header.front().erase(0, 3);
  const std::size_t columns = out.header.size();
  if (columns < 2) throw InputFormatError("data CSV needs an outcome column and at least one covariate");

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != columns) {
      throw InputFormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                             " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < columns; ++c) values.push_back(parse_number<double>(fields[c], line_no, c + 1));
    ++rows;
  }
  const auto n = static_cast<Eigen::Index>(rows);
  const auto k = static_cast<Eigen::Index>(columns - 1);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> table(
      values.data(), n, k + 1);
  out.data.y = table.col(0);
  out.data.x = table.rightCols(k);
  return out;
}

SimulationConfig parse_simulation_config(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputFormatError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("scenarios") || !doc["scenarios"].is_array() ||
      doc["scenarios"].empty()) {
    throw InputFormatError("config: expected an object with a non-empty \"scenarios\" array");
  }

  auto number = [](const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_number()) {
      throw InputFormatError(where + ": \"" + key + "\" must be a number");
    }
    return obj[key].get<double>();
  };
  auto integer = [](const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_number_integer()) {
      throw InputFormatError(where + ": \"" + key + "\" must be an integer");
    }
    return obj[key].get<long>();
  };

  SimulationConfig config;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < doc["scenarios"].size(); ++i) {
    const json& item = doc["scenarios"][i];
    const std::string where = "config: scenarios[" + std::to_string(i) + "]";
    if (!item.is_object()) throw InputFormatError(where + " must be an object");
    if (!item.contains("id") || !item["id"].is_string()) throw InputFormatError(where + ": \"id\" must be a string");
    Scenario s;
    s.id = item["id"].get<std::string>();
    if (!ids.insert(s.id).second) throw InputFormatError(where + ": duplicate id '" + s.id + "'");
    s.n = integer(item, "n", where);
    s.k = integer(item, "k", where);
    if (!item.contains("beta") || !item["beta"].is_array()) {
      throw InputFormatError(where + ": \"beta\" must be an array");
    }
    s.beta.resize(static_cast<Eigen::Index>(item["beta"].size()));
    for (std::size_t j = 0; j < item["beta"].size(); ++j) {
      if (!item["beta"][j].is_number()) throw InputFormatError(where + ": beta entries must be numbers");
      s.beta(static_cast<Eigen::Index>(j)) = item["beta"][j].get<double>();
    }
    s.sigma2 = number(item, "sigma2", where);
    const double offdiag = number(item, "sigma_offdiag", where);
    if (s.k < 1) throw InputFormatError(where + ": k must be >= 1");
    s.sigma_matrix = exchangeable_covariance(s.k, offdiag);
    try {
      validate(s);
    } catch (const std::exception& e) {
      throw InputFormatError(where + ": " + e.what());
    }
    config.scenarios.push_back(std::move(s));
  }

  if (doc.contains("deltas")) {
    if (!doc["deltas"].is_array() || doc["deltas"].empty()) {
      throw InputFormatError("config: \"deltas\" must be a non-empty array");
    }
    for (const auto& d : doc["deltas"]) {
      if (!d.is_number()) throw InputFormatError("config: deltas must be numbers");
      const double value = d.get<double>();
      if (!(value > 0.0 && value < 1.0)) throw InputFormatError("config: every delta must lie in (0, 1)");
      config.deltas.push_back(value);
    }
  } else {
    config.deltas = default_deltas();
  }
  return config;
}

void write_results_csv(std::ostream& out, std::vector<RejectionRecord> records, std::string_view comment) {
  std::stable_sort(records.begin(), records.end(), [](const RejectionRecord& a, const RejectionRecord& b) {
    if (a.scenario_id != b.scenario_id) return a.scenario_id < b.scenario_id;
    return a.delta < b.delta;
  });
  if (!comment.empty()) out << "# " << comment << '\n';
  out << kResultsHeader << '\n';
  for (const auto& r : records) {
    out << r.scenario_id << ',' << r.n << ',' << r.k << ',' << format_number(r.sigma2) << ','
        << format_number(r.true_p2) << ',' << format_number(r.delta) << ',' << format_number(r.alpha) << ','
        << r.n_sims << ',' << r.rejections << ',' << format_number(r.rejection_rate) << ',' << r.skipped << ','
        << r.master_seed << '\n';
  }
}

std::vector<RejectionRecord> read_results_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    for (auto f : split_fields(line)) header.emplace_back(f);
    break;
  }
  if (header.empty()) throw InputFormatError("results CSV has no header");

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;
  for (auto required : split_fields(kResultsHeader)) {
    if (!index.count(std::string(required))) {
      throw InputFormatError("results CSV is missing column '" + std::string(required) + "'");
    }
  }
  auto col = [&](const char* name) { return index.at(name); };

  std::vector<RejectionRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto f = split_fields(line);
    if (f.size() != header.size()) {
      throw InputFormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                             " fields");
    }
    RejectionRecord r;
    r.scenario_id = std::string(f[col("scenario_id")]);
    r.n = parse_number<long>(f[col("n")], line_no, col("n") + 1);
    r.k = parse_number<long>(f[col("k")], line_no, col("k") + 1);
    r.sigma2 = parse_number<double>(f[col("sigma2")], line_no, col("sigma2") + 1);
    r.true_p2 = parse_number<double>(f[col("true_p2")], line_no, col("true_p2") + 1);
    r.delta = parse_number<double>(f[col("delta")], line_no, col("delta") + 1);
    r.alpha = parse_number<double>(f[col("alpha")], line_no, col("alpha") + 1);
    r.n_sims = parse_number<std::uint64_t>(f[col("n_sims")], line_no, col("n_sims") + 1);
    r.rejections = parse_number<std::uint64_t>(f[col("rejections")], line_no, col("rejections") + 1);
    r.rejection_rate = parse_number<double>(f[col("rejection_rate")], line_no, col("rejection_rate") + 1);
    r.skipped = parse_number<std::uint64_t>(f[col("skipped")], line_no, col("skipped") + 1);
    r.master_seed = parse_number<std::uint64_t>(f[col("master_seed")], line_no, col("master_seed") + 1);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace r2margin
