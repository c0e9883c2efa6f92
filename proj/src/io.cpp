/*
  Copyright 2026 The shadowmed Authors

  Licensed under the Apache License, Version 2.0 (the "License");
  you may not use this file except in compliance with the License.
  You may obtain a copy of the License at

  http://www.apache.org/licenses/LICENSE-2.0

  Unless required by applicable law or agreed to in writing, software
  distributed under the License is distributed on an "AS IS" BASIS,
  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
  See the License for the specific language governing permissions and
  limitations under the License.
*/

#include "shadowmed/io.hpp"

#include "shadowmed/error.hpp"
#include "shadowmed/format.hpp"

#include "json.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace shadowmed {

using nlohmann::json;

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool is_missing_cell(const std::string& cell) { return cell.empty() || cell == "NA"; }

double parse_number(const std::string& cell, std::size_t line, const std::string& column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw Error(ErrorCode::IoError,
                "line " + std::to_string(line) + ", column '" + column + "': not a number: '" + cell + "'");
  return v;
}

std::vector<std::string> string_list(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  return j.at(key).get<std::vector<std::string>>();
}

}  // namespace

std::string descriptor_json(const Dataset& dataset) {
  const ColumnNames& names = dataset.names();
  nlohmann::ordered_json j;
  j["k"] = dataset.k();
  j["z"] = names.z;
  j["x_miss"] = names.x_miss;
  j["x_obs"] = names.x_obs;
  j["m"] = names.m;
  return j.dump(2) + "\n";
}

Dataset read_dataset_csv_text(const std::string& csv, const std::string& descriptor) {
  ColumnNames names;
  int k = 0;
  try {
    const json d = json::parse(descriptor);
    names.z = string_list(d, "z");
    names.x_miss = string_list(d, "x_miss");
    names.x_obs = string_list(d, "x_obs");
    names.m = d.at("m").get<std::vector<std::vector<std::string>>>();
    k = d.value("k", static_cast<int>(names.m.size()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad descriptor: ") + e.what());
  }
  if (k != static_cast<int>(names.m.size()) || k < 1)
    throw Error(ErrorCode::ConfigError, "descriptor k must equal the number of mediator groups (>= 1)");
  if (names.z.empty() || names.x_miss.empty())
    throw Error(ErrorCode::ConfigError, "descriptor needs at least one z and one x_miss column");

  Dims dims;
  dims.z = static_cast<int>(names.z.size());
  dims.x_miss = static_cast<int>(names.x_miss.size());
  dims.x_obs = static_cast<int>(names.x_obs.size());
  for (const auto& block : names.m) {
    if (block.empty()) throw Error(ErrorCode::ConfigError, "empty mediator group in descriptor");
    dims.m.push_back(static_cast<int>(block.size()));
  }

  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::IoError, "CSV has no header");
  const auto header = split_line(line);
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < header.size(); ++i) pos[header[i]] = i;
  auto column = [&](const std::string& name) {
    auto it = pos.find(name);
    if (it == pos.end()) throw Error(ErrorCode::IoError, "CSV header lacks column '" + name + "'");
    return it->second;
  };
  auto columns = [&](const std::vector<std::string>& list) {
    std::vector<std::size_t> out;
    for (const auto& n : list) out.push_back(column(n));
    return out;
  };
  const std::size_t c_r = column("r"), c_a = column("a"), c_y = column("y");
  const auto c_z = columns(names.z), c_xm = columns(names.x_miss), c_xo = columns(names.x_obs);
  std::vector<std::vector<std::size_t>> c_m;
  for (const auto& block : names.m) c_m.push_back(columns(block));

  std::vector<ObservedRecord> records;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::IoError, "line " + std::to_string(lineno) + ": expected " +
                                          std::to_string(header.size()) + " fields");
    auto num = [&](std::size_t c) {
      if (is_missing_cell(cells[c]))
        throw Error(ErrorCode::IoError,
                    "line " + std::to_string(lineno) + ": column '" + header[c] + "' may not be missing");
      return parse_number(cells[c], lineno, header[c]);
    };
    auto vec = [&](const std::vector<std::size_t>& cols) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(cols.size()));
      for (std::size_t j = 0; j < cols.size(); ++j) v(static_cast<Eigen::Index>(j)) = num(cols[j]);
      return v;
    };
    ObservedRecord rec;
    const double r = num(c_r), a = num(c_a);
    if ((r != 0.0 && r != 1.0) || (a != 0.0 && a != 1.0))
      throw Error(ErrorCode::DimensionMismatch, "line " + std::to_string(lineno) + ": r and a must be 0/1");
    rec.r = static_cast<int>(r);
    rec.a = static_cast<int>(a);
    rec.z = vec(c_z);
    std::size_t missing = 0;
    for (auto c : c_xm) missing += is_missing_cell(cells[c]) ? 1 : 0;
    if (missing != 0 && missing != c_xm.size())
      throw Error(ErrorCode::DimensionMismatch,
                  "line " + std::to_string(lineno) + ": x_miss block must be all observed or all missing");
    if (missing == 0) rec.x_miss = vec(c_xm);
    rec.x_obs = vec(c_xo);
    for (const auto& block : c_m) rec.m.push_back(vec(block));
    rec.y = num(c_y);
    records.push_back(std::move(rec));
  }
  return Dataset(std::move(records), std::move(dims), std::move(names));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

Dataset read_dataset(const std::string& csv_path, const std::string& descriptor_path) {
  const std::string descriptor = read_text_file(descriptor_path);
  return read_dataset_csv_text(read_text_file(csv_path), descriptor);
}

std::string dataset_csv_text(const Dataset& dataset) {
  std::ostringstream os;
  const auto header = dataset.names().header();
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  auto put = [&](const Eigen::VectorXd& v) {
    for (Eigen::Index j = 0; j < v.size(); ++j) os << ',' << format_double(v(j));
  };
  for (const auto& rec : dataset.records()) {
    os << rec.r;
    put(rec.z);
    if (rec.x_miss)
      put(*rec.x_miss);
    else
      for (int j = 0; j < dataset.dims().x_miss; ++j) os << ",NA";
    put(rec.x_obs);
    os << ',' << rec.a;
    for (const auto& m : rec.m) put(m);
    os << ',' << format_double(rec.y) << '\n';
  }
  return os.str();
}

void write_dataset(const Dataset& dataset, const std::string& csv_path, const std::string& descriptor_path) {
  write_text_file(csv_path, dataset_csv_text(dataset));
  write_text_file(descriptor_path, descriptor_json(dataset));
}

}  // namespace shadowmed
