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

#pragma once

#include "shadowmed/data_model.hpp"

#include <string>

namespace shadowmed {

// Sidecar descriptor, e.g.
//   {"k": 2, "z": ["z"], "x_miss": ["x1"], "x_obs": ["x2", "x3"],
//    "m": [["m1"], ["m2"]]}
// Columns r, a and y are fixed names.
std::string descriptor_json(const Dataset& dataset);

// Reads `r,z...,x_miss...,x_obs...,a,m1...,...,mK...,y`. Empty or NA cells
// in x_miss mark the block missing. Values are checked but the dataset is
// not validated; callers decide (the oracle path accepts r = 0 rows with X).
Dataset read_dataset_csv_text(const std::string& csv, const std::string& descriptor);
Dataset read_dataset(const std::string& csv_path, const std::string& descriptor_path);

std::string dataset_csv_text(const Dataset& dataset);
void write_dataset(const Dataset& dataset, const std::string& csv_path, const std::string& descriptor_path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace shadowmed
