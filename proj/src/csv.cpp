// Copyright 2026 The triphase Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "triphase/csv.hpp"

#include <cstdio>

namespace triphase {

std::string format_double(double v) { return format_double(v, 12); }

std::string format_double(double v, int precision) {
  char buf[64];
  // snprintf with the "C" numeric conventions: the tool never touches the
  // global locale, so the decimal separator is always a period.
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os_ << ',';
    os_ << fields[i];
  }
  os_ << '\n';
}

}  // namespace triphase
