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

#ifndef TRIPHASE_CSV_HPP
#define TRIPHASE_CSV_HPP

#include <ostream>
#include <string>
#include <vector>

namespace triphase {

// Locale-independent numeric formatting (period decimal separator, enough
// digits to round-trip a double).
std::string format_double(double v);
std::string format_double(double v, int precision);

// Minimal CSV emitter: header row followed by data rows, comma separated,
// no quoting (field values never contain commas here).
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& os_;
};

}  // namespace triphase

#endif  // TRIPHASE_CSV_HPP
