// Copyright 2026 The brainalign Authors.
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

#include "brainalign/evalkit/export.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "brainalign/dataio/container.hpp"

namespace brainalign::evalkit {

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string similarity_csv(const Tensor& similarity) {
  if (similarity.ndim() != 2) throw DimensionError("similarity_csv: expected a matrix");
  const auto v = similarity.to_vector();
  const std::size_t cols = similarity.dim(1);
  std::string out;
  for (std::size_t r = 0; r < similarity.dim(0); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out += ',';
      out += format_double(v[r * cols + c]);
    }
    out += '\n';
  }
  return out;
}

Tensor parse_similarity_csv(const std::string& text) {
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t n = 0, start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      const std::string_view cell(line.data() + start, (comma == std::string::npos ? line.size() : comma) - start);
      double v = 0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw FormatError("similarity csv: bad number '" + std::string(cell) + "' on line " + std::to_string(rows + 1), 0);
      values.push_back(v);
      ++n;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (rows && n != cols) throw FormatError("similarity csv: ragged row " + std::to_string(rows + 1), 0);
    cols = n;
    ++rows;
  }
  if (!rows) throw FormatError("similarity csv: empty", 0);
  return Tensor::from_values(values, {rows, cols}, DType::f64);
}

std::string similarity_svg(const Tensor& similarity, std::size_t cell_px) {
  if (similarity.ndim() != 2) throw DimensionError("similarity_svg: expected a matrix");
  const auto v = similarity.to_vector();
  const std::size_t rows = similarity.dim(0), cols = similarity.dim(1);
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it, hi = *hi_it;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cols * cell_px << "\" height=\"" << rows * cell_px
     << "\" viewBox=\"0 0 " << cols * cell_px << ' ' << rows * cell_px << "\">\n";
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double t = hi > lo ? (v[r * cols + c] - lo) / (hi - lo) : 0.5;
      const int level = static_cast<int>(std::lround(255.0 * (1.0 - t)));
      os << "<rect class=\"cell\" x=\"" << c * cell_px << "\" y=\"" << r * cell_px << "\" width=\"" << cell_px
         << "\" height=\"" << cell_px << "\" fill=\"rgb(" << level << ',' << level << ',' << level << ")\"/>\n";
    }
  os << "</svg>\n";
  return os.str();
}

namespace {
void write_text(const std::filesystem::path& path, const std::string& text) {
  dataio::write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}
}  // namespace

void export_similarity(const RetrievalReport& report, const std::filesystem::path& stem) {
  if (!report.similarity.defined()) throw ContractError("export_similarity: report has no similarity matrix");
  auto csv = stem, svg = stem;
  csv += ".csv";
  svg += ".svg";
  write_text(csv, similarity_csv(report.similarity));
  write_text(svg, similarity_svg(report.similarity));
}

}  // namespace brainalign::evalkit
