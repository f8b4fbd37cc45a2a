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

#include "brainalign/dataio/container.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace brainalign::dataio {

namespace {

constexpr std::uint8_t kMagic[4] = {'N', 'B', 'T', 'F'};
constexpr std::uint8_t kArchiveMagic[4] = {'N', 'B', 'T', 'A'};

template <class U>
void put_le(std::vector<std::uint8_t>& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <class U>
U get_le(std::span<const std::uint8_t> bytes, std::size_t pos) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[pos + i]) << (8 * i);
  return v;
}

void need(std::span<const std::uint8_t> bytes, std::size_t pos, std::size_t n, const char* what,
          std::uint64_t base) {
  if (bytes.size() < pos + n)
    throw FormatError(std::string("truncated ") + what + ": need " + std::to_string(n) +
                          " bytes, " + std::to_string(bytes.size() - std::min(bytes.size(), pos)) +
                          " available",
                      base + std::min<std::uint64_t>(bytes.size(), pos));
}

}  // namespace

std::vector<std::uint8_t> encode_container(const Tensor& tensor) {
  if (tensor.ndim() > 255) throw ContractError("container: rank above 255");
  std::vector<std::uint8_t> out;
  out.reserve(10 + 8 * tensor.ndim() + tensor.size() * dtype_size(tensor.dtype()));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, kContainerVersion);
  out.push_back(static_cast<std::uint8_t>(tensor.dtype()));
  out.push_back(static_cast<std::uint8_t>(tensor.ndim()));
  for (std::size_t d : tensor.shape()) put_le<std::uint64_t>(out, d);
  visit_dtype(tensor.dtype(), [&]<class T>() {
    using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    for (T v : tensor.values<T>()) put_le<Bits>(out, std::bit_cast<Bits>(v));
  });
  return out;
}

Tensor decode_container(std::span<const std::uint8_t> bytes, std::uint64_t base) {
  need(bytes, 0, 10, "container header", base);
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    throw FormatError("bad container magic (expected NBTF)", base);
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kContainerVersion)
    throw FormatError("unsupported container version " + std::to_string(version), base + 4);
  const std::uint8_t code = bytes[8];
  if (code != 1 && code != 2) throw FormatError("unknown dtype code " + std::to_string(code), base + 8);
  const DType dtype = static_cast<DType>(code);
  const std::size_t ndim = bytes[9];
  need(bytes, 10, 8 * ndim, "dimension list", base);
  Shape shape(ndim);
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    const std::size_t pos = 10 + 8 * i;
    const auto d = get_le<std::uint64_t>(bytes, pos);
    if (d == 0) throw FormatError("zero-length dimension " + std::to_string(i), base + pos);
    if (d > (std::uint64_t(1) << 40) || count > (std::uint64_t(1) << 40) / d)
      throw FormatError("implausible dimension " + std::to_string(d), base + pos);
    shape[i] = static_cast<std::size_t>(d);
    count *= shape[i];
  }
  const std::size_t header = 10 + 8 * ndim;
  const std::size_t payload = count * dtype_size(dtype);
  need(bytes, header, payload, "payload", base);
  if (bytes.size() != header + payload)
    throw FormatError(std::to_string(bytes.size() - header - payload) + " trailing bytes after payload",
                      base + header + payload);
  Tensor t = Tensor::zeros(shape, dtype);
  visit_dtype(dtype, [&]<class T>() {
    using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    auto out = t.mutable_values<T>();
    for (std::size_t i = 0; i < count; ++i)
      out[i] = std::bit_cast<T>(get_le<Bits>(bytes, header + i * sizeof(T)));
  });
  return t;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void write_container(const std::filesystem::path& path, const Tensor& tensor) {
  write_file_atomic(path, encode_container(tensor));
}

Tensor read_container(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  try {
    return decode_container(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

const Tensor& Archive::at(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw ContractError("archive has no tensor named '" + name + "'");
}

bool Archive::contains(const std::string& name) const {
  return std::any_of(tensors.begin(), tensors.end(), [&](const auto& e) { return e.first == name; });
}

void write_archive(const std::filesystem::path& path, const Archive& archive) {
  nlohmann::json index;
  index["meta"] = archive.meta;
  index["tensors"] = nlohmann::json::array();
  std::vector<std::uint8_t> payload;
  for (const auto& [name, tensor] : archive.tensors) {
    auto bytes = encode_container(tensor);
    index["tensors"].push_back({{"name", name}, {"offset", payload.size()}, {"length", bytes.size()}});
    payload.insert(payload.end(), bytes.begin(), bytes.end());
  }
  const std::string text = index.dump();
  std::vector<std::uint8_t> out(std::begin(kArchiveMagic), std::end(kArchiveMagic));
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), payload.begin(), payload.end());
  write_file_atomic(path, out);
}

Archive read_archive(const std::filesystem::path& path) {
  auto bytes = read_file(path);
  std::span<const std::uint8_t> all(bytes);
  need(all, 0, 16, "archive header", 0);
  if (!std::equal(std::begin(kArchiveMagic), std::end(kArchiveMagic), all.begin()))
    throw FormatError(path.string() + ": bad archive magic (expected NBTA)", 0);
  if (get_le<std::uint32_t>(all, 4) != 1) throw FormatError(path.string() + ": unsupported archive version", 4);
  const auto index_len = get_le<std::uint64_t>(all, 8);
  need(all, 16, index_len, "archive index", 0);
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(all.begin() + 16, all.begin() + 16 + static_cast<std::ptrdiff_t>(index_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": malformed archive index: " + e.what(), 16);
  }
  const std::size_t base = 16 + index_len;
  Archive archive;
  archive.meta = index.value("meta", nlohmann::json::object());
  for (const auto& entry : index.at("tensors")) {
    const std::size_t off = entry.at("offset"), len = entry.at("length");
    need(all, base + off, len, "archive entry", 0);
    archive.tensors.emplace_back(entry.at("name").get<std::string>(),
                                 decode_container(all.subspan(base + off, len), base + off));
  }
  return archive;
}

}  // namespace brainalign::dataio
