// Copyright 2026 The Athena Authors.
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

// Little-endian binary encoding for model files, with a trailing CRC-32.

#pragma once

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "athena/errors.hpp"

namespace athena::binary {

inline std::uint32_t crc32_of(const std::uint8_t* data, std::size_t size) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in slices.
  while (size > 0) {
    const auto slice = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = ::crc32(crc, data, slice);
    data += slice;
    size -= slice;
  }
  return static_cast<std::uint32_t>(crc);
}

class Writer {
 public:
  void bytes(std::string_view s) { buffer_.insert(buffer_.end(), s.begin(), s.end()); }

  template <typename T>
  void put(T value) {
    static_assert(std::is_arithmetic_v<T>);
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    buffer_.insert(buffer_.end(), raw, raw + sizeof(T));
  }

  /// Appends the CRC-32 of everything written so far and flushes to out.
  void finish(std::ostream& out) {
    put<std::uint32_t>(crc32_of(buffer_.data(), buffer_.size()));
    out.write(reinterpret_cast<const char*>(buffer_.data()),
              static_cast<std::streamsize>(buffer_.size()));
    if (!out) throw Error("model write failed");
  }

 private:
  std::vector<std::uint8_t> buffer_;
};

class Reader {
 public:
  /// Reads the whole stream, checks magic and the trailing checksum.
  Reader(std::istream& in, std::string_view magic) {
    buffer_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    if (buffer_.size() < magic.size() + 4) {
      throw ModelFormatError("checksum failure: model file truncated");
    }
    if (std::memcmp(buffer_.data(), magic.data(), magic.size()) != 0) {
      throw ModelFormatError("bad magic: expected \"" + std::string(magic) + "\"");
    }
    const std::size_t body = buffer_.size() - 4;
    std::uint32_t stored = 0;
    pos_ = body;
    stored = get<std::uint32_t>();
    if (stored != crc32_of(buffer_.data(), body)) {
      throw ModelFormatError("checksum failure: model file corrupt or truncated");
    }
    end_ = body;
    pos_ = magic.size();
  }

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > buffer_.size() || (end_ != 0 && pos_ + sizeof(T) > end_)) {
      throw ModelFormatError("model file ends unexpectedly");
    }
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, buffer_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  bool at_end() const { return pos_ == end_; }

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

}  // namespace athena::binary
