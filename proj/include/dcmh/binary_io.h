// Copyright 2026 The DCMH Authors.
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

// Little-endian byte buffers shared by every on-disk format.

#ifndef DCMH_BINARY_IO_H_
#define DCMH_BINARY_IO_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dcmh {

class ByteWriter {
 public:
  void PutMagic(std::string_view magic);
  void PutU8(std::uint8_t v) { bytes_.push_back(v); }
  void PutU32(std::uint32_t v);
  void PutU64(std::uint64_t v);
  void PutF32(float v);
  void PutBytes(std::span<const std::uint8_t> v);

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> Release() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

// Every accessor throws FormatError naming the offset on a short read.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Throws FormatError("bad magic ...") unless the next bytes equal `magic`.
  void ExpectMagic(std::string_view magic);
  // Throws FormatError unless the next u32 equals `version`.
  void ExpectVersion(std::uint32_t version);

  std::uint8_t U8();
  std::uint32_t U32();
  std::uint64_t U64();
  float F32();
  void Bytes(std::span<std::uint8_t> out);

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  // Throws FormatError if unread bytes are left over.
  void ExpectEnd() const;

 private:
  void Need(std::size_t n) const;

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path,
                    std::span<const std::uint8_t> bytes);

}  // namespace dcmh

#endif  // DCMH_BINARY_IO_H_
