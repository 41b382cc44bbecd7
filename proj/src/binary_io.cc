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

#include "dcmh/binary_io.h"

#include <bit>
#include <fstream>
#include <iterator>

#include "dcmh/errors.h"

namespace dcmh {

void ByteWriter::PutMagic(std::string_view magic) {
  for (char c : magic) bytes_.push_back(static_cast<std::uint8_t>(c));
}

void ByteWriter::PutU32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back((v >> (8 * i)) & 0xFFu);
}

void ByteWriter::PutU64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes_.push_back((v >> (8 * i)) & 0xFFu);
}

void ByteWriter::PutF32(float v) { PutU32(std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::PutBytes(std::span<const std::uint8_t> v) {
  bytes_.insert(bytes_.end(), v.begin(), v.end());
}

void ByteReader::Need(std::size_t n) const {
  if (remaining() < n) {
    throw FormatError("truncated payload: need " + std::to_string(n) +
                          " bytes, have " + std::to_string(remaining()),
                      pos_);
  }
}

void ByteReader::ExpectMagic(std::string_view magic) {
  Need(magic.size());
  const std::size_t start = pos_;
  for (char c : magic) {
    if (bytes_[pos_++] != static_cast<std::uint8_t>(c)) {
      throw FormatError("bad magic, expected \"" + std::string(magic) + "\"",
                        start);
    }
  }
}

void ByteReader::ExpectVersion(std::uint32_t version) {
  const std::size_t start = pos_;
  const std::uint32_t got = U32();
  if (got != version) {
    throw FormatError("unsupported version " + std::to_string(got) +
                          " (expected " + std::to_string(version) + ")",
                      start);
  }
}

std::uint8_t ByteReader::U8() {
  Need(1);
  return bytes_[pos_++];
}

std::uint32_t ByteReader::U32() {
  Need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
  }
  return v;
}

std::uint64_t ByteReader::U64() {
  Need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
  }
  return v;
}

float ByteReader::F32() { return std::bit_cast<float>(U32()); }

void ByteReader::Bytes(std::span<std::uint8_t> out) {
  Need(out.size());
  for (auto& b : out) b = bytes_[pos_++];
}

void ByteReader::ExpectEnd() const {
  if (remaining() != 0) {
    throw FormatError(std::to_string(remaining()) + " trailing bytes", pos_);
  }
}

std::vector<std::uint8_t> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path);
  return bytes;
}

void WriteFileBytes(const std::string& path,
                    std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace dcmh
