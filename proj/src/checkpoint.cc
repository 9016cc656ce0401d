// src/checkpoint.cc

// Copyright 2026  speechvgg-cpp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "svgg/checkpoint.h"

#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <zlib.h>

#include "svgg/error.h"

namespace svgg {
namespace {

constexpr char kMagic[4] = {'S', 'V', 'G', 'G'};

template <typename U>
void put(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i)
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename U>
  U get(const char* what) {
    need(sizeof(U), what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return static_cast<U>(v);
  }

  const char* take(std::size_t n, const char* what) {
    need(n, what);
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n)
      throw DataError(std::string("checkpoint truncated while reading ") + what);
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

}  // namespace

std::uint32_t crc32_bytes(const void* data, std::size_t len) {
  uLong crc = crc32(0L, Z_NULL, 0);
  const auto* p = static_cast<const Bytef*>(data);
  while (len > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(len, 1u << 30));
    crc = crc32(crc, p, chunk);
    p += chunk;
    len -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const auto& params = ckpt.model.params();
  nlohmann::json blobs = nlohmann::json::array();
  for (const auto& p : params) blobs.push_back({{"name", p.name}, {"shape", p.value.shape()}});
  nlohmann::json header = {{"format_version", kCheckpointVersion},
                           {"config", ckpt.model.config().to_json()},
                           {"norm_stats", ckpt.stats.to_json()},
                           {"dictionary_hash", hex64(ckpt.dictionary_hash)},
                           {"metadata", ckpt.metadata},
                           {"trainable", trainable_mode_name(ckpt.model.trainable_mode())},
                           {"blobs", blobs}};
  const std::string header_text = header.dump();

  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, header_text.size());
  out += header_text;
  static_assert(sizeof(float) == 4);
  for (const auto& p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out += p.name;
    put<std::uint8_t>(out, static_cast<std::uint8_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) put<std::uint64_t>(out, d);
    const std::size_t nbytes = p.value.size() * sizeof(float);
    const std::size_t at = out.size();
    out.resize(at + nbytes);
    std::memcpy(out.data() + at, p.value.data(), nbytes);
    put<std::uint32_t>(out, crc32_bytes(p.value.data(), nbytes));
  }
  return out;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write checkpoint: " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("write failed: " + path);
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (std::memcmp(r.take(4, "magic"), kMagic, 4) != 0)
    throw DataError("not a checkpoint (bad magic)");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion)
    throw DataError("checkpoint version mismatch: file has " + std::to_string(version) +
                    ", expected " + std::to_string(kCheckpointVersion));
  const auto header_len = r.get<std::uint64_t>("header length");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(std::string(r.take(header_len, "header"), header_len));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint header: ") + e.what());
  }

  Checkpoint ckpt;
  try {
    ModelConfig cfg = ModelConfig::from_json(header.at("config"));
    ckpt.model = SpeechVGG::zeros(cfg);
    ckpt.stats = NormStats::from_json(header.at("norm_stats"));
    ckpt.dictionary_hash = std::stoull(header.at("dictionary_hash").get<std::string>(), nullptr, 16);
    ckpt.metadata = header.value("metadata", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint header: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("checkpoint header: ") + e.what());
  }

  auto& params = ckpt.model.params();
  std::set<std::string> seen;
  while (!r.done()) {
    const auto name_len = r.get<std::uint32_t>("blob name length");
    const std::string name(r.take(name_len, "blob name"), name_len);
    const int idx = ckpt.model.param_index(name);
    if (idx < 0) throw DataError("checkpoint blob '" + name + "' does not belong to the model");
    if (!seen.insert(name).second) throw DataError("checkpoint blob '" + name + "' appears twice");
    const auto rank = r.get<std::uint8_t>("blob rank");
    Shape shape(rank);
    for (auto& d : shape) d = r.get<std::uint64_t>("blob dims");
    Tensor<float>& dst = params[idx].value;
    if (shape != dst.shape())
      throw DataError("checkpoint blob '" + name + "' has shape " + shape_str(shape) +
                      " but the config implies " + shape_str(dst.shape()));
    const std::size_t nbytes = dst.size() * sizeof(float);
    const char* data = r.take(nbytes, "blob data");
    const auto crc = r.get<std::uint32_t>("blob checksum");
    if (crc != crc32_bytes(data, nbytes))
      throw DataError("checkpoint checksum failure in blob '" + name + "'");
    std::memcpy(dst.data(), data, nbytes);
  }
  for (const auto& p : params)
    if (!seen.count(p.name)) throw DataError("checkpoint is missing blob '" + p.name + "'");

  try {
    ckpt.model.set_trainable(
        parse_trainable_mode(header.value("trainable", std::string("all"))));
  } catch (const UsageError& e) {
    throw DataError(std::string("checkpoint header: ") + e.what());
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace svgg
