// Copyright 2026 The Pragref Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pragref/nn/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>

#include "pragref/error.h"

namespace pragref::nn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'P', 'R', 'A', 'G', 'C', 'K', 'P', 'T'};
constexpr char kDtypeF64[4] = {'f', '6', '4', '\0'};

template <typename T>
void Put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T Get() {
    T v;
    Raw(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
  }

  void Raw(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw CheckpointFormatError("truncated checkpoint");
    }
  }

  std::string String(std::size_t n) {
    if (n > (1u << 30)) throw CheckpointFormatError("implausible length");
    std::string s(n, '\0');
    Raw(s.data(), n);
    return s;
  }

 private:
  std::istream& in_;
};

}  // namespace

NamedArray NamedArray::FromMatrix(const std::string& name, const Matrix& m) {
  NamedArray a;
  a.name = name;
  a.shape = {static_cast<std::uint64_t>(m.rows()),
             static_cast<std::uint64_t>(m.cols())};
  a.data.resize(m.size());
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                           Eigen::RowMajor>>(a.data.data(), m.rows(),
                                             m.cols()) = m;
  return a;
}

Matrix NamedArray::ToMatrix() const {
  Eigen::Index rows = 1, cols = 1;
  if (shape.size() == 1) {
    rows = static_cast<Eigen::Index>(shape[0]);
  } else if (shape.size() == 2) {
    rows = static_cast<Eigen::Index>(shape[0]);
    cols = static_cast<Eigen::Index>(shape[1]);
  } else if (!shape.empty()) {
    throw CheckpointFormatError("array '" + name + "' has rank > 2");
  }
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(data.data(), rows,
                                                          cols);
}

const NamedArray* Checkpoint::Find(const std::string& name) const {
  for (const NamedArray& a : arrays) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

void WriteCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  Put<std::uint32_t>(out, ckpt.format_version);
  const std::string meta = ckpt.meta.dump();
  Put<std::uint64_t>(out, meta.size());
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  Put<std::uint64_t>(out, ckpt.arrays.size());
  for (const NamedArray& a : ckpt.arrays) {
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(a.name.size()));
    out.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    out.write(kDtypeF64, sizeof(kDtypeF64));
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(a.shape.size()));
    for (std::uint64_t d : a.shape) Put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(a.data.data()),
              static_cast<std::streamsize>(a.data.size() * sizeof(double)));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint ReadCheckpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingCheckpoint("no checkpoint at " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  Reader r(in);
  char magic[8];
  r.Raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointFormatError(path.string() + " is not a checkpoint");
  }
  Checkpoint ckpt;
  ckpt.format_version = r.Get<std::uint32_t>();
  if (ckpt.format_version != kCheckpointFormatVersion) {
    throw CheckpointFormatError("unsupported checkpoint version " +
                                std::to_string(ckpt.format_version));
  }
  const std::string meta = r.String(r.Get<std::uint64_t>());
  try {
    ckpt.meta = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointFormatError(std::string("bad metadata: ") + e.what());
  }
  const auto count = r.Get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedArray a;
    a.name = r.String(r.Get<std::uint32_t>());
    char dtype[4];
    r.Raw(dtype, sizeof(dtype));
    if (std::memcmp(dtype, kDtypeF64, sizeof(dtype)) != 0) {
      throw CheckpointFormatError("array '" + a.name + "' has unknown dtype");
    }
    const auto ndim = r.Get<std::uint32_t>();
    std::uint64_t n = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      a.shape.push_back(r.Get<std::uint64_t>());
      n *= a.shape.back();
    }
    if (n > (1ull << 32)) throw CheckpointFormatError("implausible array");
    a.data.resize(n);
    r.Raw(reinterpret_cast<char*>(a.data.data()), n * sizeof(double));
    ckpt.arrays.push_back(std::move(a));
  }
  return ckpt;
}

void AppendParameters(const ParameterStore& store, Checkpoint& ckpt) {
  for (const Parameter* p : store.params()) {
    ckpt.arrays.push_back(NamedArray::FromMatrix(p->name(), p->value()));
  }
}

void LoadParameters(const Checkpoint& ckpt, ParameterStore& store) {
  for (Parameter* p : store.params()) {
    const NamedArray* a = ckpt.Find(p->name());
    if (a == nullptr) {
      throw CheckpointFormatError("checkpoint lacks '" + p->name() + "'");
    }
    Matrix m = a->ToMatrix();
    if (m.rows() != p->value().rows() || m.cols() != p->value().cols()) {
      throw CheckpointFormatError("shape mismatch for '" + p->name() + "'");
    }
    p->value() = std::move(m);
  }
}

void AppendNamed(const std::map<std::string, Matrix>& arrays,
                 const std::string& prefix, Checkpoint& ckpt) {
  for (const auto& [name, m] : arrays) {
    ckpt.arrays.push_back(NamedArray::FromMatrix(prefix + name, m));
  }
}

std::map<std::string, Matrix> ExtractNamed(const Checkpoint& ckpt,
                                           const std::string& prefix) {
  std::map<std::string, Matrix> out;
  for (const NamedArray& a : ckpt.arrays) {
    if (a.name.rfind(prefix, 0) == 0) {
      out[a.name.substr(prefix.size())] = a.ToMatrix();
    }
  }
  return out;
}

}  // namespace pragref::nn
