#include "pml/nn/param_store.hpp"

#include <cmath>
#include <stdexcept>

#include "pml/core/binary_io.hpp"
#include "pml/core/checksum.hpp"

namespace pml::nn {

const Tensor& ParamStore::get(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.tensor;
  }
  throw std::invalid_argument("ParamStore: no tensor named " + name);
}

bool ParamStore::all_finite() const {
  for (const auto& t : tensors) {
    for (double v : t.tensor.values()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

std::uint64_t ParamStore::checksum() const {
  Fnv1a h;
  for (const auto& t : tensors) {
    h.update(t.name);
    h.update(shape_string(t.tensor.shape()));
    h.update(t.tensor.values());
  }
  return h.digest();
}

ParamStore snapshot(const std::vector<Parameter*>& params,
                    const std::vector<Buffer*>& buffers) {
  ParamStore store;
  for (const Parameter* p : params) store.tensors.push_back({p->name, p->value});
  for (const Buffer* b : buffers) store.tensors.push_back({b->name, b->value});
  return store;
}

void restore(const ParamStore& store, const std::vector<Parameter*>& params,
             const std::vector<Buffer*>& buffers) {
  auto copy_into = [&](const std::string& name, Tensor& dst) {
    const Tensor& src = store.get(name);
    if (src.shape() != dst.shape()) {
      throw std::invalid_argument("ParamStore: shape mismatch for " + name +
                                  ": " + shape_string(src.shape()) + " vs " +
                                  shape_string(dst.shape()));
    }
    dst = src;
  };
  for (Parameter* p : params) copy_into(p->name, p->value);
  for (Buffer* b : buffers) copy_into(b->name, b->value);
}

std::vector<std::uint8_t> encode_param_file(const ParamFile& file) {
  ByteWriter w;
  w.bytes("PMLW", 4);
  w.u32(kParamFileVersion);
  w.u32(static_cast<std::uint32_t>(file.kind));
  w.u32(static_cast<std::uint32_t>(file.descriptor.size()));
  for (std::int32_t v : file.descriptor) w.i32(v);
  w.u32(static_cast<std::uint32_t>(file.store.tensors.size()));
  for (const auto& t : file.store.tensors) {
    w.u32(static_cast<std::uint32_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.u32(static_cast<std::uint32_t>(t.tensor.rank()));
    for (int d : t.tensor.shape()) w.u32(static_cast<std::uint32_t>(d));
    for (double v : t.tensor.values()) w.f32(static_cast<float>(v));
  }
  return w.buffer();
}

ParamFile decode_param_file(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  char magic[4];
  r.bytes(magic, 4);
  if (std::string(magic, 4) != "PMLW") {
    throw std::runtime_error("param file: bad magic");
  }
  if (r.u32() != kParamFileVersion) {
    throw std::runtime_error("param file: unsupported version");
  }
  ParamFile file;
  file.kind = static_cast<NetKind>(r.u32());
  const std::uint32_t nd = r.u32();
  for (std::uint32_t i = 0; i < nd; ++i) file.descriptor.push_back(r.i32());
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name.resize(r.u32());
    r.bytes(t.name.data(), t.name.size());
    const std::uint32_t rank = r.u32();
    std::vector<int> shape;
    for (std::uint32_t k = 0; k < rank; ++k) shape.push_back(static_cast<int>(r.u32()));
    t.tensor = Tensor(shape);
    for (double& v : t.tensor.values()) {
      v = r.f32();
      if (!std::isfinite(v)) throw std::runtime_error("param file: non-finite value");
    }
    file.store.tensors.push_back(std::move(t));
  }
  if (r.remaining() != 0) throw std::runtime_error("param file: trailing bytes");
  return file;
}

void save_param_file(const std::string& path, const ParamFile& file) {
  write_file_bytes(path, encode_param_file(file));
}

ParamFile load_param_file(const std::string& path) {
  return decode_param_file(read_file_bytes(path));
}

}  // namespace pml::nn
