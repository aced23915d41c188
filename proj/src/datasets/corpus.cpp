#include "pml/datasets/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <type_traits>

#include "pml/core/binary_io.hpp"
#include "pml/core/checksum.hpp"

namespace pml::data {

namespace {

constexpr char kMagic[4] = {'P', 'M', 'L', 'D'};

void write_header(ByteWriter& w, std::size_t count, int size, RecordKind kind) {
  if (count > std::numeric_limits<std::uint32_t>::max() ||
      size > std::numeric_limits<std::uint16_t>::max()) {
    throw std::invalid_argument("corpus too large for the container");
  }
  w.bytes(kMagic, 4);
  w.u32(kCorpusVersion);
  w.u32(static_cast<std::uint32_t>(count));
  w.u16(static_cast<std::uint16_t>(size));
  w.u16(static_cast<std::uint16_t>(size));
  w.u8(static_cast<std::uint8_t>(kind));
}

void write_image(ByteWriter& w, const GrayImage& img, int size) {
  if (img.width() != size) throw std::invalid_argument("corpus images differ in size");
  for (double v : img.pixels()) w.f32(static_cast<float>(v));
}

CorpusHeader read_header(ByteReader& r) {
  CorpusHeader h;
  char magic[4];
  r.bytes(magic, 4);
  if (!std::equal(magic, magic + 4, kMagic)) throw CorpusBadMagic("not a PMLD corpus");
  h.version = r.u32();
  if (h.version != kCorpusVersion) {
    throw CorpusVersionMismatch("unsupported corpus version " + std::to_string(h.version));
  }
  h.count = r.u32();
  h.width = r.u16();
  h.height = r.u16();
  const std::uint8_t kind = r.u8();
  if (kind != 1 && kind != 2) {
    throw CorpusOutOfRange("unknown record kind " + std::to_string(kind));
  }
  h.kind = static_cast<RecordKind>(kind);
  if (h.width != h.height || (h.count > 0 && h.width == 0)) {
    throw CorpusOutOfRange("corpus images must be square and non-empty");
  }
  return h;
}

SteeringAction read_action(ByteReader& r) {
  const double v = r.f32();
  if (!(v >= -1.0 && v <= 1.0)) throw CorpusOutOfRange("steering value out of range");
  return SteeringAction(v);
}

GrayImage read_image(ByteReader& r, int size) {
  std::vector<double> px(static_cast<std::size_t>(size) * size);
  for (double& v : px) {
    v = r.f32();
    if (!(v >= 0.0 && v <= 1.0)) throw CorpusOutOfRange("intensity out of range");
  }
  return GrayImage(size, size, std::move(px));
}

template <typename Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const TruncatedInput&) {
    throw CorpusTruncated("corpus is truncated");
  }
}

template <typename T>
std::vector<T> decode(const std::vector<std::uint8_t>& bytes, RecordKind expected) {
  return guarded([&] {
    ByteReader r(bytes);
    const CorpusHeader h = read_header(r);
    if (h.kind != expected) throw CorpusKindMismatch("corpus holds a different record kind");
    const std::size_t per_record =
        4 * (1 + static_cast<std::size_t>(h.width) * h.height *
                     (expected == RecordKind::transition ? 2 : 1));
    if (r.remaining() < per_record * h.count) throw CorpusTruncated("corpus is truncated");
    std::vector<T> out;
    out.reserve(h.count);
    for (std::uint32_t i = 0; i < h.count; ++i) {
      const SteeringAction a = read_action(r);
      GrayImage obs = read_image(r, h.width);
      if constexpr (std::is_same_v<T, TransitionSample>) {
        GrayImage next = read_image(r, h.width);
        out.push_back({std::move(obs), a, std::move(next)});
      } else {
        out.push_back({std::move(obs), a});
      }
    }
    return out;
  });
}

}  // namespace

std::vector<std::uint8_t> encode_corpus(const std::vector<LabeledFrame>& frames) {
  ByteWriter w;
  const int size = frames.empty() ? 0 : frames.front().obs.width();
  write_header(w, frames.size(), size, RecordKind::labeled_frame);
  for (const auto& f : frames) {
    w.f32(static_cast<float>(f.action.value()));
    write_image(w, f.obs, size);
  }
  return w.buffer();
}

std::vector<std::uint8_t> encode_corpus(const std::vector<TransitionSample>& samples) {
  ByteWriter w;
  const int size = samples.empty() ? 0 : samples.front().obs.width();
  write_header(w, samples.size(), size, RecordKind::transition);
  for (const auto& s : samples) {
    w.f32(static_cast<float>(s.action.value()));
    write_image(w, s.obs, size);
    write_image(w, s.next_obs, size);
  }
  return w.buffer();
}

CorpusHeader decode_corpus_header(const std::vector<std::uint8_t>& bytes) {
  return guarded([&] {
    ByteReader r(bytes);
    return read_header(r);
  });
}

std::vector<LabeledFrame> decode_frames(const std::vector<std::uint8_t>& bytes) {
  return decode<LabeledFrame>(bytes, RecordKind::labeled_frame);
}

std::vector<TransitionSample> decode_transitions(const std::vector<std::uint8_t>& bytes) {
  return decode<TransitionSample>(bytes, RecordKind::transition);
}

void save_corpus(const std::string& path, const std::vector<LabeledFrame>& frames) {
  write_file_bytes(path, encode_corpus(frames));
}

void save_corpus(const std::string& path, const std::vector<TransitionSample>& samples) {
  write_file_bytes(path, encode_corpus(samples));
}

CorpusHeader read_corpus_header(const std::string& path) {
  return decode_corpus_header(read_file_bytes(path));
}

std::vector<LabeledFrame> load_frames(const std::string& path) {
  return decode_frames(read_file_bytes(path));
}

std::vector<TransitionSample> load_transitions(const std::string& path) {
  return decode_transitions(read_file_bytes(path));
}

std::uint64_t corpus_checksum(const std::vector<LabeledFrame>& frames) {
  Fnv1a h;
  h.update(encode_corpus(frames));
  return h.digest();
}

std::uint64_t corpus_checksum(const std::vector<TransitionSample>& samples) {
  Fnv1a h;
  h.update(encode_corpus(samples));
  return h.digest();
}

void save_image(const std::string& path, const GrayImage& image) {
  save_corpus(path, std::vector<LabeledFrame>{{image, SteeringAction(0.0)}});
}

GrayImage load_image(const std::string& path) {
  auto frames = load_frames(path);
  if (frames.size() != 1) throw CorpusError("image file must hold exactly one frame");
  return std::move(frames.front().obs);
}

void write_pgm(const std::string& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  for (double v : image.pixels()) {
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace pml::data
