#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pml/datasets/records.hpp"

namespace pml::data {

// "PMLD" | u32 version | u32 count | u16 width | u16 height | u8 kind |
// records of f32 action followed by f32 row-major image(s), little-endian.
inline constexpr std::uint32_t kCorpusVersion = 1;

enum class RecordKind : std::uint8_t { labeled_frame = 1, transition = 2 };

struct CorpusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CorpusBadMagic : CorpusError {
  using CorpusError::CorpusError;
};
struct CorpusVersionMismatch : CorpusError {
  using CorpusError::CorpusError;
};
struct CorpusTruncated : CorpusError {
  using CorpusError::CorpusError;
};
// An intensity outside [0, 1], an action outside [-1, 1], or a bad header
// field (non-square size, unknown record kind).
struct CorpusOutOfRange : CorpusError {
  using CorpusError::CorpusError;
};
struct CorpusKindMismatch : CorpusError {
  using CorpusError::CorpusError;
};

struct CorpusHeader {
  std::uint32_t version = kCorpusVersion;
  std::uint32_t count = 0;
  int width = 0;
  int height = 0;
  RecordKind kind = RecordKind::labeled_frame;
};

// Empty corpora are written with size 0 x 0.
std::vector<std::uint8_t> encode_corpus(const std::vector<LabeledFrame>& frames);
std::vector<std::uint8_t> encode_corpus(const std::vector<TransitionSample>& samples);

CorpusHeader decode_corpus_header(const std::vector<std::uint8_t>& bytes);
std::vector<LabeledFrame> decode_frames(const std::vector<std::uint8_t>& bytes);
std::vector<TransitionSample> decode_transitions(const std::vector<std::uint8_t>& bytes);

void save_corpus(const std::string& path, const std::vector<LabeledFrame>& frames);
void save_corpus(const std::string& path, const std::vector<TransitionSample>& samples);
CorpusHeader read_corpus_header(const std::string& path);
std::vector<LabeledFrame> load_frames(const std::string& path);
std::vector<TransitionSample> load_transitions(const std::string& path);

// FNV-1a over the encoded bytes.
std::uint64_t corpus_checksum(const std::vector<LabeledFrame>& frames);
std::uint64_t corpus_checksum(const std::vector<TransitionSample>& samples);

// Single images use the same container as a one-frame corpus with action 0.
void save_image(const std::string& path, const GrayImage& image);
GrayImage load_image(const std::string& path);

// Binary PGM (P5), 8-bit, for viewing.
void write_pgm(const std::string& path, const GrayImage& image);

}  // namespace pml::data
