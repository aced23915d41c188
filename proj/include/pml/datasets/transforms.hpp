#pragma once

#include <cstdint>
#include <vector>

#include "pml/datasets/records.hpp"

namespace pml::data {

// Appends the horizontal mirror of every sample with the steering negated.
std::vector<TransitionSample> augment_flip(const std::vector<TransitionSample>& samples);
std::vector<LabeledFrame> augment_flip(const std::vector<LabeledFrame>& frames);

enum class CapMode { min_count, fixed_cap };

// Even partition of [-1, 1]. For odd counts the middle bin is centered on 0
// and bin(-v) = bin_count - 1 - bin(v).
struct BinSpec {
  int bin_count = 21;
  CapMode cap_mode = CapMode::min_count;
  int cap = 0;  // fixed_cap only

  void validate() const;
  int bin_of(double action) const;
};

std::vector<int> bin_histogram(const std::vector<LabeledFrame>& frames, const BinSpec& spec);
std::vector<int> bin_histogram(const std::vector<TransitionSample>& samples,
                               const BinSpec& spec);

struct NormalizeReport {
  int cap = 0;
  bool single_bin = false;  // everything fell in one bin; output unchanged
};

// Seeded subsampling without replacement so every non-empty bin holds at most
// `cap` frames (min_count: the smallest non-empty bin). Survivors keep their
// input order.
std::vector<LabeledFrame> normalize_bins(const std::vector<LabeledFrame>& frames,
                                         const BinSpec& spec, std::uint64_t seed,
                                         NormalizeReport* report = nullptr);
std::vector<TransitionSample> normalize_bins(const std::vector<TransitionSample>& samples,
                                             const BinSpec& spec, std::uint64_t seed,
                                             NormalizeReport* report = nullptr);

}  // namespace pml::data
