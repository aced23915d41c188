#include "pml/datasets/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>

#include "pml/core/rng.hpp"

namespace pml::data {

namespace {

SteeringAction negate(SteeringAction a) { return SteeringAction(0.0 - a.value()); }

template <typename T>
std::vector<int> histogram(const std::vector<T>& items, const BinSpec& spec) {
  spec.validate();
  std::vector<int> counts(static_cast<std::size_t>(spec.bin_count), 0);
  for (const auto& item : items) ++counts[spec.bin_of(item.action.value())];
  return counts;
}

template <typename T>
std::vector<T> normalize(const std::vector<T>& items, const BinSpec& spec,
                         std::uint64_t seed, NormalizeReport* report) {
  if (items.empty()) throw std::invalid_argument("normalize_bins: no frames");
  spec.validate();
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(spec.bin_count));
  for (std::size_t i = 0; i < items.size(); ++i) {
    members[spec.bin_of(items[i].action.value())].push_back(i);
  }
  int non_empty = 0;
  int smallest = static_cast<int>(items.size());
  for (const auto& m : members) {
    if (m.empty()) continue;
    ++non_empty;
    smallest = std::min(smallest, static_cast<int>(m.size()));
  }
  NormalizeReport r;
  r.cap = spec.cap_mode == CapMode::min_count ? smallest : spec.cap;
  if (non_empty == 1) {
    r.single_bin = true;
    r.cap = static_cast<int>(items.size());
    if (report != nullptr) *report = r;
    return items;
  }

  Rng rng(seed);
  std::vector<std::size_t> keep;
  for (auto& m : members) {
    if (static_cast<int>(m.size()) > r.cap) {
      rng.shuffle(std::span<std::size_t>(m));
      m.resize(static_cast<std::size_t>(r.cap));
    }
    keep.insert(keep.end(), m.begin(), m.end());
  }
  std::sort(keep.begin(), keep.end());
  std::vector<T> out;
  out.reserve(keep.size());
  for (std::size_t i : keep) out.push_back(items[i]);
  if (report != nullptr) *report = r;
  return out;
}

}  // namespace

std::vector<TransitionSample> augment_flip(const std::vector<TransitionSample>& samples) {
  std::vector<TransitionSample> out = samples;
  out.reserve(2 * samples.size());
  for (const auto& s : samples) {
    out.push_back({mirror_image(s.obs), negate(s.action), mirror_image(s.next_obs)});
  }
  return out;
}

std::vector<LabeledFrame> augment_flip(const std::vector<LabeledFrame>& frames) {
  std::vector<LabeledFrame> out = frames;
  out.reserve(2 * frames.size());
  for (const auto& f : frames) out.push_back({mirror_image(f.obs), negate(f.action)});
  return out;
}

void BinSpec::validate() const {
  if (bin_count < 2) throw std::invalid_argument("BinSpec: bin_count must be >= 2");
  if (cap_mode == CapMode::fixed_cap && cap < 1) {
    throw std::invalid_argument("BinSpec: fixed cap must be >= 1");
  }
}

int BinSpec::bin_of(double action) const {
  if (!(action >= -1.0 && action <= 1.0)) {
    throw std::invalid_argument("BinSpec: action outside [-1, 1]");
  }
  const double width = 2.0 / bin_count;
  const double mag = std::fabs(action);
  if (bin_count % 2 == 1) {
    const int half = bin_count / 2;
    const int k = std::min(half, static_cast<int>(std::floor(mag / width + 0.5)));
    return action < 0.0 ? half - k : half + k;
  }
  const int half = bin_count / 2;
  const int k = std::min(half - 1, static_cast<int>(std::floor(mag / width)));
  return action < 0.0 ? half - 1 - k : half + k;
}

std::vector<int> bin_histogram(const std::vector<LabeledFrame>& frames, const BinSpec& spec) {
  return histogram(frames, spec);
}

std::vector<int> bin_histogram(const std::vector<TransitionSample>& samples,
                               const BinSpec& spec) {
  return histogram(samples, spec);
}

std::vector<LabeledFrame> normalize_bins(const std::vector<LabeledFrame>& frames,
                                         const BinSpec& spec, std::uint64_t seed,
                                         NormalizeReport* report) {
  return normalize(frames, spec, seed, report);
}

std::vector<TransitionSample> normalize_bins(const std::vector<TransitionSample>& samples,
                                             const BinSpec& spec, std::uint64_t seed,
                                             NormalizeReport* report) {
  return normalize(samples, spec, seed, report);
}

}  // namespace pml::data
