#pragma once

// Small in-memory synthetic datasets shared by the test binaries.

#include <memory>
#include <vector>

#include "autocrop/data.hpp"

namespace fixture {

inline autocrop::SynthSpec small_spec(int count, std::uint64_t seed = 77) {
  autocrop::SynthSpec spec;
  spec.image_count = count;
  spec.min_size = 64;
  spec.max_size = 80;
  spec.seed = seed;
  return spec;
}

inline std::vector<autocrop::LabeledImage> synth_set(const autocrop::SynthSpec& spec, int first, int count) {
  std::vector<autocrop::LabeledImage> out;
  for (int i = first; i < first + count; ++i) {
    autocrop::SynthImage s = autocrop::synth_image(spec, i);
    const autocrop::ImageDims dims = s.image.dims();
    out.push_back({std::make_shared<const autocrop::Image>(std::move(s.image)), autocrop::normalize(s.truth, dims)});
  }
  return out;
}

}  // namespace fixture
