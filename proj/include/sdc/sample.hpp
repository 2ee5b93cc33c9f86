#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sdc {

// How a flat feature array is interpreted by the augmentations.
struct Layout {
  enum class Kind { vector, image };

  Kind kind = Kind::vector;
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 0;

  static Layout vector(std::size_t length) { return {Kind::vector, 1, 1, length}; }
  static Layout image(std::size_t c, std::size_t h, std::size_t w) { return {Kind::image, c, h, w}; }

  std::size_t size() const { return channels * height * width; }
  bool operator==(const Layout&) const = default;
};

// Number of label() calls made on this thread. Stage-one training asserts
// this does not move while it selects and trains.
std::uint64_t label_reads();

// One stream item. The label is hidden behind an audited accessor; it exists
// for stream generation and evaluation only.
class Sample {
 public:
  Sample() = default;
  Sample(std::uint64_t id, std::vector<double> features, std::uint32_t label)
      : id(id), features(std::move(features)), label_(label) {}

  std::uint64_t id = 0;
  std::vector<double> features;
  std::uint64_t arrival_index = 0;

  std::uint32_t label() const;

  // Same item with a different label. Used to build label-permuted replays.
  Sample relabeled(std::uint32_t label) const {
    Sample s = *this;
    s.label_ = label;
    return s;
  }

 private:
  std::uint32_t label_ = 0;
};

}  // namespace sdc
