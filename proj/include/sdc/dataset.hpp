#pragma once

// Dataset file (SSDS), little-endian:
//   "SSDS" | version u32 | num_samples u64 | feature_dim u64 | num_classes u32 |
//   per sample: label u32 | feature_dim × f64

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "sdc/sample.hpp"

namespace sdc {

inline constexpr std::uint32_t kDatasetVersion = 1;

class Dataset {
 public:
  Dataset() = default;
  // Validates finite features, uniform width and label range.
  Dataset(std::size_t feature_dim, std::uint32_t num_classes, std::vector<Sample> samples);

  std::size_t feature_dim() const { return feature_dim_; }
  std::uint32_t num_classes() const { return num_classes_; }
  std::size_t size() const { return samples_.size(); }
  const std::vector<Sample>& samples() const { return samples_; }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }

  // Indices of samples per class, ascending.
  const std::vector<std::vector<std::size_t>>& class_members() const { return class_members_; }

  Layout layout() const { return layout_; }
  void set_layout(Layout layout);

 private:
  std::size_t feature_dim_ = 0;
  std::uint32_t num_classes_ = 0;
  std::vector<Sample> samples_;
  std::vector<std::vector<std::size_t>> class_members_;
  Layout layout_;
};

// Isotropic unit-variance Gaussian per class, centred on a random unit
// direction scaled by `separation`. Ids are 0..n-1, class-major.
Dataset make_synthetic(std::uint32_t num_classes, std::size_t dim, std::size_t per_class, double separation,
                       std::uint64_t seed);

// Per-class shuffled split; the first round(train_fraction·n_c) go to train.
std::pair<Dataset, Dataset> split_train_test(const Dataset& dataset, double train_fraction, std::uint64_t seed);

std::string encode_dataset(const Dataset& dataset);
Dataset decode_dataset(const std::string& bytes);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

// CSV rows "label,f1,f2,...". A non-numeric first line is treated as a header.
// num_classes = 0 infers max(label)+1.
Dataset dataset_from_csv(std::istream& in, std::uint32_t num_classes = 0);

}  // namespace sdc
