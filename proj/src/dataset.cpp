#include "sdc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "sdc/binary_io.hpp"
#include "sdc/errors.hpp"
#include "sdc/rng.hpp"

namespace sdc {

namespace {
thread_local std::uint64_t g_label_reads = 0;
constexpr std::string_view kMagic = "SSDS";
}  // namespace

std::uint64_t label_reads() { return g_label_reads; }

std::uint32_t Sample::label() const {
  ++g_label_reads;
  return label_;
}

Dataset::Dataset(std::size_t feature_dim, std::uint32_t num_classes, std::vector<Sample> samples)
    : feature_dim_(feature_dim), num_classes_(num_classes), samples_(std::move(samples)),
      layout_(Layout::vector(feature_dim)) {
  if (feature_dim_ == 0) throw DataError("dataset feature_dim must be positive");
  if (num_classes_ == 0) throw DataError("dataset needs at least one class");
  class_members_.resize(num_classes_);
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const Sample& s = samples_[i];
    if (s.features.size() != feature_dim_)
      throw DataError("sample " + std::to_string(s.id) + " has " + std::to_string(s.features.size()) +
                      " features, expected " + std::to_string(feature_dim_));
    for (double v : s.features)
      if (!std::isfinite(v)) throw DataError("sample " + std::to_string(s.id) + " has a non-finite feature");
    const std::uint32_t label = s.label();
    if (label >= num_classes_)
      throw DataError("sample " + std::to_string(s.id) + " has label " + std::to_string(label) + " outside [0, " +
                      std::to_string(num_classes_) + ")");
    class_members_[label].push_back(i);
  }
}

void Dataset::set_layout(Layout layout) {
  if (layout.size() != feature_dim_)
    throw DataError("layout covers " + std::to_string(layout.size()) + " values but samples have " +
                    std::to_string(feature_dim_));
  layout_ = layout;
}

Dataset make_synthetic(std::uint32_t num_classes, std::size_t dim, std::size_t per_class, double separation,
                       std::uint64_t seed) {
  if (num_classes == 0 || dim == 0 || per_class == 0)
    throw ConfigError("synthetic dataset needs positive num_classes, dim and per_class");
  Rng rng(seed);
  std::vector<std::vector<double>> means(num_classes, std::vector<double>(dim));
  for (auto& mu : means) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : mu) {
        v = rng.normal();
        norm += v * v;
      }
      norm = std::sqrt(norm);
    } while (norm < 1e-12);
    for (double& v : mu) v = v / norm * separation;
  }
  std::vector<Sample> samples;
  samples.reserve(num_classes * per_class);
  std::uint64_t id = 0;
  for (std::uint32_t c = 0; c < num_classes; ++c) {
    for (std::size_t k = 0; k < per_class; ++k) {
      std::vector<double> x(dim);
      for (std::size_t j = 0; j < dim; ++j) x[j] = means[c][j] + rng.normal();
      samples.emplace_back(id++, std::move(x), c);
    }
  }
  return Dataset(dim, num_classes, std::move(samples));
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& dataset, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
  Rng rng(seed);
  std::vector<Sample> train, test;
  for (const auto& members : dataset.class_members()) {
    std::vector<std::size_t> order = members;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(order.size())));
    for (std::size_t i = 0; i < order.size(); ++i)
      (i < n_train ? train : test).push_back(dataset[order[i]]);
  }
  auto by_id = [](const Sample& a, const Sample& b) { return a.id < b.id; };
  std::sort(train.begin(), train.end(), by_id);
  std::sort(test.begin(), test.end(), by_id);
  Dataset tr(dataset.feature_dim(), dataset.num_classes(), std::move(train));
  Dataset te(dataset.feature_dim(), dataset.num_classes(), std::move(test));
  tr.set_layout(dataset.layout());
  te.set_layout(dataset.layout());
  return {std::move(tr), std::move(te)};
}

std::string encode_dataset(const Dataset& dataset) {
  io::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kDatasetVersion);
  w.u64(dataset.size());
  w.u64(dataset.feature_dim());
  w.u32(dataset.num_classes());
  for (const Sample& s : dataset.samples()) {
    w.u32(s.label());
    for (double v : s.features) w.f64(v);
  }
  return w.take();
}

Dataset decode_dataset(const std::string& bytes) {
  io::ByteReader r(bytes);
  if (r.bytes(4, "magic") != kMagic) throw FormatError("bad dataset magic", 0);
  const auto version_at = r.offset();
  if (const auto version = r.u32("version"); version != kDatasetVersion)
    throw FormatError("unsupported dataset version " + std::to_string(version), version_at);
  const auto num_samples = r.u64("num_samples");
  const auto dim_at = r.offset();
  const auto dim = r.u64("feature_dim");
  if (dim == 0) throw FormatError("feature_dim must be positive", dim_at);
  const auto classes_at = r.offset();
  const auto num_classes = r.u32("num_classes");
  if (num_classes == 0) throw FormatError("num_classes must be positive", classes_at);
  if (num_samples > r.remaining() / (4 + 8 * dim))
    throw FormatError("truncated payload: header declares " + std::to_string(num_samples) + " samples", r.offset());
  std::vector<Sample> samples;
  samples.reserve(num_samples);
  for (std::uint64_t i = 0; i < num_samples; ++i) {
    const auto label_at = r.offset();
    const auto label = r.u32("label");
    if (label >= num_classes)
      throw FormatError("label " + std::to_string(label) + " out of range for " + std::to_string(num_classes) +
                            " classes",
                        label_at);
    std::vector<double> x(dim);
    for (double& v : x) {
      const auto at = r.offset();
      v = r.f64("feature");
      if (!std::isfinite(v)) throw FormatError("non-finite feature", at);
    }
    samples.emplace_back(i, std::move(x), label);
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after dataset", r.offset());
  return Dataset(dim, num_classes, std::move(samples));
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  io::write_file(path, encode_dataset(dataset));
}

Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(io::read_file(path)); }

namespace {

bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (text.empty()) return false;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

}  // namespace

Dataset dataset_from_csv(std::istream& in, std::uint32_t num_classes) {
  std::vector<std::uint32_t> labels;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<double> values;
    std::string_view rest = line;
    bool numeric = true;
    while (true) {
      const auto comma = rest.find(',');
      double v = 0.0;
      if (!parse_double(rest.substr(0, comma), v)) {
        numeric = false;
        break;
      }
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!numeric) {
      if (rows.empty() && labels.empty() && line_no == 1) continue;  // header
      throw DataError("csv line " + std::to_string(line_no) + ": non-numeric field");
    }
    if (values.size() < 2) throw DataError("csv line " + std::to_string(line_no) + ": need a label and features");
    if (width == 0) width = values.size() - 1;
    if (values.size() - 1 != width)
      throw DataError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(width) + " features");
    const double label = values.front();
    if (label < 0 || label != std::floor(label) || label > 4294967295.0)
      throw DataError("csv line " + std::to_string(line_no) + ": label must be a non-negative integer");
    labels.push_back(static_cast<std::uint32_t>(label));
    rows.emplace_back(values.begin() + 1, values.end());
  }
  if (rows.empty()) throw DataError("csv contains no samples");
  if (num_classes == 0) num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < rows.size(); ++i) samples.emplace_back(i, std::move(rows[i]), labels[i]);
  return Dataset(width, num_classes, std::move(samples));
}

}  // namespace sdc
