#include "sdc/checkpoint.hpp"

#include <fstream>
#include <iterator>

#include "sdc/binary_io.hpp"
#include "sdc/errors.hpp"

namespace sdc {

namespace io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

}  // namespace io

namespace {
constexpr std::string_view kMagic = "SSEL";
constexpr std::uint64_t kMaxRank = 8;
}  // namespace

std::string encode_checkpoint(const std::vector<NamedTensor>& params) {
  io::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  w.u64(params.size());
  for (const auto& p : params) {
    w.u32(static_cast<std::uint32_t>(p.name.size()));
    w.bytes(p.name);
    w.u64(p.tensor.rank());
    for (std::size_t d : p.tensor.shape()) w.u64(d);
    for (double v : p.tensor.data()) w.f64(v);
  }
  return w.take();
}

std::vector<NamedTensor> decode_checkpoint(const std::string& bytes) {
  io::ByteReader r(bytes);
  if (r.bytes(4, "magic") != kMagic) throw FormatError("bad checkpoint magic", 0);
  const std::uint64_t version_at = r.offset();
  if (const auto version = r.u32("version"); version != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version), version_at);
  const std::uint64_t count = r.u64("parameter count");
  std::vector<NamedTensor> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = r.u32("name length");
    std::string name(r.bytes(name_len, "name"));
    const std::uint64_t rank_at = r.offset();
    const auto rank = r.u64("rank");
    if (rank == 0 || rank > kMaxRank) throw FormatError("bad rank " + std::to_string(rank), rank_at);
    Shape shape;
    std::uint64_t numel = 1;
    for (std::uint64_t d = 0; d < rank; ++d) {
      const std::uint64_t dim_at = r.offset();
      const auto dim = r.u64("dimension");
      if (dim == 0) throw FormatError("zero dimension", dim_at);
      shape.push_back(dim);
      numel *= dim;
    }
    if (numel > r.remaining() / 8) throw FormatError("truncated payload for '" + name + "'", r.offset());
    std::vector<double> values(numel);
    for (double& v : values) v = r.f64("value");
    out.push_back({std::move(name), Tensor(std::move(shape), std::move(values))});
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after checkpoint", r.offset());
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& params) {
  io::write_file(path, encode_checkpoint(params));
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path));
}

}  // namespace sdc
