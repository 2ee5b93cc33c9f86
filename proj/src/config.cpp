#include "sdc/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "sdc/binary_io.hpp"
#include "sdc/errors.hpp"
#include "sdc/rng.hpp"

namespace sdc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_int(const std::string& key, const std::string& v) {
  T out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

std::string real_text(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::size_t> parse_dims(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_int<std::size_t>(key, item));
  }
  return out;
}

std::string dims_text(const std::vector<std::size_t>& dims) {
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) out += (i ? "," : "") + std::to_string(dims[i]);
  return out;
}

struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

template <typename T>
Field int_field(T RunConfig::*member) {
  return {[member](const RunConfig& c) { return std::to_string(c.*member); },
          [member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse_int<T>(k, v); }};
}

Field real_field(double RunConfig::*member) {
  return {[member](const RunConfig& c) { return real_text(c.*member); },
          [member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse_real(k, v); }};
}

Field bool_field(bool RunConfig::*member) {
  return {[member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); },
          [member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse_bool(k, v); }};
}

Field seed_field(std::optional<std::uint64_t> RunConfig::*member) {
  return {[member](const RunConfig& c) { return (c.*member) ? std::to_string(*(c.*member)) : std::string(); },
          [member](RunConfig& c, const std::string& k, const std::string& v) {
            if (v.empty())
              (c.*member).reset();
            else
              c.*member = parse_int<std::uint64_t>(k, v);
          }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"name", {[](const RunConfig& c) { return c.name; },
                [](RunConfig& c, const std::string&, const std::string& v) { c.name = v; }}},
      {"encoder_hidden", {[](const RunConfig& c) { return dims_text(c.encoder_hidden); },
                          [](RunConfig& c, const std::string& k, const std::string& v) {
                            c.encoder_hidden = parse_dims(k, v);
                          }}},
      {"representation_dim", int_field(&RunConfig::representation_dim)},
      {"projection_hidden", int_field(&RunConfig::projection_hidden)},
      {"projection_dim", int_field(&RunConfig::projection_dim)},
      {"policy", {[](const RunConfig& c) { return to_string(c.policy); },
                  [](RunConfig& c, const std::string&, const std::string& v) { c.policy = parse_policy(v); }}},
      {"lazy_interval", int_field(&RunConfig::lazy_interval)},
      {"buffer_size", int_field(&RunConfig::buffer_size)},
      {"segment_size", int_field(&RunConfig::segment_size)},
      {"stc", int_field(&RunConfig::stc)},
      {"total_emissions", int_field(&RunConfig::total_emissions)},
      {"geometric_runs", bool_field(&RunConfig::geometric_runs)},
      {"dataset_path", {[](const RunConfig& c) { return c.dataset_path; },
                        [](RunConfig& c, const std::string&, const std::string& v) { c.dataset_path = v; }}},
      {"num_classes", int_field(&RunConfig::num_classes)},
      {"dim", int_field(&RunConfig::dim)},
      {"per_class", int_field(&RunConfig::per_class)},
      {"separation", real_field(&RunConfig::separation)},
      {"train_fraction", real_field(&RunConfig::train_fraction)},
      {"learning_rate", real_field(&RunConfig::learning_rate)},
      {"temperature", real_field(&RunConfig::temperature)},
      {"weight_decay", real_field(&RunConfig::weight_decay)},
      {"crop_min", real_field(&RunConfig::crop_min)},
      {"crop_max", real_field(&RunConfig::crop_max)},
      {"flip_probability", real_field(&RunConfig::flip_probability)},
      {"noise_sigma", real_field(&RunConfig::noise_sigma)},
      {"mask_fraction", real_field(&RunConfig::mask_fraction)},
      {"label_fraction", real_field(&RunConfig::label_fraction)},
      {"probe_epochs", int_field(&RunConfig::probe_epochs)},
      {"probe_learning_rate", real_field(&RunConfig::probe_learning_rate)},
      {"probe_batch_size", int_field(&RunConfig::probe_batch_size)},
      {"checkpoint_fraction", real_field(&RunConfig::checkpoint_fraction)},
      {"probe_at_checkpoints", bool_field(&RunConfig::probe_at_checkpoints)},
      {"seed", int_field(&RunConfig::seed)},
      {"data_seed", seed_field(&RunConfig::data_seed)},
      {"model_seed", seed_field(&RunConfig::model_seed)},
      {"stream_seed", seed_field(&RunConfig::stream_seed)},
      {"augment_seed", seed_field(&RunConfig::augment_seed)},
      {"policy_seed", seed_field(&RunConfig::policy_seed)},
      {"probe_seed", seed_field(&RunConfig::probe_seed)},
  };
  return table;
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) { return mix64(mix64(seed) ^ tag); }

}  // namespace

std::uint64_t RunConfig::resolved_data_seed() const { return data_seed.value_or(derive(seed, 1)); }
std::uint64_t RunConfig::resolved_model_seed() const { return model_seed.value_or(derive(seed, 2)); }
std::uint64_t RunConfig::resolved_stream_seed() const { return stream_seed.value_or(derive(seed, 3)); }
std::uint64_t RunConfig::resolved_augment_seed() const { return augment_seed.value_or(derive(seed, 4)); }
std::uint64_t RunConfig::resolved_policy_seed() const { return policy_seed.value_or(derive(seed, 5)); }
std::uint64_t RunConfig::resolved_probe_seed() const { return probe_seed.value_or(derive(seed, 6)); }

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& [name, field] : fields()) {
    if (name == key) {
      field.set(*this, key, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, field] : fields()) out.emplace_back(name, field.get(*this));
  return out;
}

void RunConfig::validate() const {
  if (buffer_size < 2) throw ConfigError("buffer_size must be at least 2");
  if (effective_segment_size() > buffer_size) throw ConfigError("segment_size must not exceed buffer_size");
  if (stc < 1) throw ConfigError("stc must be at least 1");
  if (!(label_fraction > 0.0 && label_fraction <= 1.0)) throw ConfigError("label_fraction must lie in (0, 1]");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (!(checkpoint_fraction >= 0.0 && checkpoint_fraction <= 1.0))
    throw ConfigError("checkpoint_fraction must lie in [0, 1]");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
  if (representation_dim == 0 || projection_hidden == 0 || projection_dim == 0)
    throw ConfigError("model dimensions must be positive");
  for (std::size_t w : encoder_hidden)
    if (w == 0) throw ConfigError("encoder_hidden widths must be positive");
  if (dataset_path.empty() && (num_classes == 0 || dim == 0 || per_class == 0))
    throw ConfigError("synthetic data needs positive num_classes, dim and per_class");
  if (probe_batch_size == 0) throw ConfigError("probe_batch_size must be positive");
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    try {
      base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, std::move(base));
}

std::string to_config_text(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : config.entries()) out += k + " = " + v + "\n";
  return out;
}

std::string to_json(const RunConfig& config) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : config.entries()) j[k] = v;
  nlohmann::ordered_json seeds;
  seeds["data"] = config.resolved_data_seed();
  seeds["model"] = config.resolved_model_seed();
  seeds["stream"] = config.resolved_stream_seed();
  seeds["augment"] = config.resolved_augment_seed();
  seeds["policy"] = config.resolved_policy_seed();
  seeds["probe"] = config.resolved_probe_seed();
  j["resolved_seeds"] = seeds;
  return j.dump(2) + "\n";
}

}  // namespace sdc
