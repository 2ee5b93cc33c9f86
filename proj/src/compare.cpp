#include "sdc/compare.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "sdc/harness.hpp"

namespace sdc {

RunSummary run_once(const RunConfig& config) {
  RunConfig c = config;
  c.probe_at_checkpoints = false;
  c.checkpoint_fraction = 0.0;
  const RunData data = prepare_data(c);
  const Stage1Result result = run_stage1(c, data);
  const double accuracy = run_stage2(result.model, data, c.label_fraction, c.resolved_probe_seed(), probe_options_for(c));
  return {accuracy, result.metrics.total_fresh_scores(), result.metrics.total_reused_scores()};
}

std::vector<ComparisonRow> compare_policies(const std::vector<RunConfig>& configs,
                                            const std::vector<std::uint64_t>& seeds, unsigned workers) {
  const std::size_t total = configs.size() * seeds.size();
  std::vector<RunSummary> results(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      try {
        RunConfig c = configs[job / seeds.size()];
        c.seed = seeds[job % seeds.size()];
        c.data_seed = c.model_seed = c.stream_seed = c.augment_seed = c.policy_seed = c.probe_seed = std::nullopt;
        results[job] = run_once(c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(total, 1)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ComparisonRow> rows;
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    ComparisonRow row;
    row.name = configs[ci].name;
    row.policy = configs[ci].policy;
    row.lazy_interval = configs[ci].lazy_interval;
    row.buffer_size = configs[ci].buffer_size;
    double fresh = 0.0, reused = 0.0;
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      const RunSummary& r = results[ci * seeds.size() + si];
      row.accuracies.push_back(r.accuracy);
      row.mean_accuracy += r.accuracy;
      fresh += static_cast<double>(r.fresh_scores);
      reused += static_cast<double>(r.reused_scores);
    }
    const double n = static_cast<double>(seeds.size());
    if (!seeds.empty()) {
      row.mean_accuracy /= n;
      row.mean_fresh_scores = fresh / n;
      row.mean_reused_scores = reused / n;
    }
    if (seeds.size() > 1) {
      double ss = 0.0;
      for (double a : row.accuracies) ss += (a - row.mean_accuracy) * (a - row.mean_accuracy);
      row.std_accuracy = std::sqrt(ss / (n - 1.0));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {
std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}
}  // namespace

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string out = "name,policy,lazy_interval,buffer_size,runs,mean_accuracy,std_accuracy,mean_fresh_scores,mean_reused_scores\n";
  for (const auto& r : rows)
    out += r.name + ',' + to_string(r.policy) + ',' + std::to_string(r.lazy_interval) + ',' +
           std::to_string(r.buffer_size) + ',' + std::to_string(r.accuracies.size()) + ',' + num(r.mean_accuracy) +
           ',' + num(r.std_accuracy) + ',' + num(r.mean_fresh_scores) + ',' + num(r.mean_reused_scores) + '\n';
  return out;
}

std::string comparison_json(const std::vector<ComparisonRow>& rows) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["policy"] = to_string(r.policy);
    j["lazy_interval"] = r.lazy_interval;
    j["buffer_size"] = r.buffer_size;
    j["accuracies"] = r.accuracies;
    j["mean_accuracy"] = r.mean_accuracy;
    j["std_accuracy"] = r.std_accuracy;
    j["mean_fresh_scores"] = r.mean_fresh_scores;
    j["mean_reused_scores"] = r.mean_reused_scores;
    out.push_back(std::move(j));
  }
  return out.dump(2) + "\n";
}

}  // namespace sdc
