#include "sdc/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>

#include "sdc/adam.hpp"
#include "sdc/binary_io.hpp"
#include "sdc/checkpoint.hpp"
#include "sdc/objective.hpp"
#include "sdc/scoring.hpp"
#include "sdc/selection.hpp"
#include "sdc/stream.hpp"

namespace sdc {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Policy-dependent selection for one iteration.
struct SelectionOutcome {
  Buffer next;
  std::size_t fresh = 0;
  std::size_t reused = 0;
};

class Stage1Runner {
 public:
  Stage1Runner(const RunConfig& config, const RunData& data, const Stage1Hooks& hooks)
      : config_(config),
        data_(data),
        hooks_(hooks),
        layout_(data.train.layout()),
        model_(make_model(model_config(), config.resolved_model_seed())),
        params_(model_.parameter_tensors()),
        adam_(make_adam_state(params_, adam_options())),
        augment_(augmentor_for(config, layout_)),
        stream_(data.train, {config.stc, config.total_emissions, config.resolved_stream_seed(), config.geometric_runs}) {
    buffer_.capacity = config.buffer_size;
    selective_bp_.augment = augment_;
    selective_bp_.augment.seed = config.resolved_policy_seed();
    selective_bp_.temperature = config.temperature;
  }

  Stage1Result run(const std::optional<std::filesystem::path>& out_dir) {
    if (out_dir) {
      std::filesystem::create_directories(*out_dir / "checkpoints");
      io::write_file(*out_dir / "config.json", to_json(config_));
    }
    const std::uint64_t cadence =
        config_.checkpoint_fraction > 0.0
            ? std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(
                                             config_.checkpoint_fraction * static_cast<double>(config_.total_emissions))))
            : std::numeric_limits<std::uint64_t>::max();
    std::uint64_t next_checkpoint = cadence;
    std::uint64_t t = 0;
    try {
      while (!stream_.exhausted()) {
        step(t);
        while (stream_.emitted() >= next_checkpoint) {
          checkpoint(out_dir, next_checkpoint);
          next_checkpoint = next_checkpoint > std::numeric_limits<std::uint64_t>::max() - cadence
                                ? std::numeric_limits<std::uint64_t>::max()
                                : next_checkpoint + cadence;
        }
        ++t;
      }
      if (metrics_.checkpoints.empty() || metrics_.checkpoints.back().seen_samples != stream_.emitted())
        checkpoint(out_dir, stream_.emitted());
      if (out_dir) save_checkpoint(*out_dir / "final.ssel", model_.parameters());
    } catch (const Error& e) {
      flush(out_dir);
      throw RunError(t, e.what());
    } catch (const std::exception& e) {
      flush(out_dir);
      throw RunError(t, e.what());
    }
    flush(out_dir);
    return Stage1Result{std::move(model_), std::move(metrics_), label_reads_};
  }

 private:
  ModelConfig model_config() const {
    ModelConfig mc;
    mc.input_dim = data_.train.feature_dim();
    mc.encoder_hidden = config_.encoder_hidden;
    mc.representation_dim = config_.representation_dim;
    mc.projection_hidden = config_.projection_hidden;
    mc.projection_dim = config_.projection_dim;
    return mc;
  }

  AdamOptions adam_options() const {
    AdamOptions o;
    o.learning_rate = config_.learning_rate;
    o.weight_decay = config_.weight_decay;
    return o;
  }

  SelectionOutcome select(const Segment& incoming, std::uint64_t t) {
    const std::size_t candidates = buffer_.size() + incoming.size();
    const bool fits = candidates <= buffer_.capacity;
    SelectionOutcome out;
    switch (config_.policy) {
      case PolicyKind::contrast: {
        const CandidateScores scores = score_candidates(model_, buffer_, incoming, config_.lazy(), layout_, t);
        if (hooks_.on_scores) hooks_.on_scores(t, scores);
        out.fresh = scores.fresh;
        out.reused = scores.reused;
        out.next = select_contrast(buffer_, incoming, scores.records, t);
        break;
      }
      case PolicyKind::random: {
        Rng rng = Rng::substream(config_.resolved_policy_seed(), {t});
        out.next = select_random(buffer_, incoming, rng, t);
        break;
      }
      case PolicyKind::fifo:
        out.next = select_fifo(buffer_, incoming, t);
        break;
      case PolicyKind::selective_bp: {
        Rng rng = Rng::substream(config_.resolved_policy_seed(), {t});
        out.next = select_selective_bp(buffer_, incoming, model_, selective_bp_, rng, t);
        if (!fits) out.fresh = candidates;
        break;
      }
      case PolicyKind::k_center:
        out.next = select_k_center(buffer_, incoming, model_, layout_, t);
        if (!fits) out.fresh = candidates;
        break;
    }
    return out;
  }

  void train_on_buffer(std::uint64_t t, IterationRecord& rec) {
    if (buffer_.size() < 2) {
      rec.train_loss = std::nan("");
      return;
    }
    if (hooks_.on_training_batch) hooks_.on_training_batch(t, buffer_);
    const std::size_t d = layout_.size();
    std::vector<double> rows;
    rows.reserve(2 * buffer_.size() * d);
    for (std::size_t k = 0; k < buffer_.size(); ++k) {
      auto [a, b] = strong_pair_at(buffer_.entries[k].sample, augment_, t, k);
      rows.insert(rows.end(), a.features.begin(), a.features.end());
      rows.insert(rows.end(), b.features.begin(), b.features.end());
    }
    Tape tape;
    const Tensor z = model_.embed(Tensor({2 * buffer_.size(), d}, std::move(rows)), &tape);
    const Tensor loss = nt_xent_loss(ContrastBatch{z, config_.temperature}, &tape);
    model_.zero_grad();
    tape.backward(loss);
    adam_step(adam_, params_);
    rec.train_loss = loss.item() / static_cast<double>(2 * buffer_.size());
  }

  void step(std::uint64_t t) {
    const auto started = std::chrono::steady_clock::now();
    const Segment incoming = stream_.next_segment(config_.effective_segment_size());
    IterationRecord rec;
    rec.iteration = t;
    rec.seen_samples = stream_.emitted();

    const std::uint64_t reads_before = label_reads();
    SelectionOutcome sel = select(incoming, t);
    buffer_ = std::move(sel.next);
    rec.fresh_scores = sel.fresh;
    rec.reused_scores = sel.reused;
    for (const auto& e : buffer_.entries) (e.age == 0 && e.insertion_iteration == t ? rec.kept_from_incoming : rec.kept_from_buffer)++;
    train_on_buffer(t, rec);
    advance_ages(buffer_);
    const std::uint64_t reads = label_reads() - reads_before;
    label_reads_ += reads;
    if (reads != 0) throw ContractError(std::to_string(reads) + " label reads during selection and training");

    rec.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    metrics_.iterations.push_back(rec);
  }

  void checkpoint(const std::optional<std::filesystem::path>& out_dir, std::uint64_t seen) {
    CheckpointRecord rec;
    rec.seen_samples = seen;
    if (out_dir) {
      rec.file = "checkpoints/ckpt_" + std::to_string(seen) + ".ssel";
      save_checkpoint(*out_dir / rec.file, model_.parameters());
    }
    if (config_.probe_at_checkpoints)
      rec.probe_accuracy = run_probe(model_.encoder(), data_.train, data_.test, probe_options_for(config_)).accuracy;
    metrics_.checkpoints.push_back(std::move(rec));
  }

  void flush(const std::optional<std::filesystem::path>& out_dir) const {
    if (!out_dir) return;
    io::write_file(*out_dir / "metrics.csv", metrics_csv(metrics_));
    io::write_file(*out_dir / "timing.csv", timing_csv(metrics_));
    io::write_file(*out_dir / "probe.csv", probe_csv(metrics_));
  }

  const RunConfig& config_;
  const RunData& data_;
  const Stage1Hooks& hooks_;
  Layout layout_;
  Model model_;
  std::vector<Tensor> params_;
  AdamState adam_;
  AugmentorConfig augment_;
  SelectiveBpOptions selective_bp_;
  StreamEmitter stream_;
  Buffer buffer_;
  RunMetrics metrics_;
  std::uint64_t label_reads_ = 0;
};

}  // namespace

std::size_t RunMetrics::total_fresh_scores() const {
  std::size_t n = 0;
  for (const auto& r : iterations) n += r.fresh_scores;
  return n;
}

std::size_t RunMetrics::total_reused_scores() const {
  std::size_t n = 0;
  for (const auto& r : iterations) n += r.reused_scores;
  return n;
}

RunData prepare_data(const RunConfig& config) {
  Dataset full = config.dataset_path.empty()
                     ? make_synthetic(config.num_classes, config.dim, config.per_class, config.separation,
                                      config.resolved_data_seed())
                     : load_dataset(config.dataset_path);
  auto [train, test] = split_train_test(full, config.train_fraction, mix64(config.resolved_data_seed()));
  return {std::move(train), std::move(test)};
}

AugmentorConfig augmentor_for(const RunConfig& config, const Layout& layout) {
  AugmentorConfig a;
  a.layout = layout;
  a.crop_min = config.crop_min;
  a.crop_max = config.crop_max;
  a.flip_enabled = config.flip_probability > 0.0;
  a.flip_probability = config.flip_probability;
  a.noise_enabled = config.noise_sigma > 0.0;
  a.noise_sigma = config.noise_sigma;
  a.mask_enabled = config.mask_fraction > 0.0;
  a.mask_fraction = config.mask_fraction;
  a.seed = config.resolved_augment_seed();
  a.validate();
  return a;
}

ProbeOptions probe_options_for(const RunConfig& config) {
  ProbeOptions p;
  p.label_fraction = config.label_fraction;
  p.epochs = config.probe_epochs;
  p.learning_rate = config.probe_learning_rate;
  p.batch_size = config.probe_batch_size;
  p.seed = config.resolved_probe_seed();
  return p;
}

Stage1Result run_stage1(const RunConfig& config, const RunData& data,
                        const std::optional<std::filesystem::path>& out_dir, const Stage1Hooks& hooks) {
  config.validate();
  Stage1Runner runner(config, data, hooks);
  return runner.run(out_dir);
}

double run_stage2(const Model& model, const RunData& data, double label_fraction, std::uint64_t seed,
                  const ProbeOptions& base) {
  ProbeOptions options = base;
  options.label_fraction = label_fraction;
  options.seed = seed;
  return run_probe(model.encoder(), data.train, data.test, options).accuracy;
}

double run_stage2(const std::filesystem::path& checkpoint, const RunData& data, double label_fraction,
                  std::uint64_t seed, const ProbeOptions& base) {
  const Model model = Model::from_parameters(load_checkpoint(checkpoint));
  if (model.encoder().input_dim() != data.train.feature_dim())
    throw ConfigError("checkpoint expects " + std::to_string(model.encoder().input_dim()) +
                      " input features but the dataset has " + std::to_string(data.train.feature_dim()));
  return run_stage2(model, data, label_fraction, seed, base);
}

std::string metrics_csv(const RunMetrics& metrics) {
  std::string out = "iteration,seen_samples,train_loss,fresh_scores,reused_scores,kept_from_buffer,kept_from_incoming\n";
  for (const auto& r : metrics.iterations) {
    out += std::to_string(r.iteration) + ',' + std::to_string(r.seen_samples) + ',' + num(r.train_loss) + ',' +
           std::to_string(r.fresh_scores) + ',' + std::to_string(r.reused_scores) + ',' +
           std::to_string(r.kept_from_buffer) + ',' + std::to_string(r.kept_from_incoming) + '\n';
  }
  return out;
}

std::string timing_csv(const RunMetrics& metrics) {
  std::string out = "iteration,wall_time_ms\n";
  for (const auto& r : metrics.iterations) out += std::to_string(r.iteration) + ',' + num(r.wall_time_ms) + '\n';
  return out;
}

std::string probe_csv(const RunMetrics& metrics) {
  std::string out = "seen_samples,probe_accuracy,checkpoint\n";
  for (const auto& c : metrics.checkpoints)
    out += std::to_string(c.seen_samples) + ',' + (c.probe_accuracy ? num(*c.probe_accuracy) : std::string()) + ',' +
           c.file + '\n';
  return out;
}

}  // namespace sdc
