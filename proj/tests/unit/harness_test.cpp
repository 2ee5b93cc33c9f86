#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "sdc/binary_io.hpp"
#include "sdc/checkpoint.hpp"
#include "sdc/compare.hpp"
#include "sdc/errors.hpp"
#include "sdc/harness.hpp"
#include "sdc/stream.hpp"

using namespace sdc;
namespace fs = std::filesystem;

namespace {
RunConfig tiny(PolicyKind policy = PolicyKind::contrast) {
  RunConfig c;
  c.num_classes = 4;
  c.dim = 8;
  c.per_class = 40;
  c.encoder_hidden = {16};
  c.representation_dim = 8;
  c.projection_hidden = 8;
  c.projection_dim = 4;
  c.buffer_size = 8;
  c.stc = 10;
  c.total_emissions = 200;
  c.probe_epochs = 5;
  c.learning_rate = 1e-3;
  c.policy = policy;
  return c;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("sdc_harness_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Stage1, FifoTrainsOnExactlyTheLatestSegment) {
  const RunConfig c = tiny(PolicyKind::fifo);
  const RunData data = prepare_data(c);
  StreamEmitter replay(data.train, {c.stc, c.total_emissions, c.resolved_stream_seed(), false});
  std::size_t checked = 0;
  Stage1Hooks hooks;
  hooks.on_training_batch = [&](std::uint64_t, const Buffer& b) {
    const auto segment = replay.next_segment(c.buffer_size);
    ASSERT_EQ(b.size(), segment.size());
    for (std::size_t i = 0; i < segment.size(); ++i) {
      EXPECT_EQ(b.entries[i].sample.arrival_index, segment[i].arrival_index);
      EXPECT_EQ(b.entries[i].sample.features, segment[i].features);
    }
    ++checked;
  };
  run_stage1(c, data, std::nullopt, hooks);
  EXPECT_EQ(checked, 25u);
}

TEST(Stage1, ZeroEmissionsWritesInitialModel) {
  RunConfig c = tiny();
  c.total_emissions = 0;
  const auto dir = scratch("empty");
  const auto result = run_stage1(c, prepare_data(c), dir);
  EXPECT_TRUE(result.metrics.iterations.empty());
  const Model init = make_model(
      [&] {
        ModelConfig mc;
        mc.input_dim = c.dim;
        mc.encoder_hidden = c.encoder_hidden;
        mc.representation_dim = c.representation_dim;
        mc.projection_hidden = c.projection_hidden;
        mc.projection_dim = c.projection_dim;
        return mc;
      }(),
      c.resolved_model_seed());
  EXPECT_EQ(io::read_file(dir / "final.ssel"), encode_checkpoint(init.parameters()));
  EXPECT_EQ(io::read_file(dir / "metrics.csv"),
            "iteration,seen_samples,train_loss,fresh_scores,reused_scores,kept_from_buffer,kept_from_incoming\n");
  fs::remove_all(dir);
}

TEST(Stage1, OutputsAreByteIdenticalAcrossRuns) {
  const RunConfig c = tiny();
  const RunData data = prepare_data(c);
  const auto a = scratch("det_a"), b = scratch("det_b");
  run_stage1(c, data, a);
  run_stage1(c, data, b);
  for (const char* f : {"metrics.csv", "probe.csv", "config.json", "final.ssel", "checkpoints/ckpt_100.ssel"})
    EXPECT_EQ(io::read_file(a / f), io::read_file(b / f)) << f;
  EXPECT_TRUE(fs::exists(a / "timing.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Stage1, CheckpointCadenceAndProbeCurve) {
  const RunConfig c = tiny();
  const auto result = run_stage1(c, prepare_data(c));
  ASSERT_EQ(result.metrics.checkpoints.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(result.metrics.checkpoints[i].seen_samples, 20 * (i + 1));
    ASSERT_TRUE(result.metrics.checkpoints[i].probe_accuracy.has_value());
  }
}

TEST(Stage1, NoLabelReadsAndScoreAccounting) {
  for (auto policy : {PolicyKind::contrast, PolicyKind::random, PolicyKind::fifo, PolicyKind::selective_bp,
                      PolicyKind::k_center}) {
    RunConfig c = tiny(policy);
    c.lazy_interval = 3;
    const auto result = run_stage1(c, prepare_data(c));
    EXPECT_EQ(result.label_reads_during_training, 0u) << to_string(policy);
    std::uint64_t seen = 0;
    std::size_t resident = 0;
    for (const auto& r : result.metrics.iterations) {
      EXPECT_GE(r.seen_samples, seen);
      const std::size_t incoming = r.seen_samples - seen;
      if (policy == PolicyKind::contrast) {
        EXPECT_EQ(r.fresh_scores + r.reused_scores, resident + incoming);
      }
      EXPECT_EQ(r.kept_from_buffer + r.kept_from_incoming, std::min(resident + incoming, c.buffer_size));
      resident = r.kept_from_buffer + r.kept_from_incoming;
      seen = r.seen_samples;
      if (r.iteration > 0) {
        EXPECT_TRUE(std::isfinite(r.train_loss));
      }
    }
    if (policy == PolicyKind::contrast) {
      EXPECT_GT(result.metrics.total_reused_scores(), 0u);
    }
  }
}

TEST(Stage1, SegmentSmallerThanBuffer) {
  RunConfig c = tiny();
  c.segment_size = 3;
  const auto result = run_stage1(c, prepare_data(c));
  EXPECT_EQ(result.metrics.iterations.size(), 67u);
  EXPECT_TRUE(std::isnan(result.metrics.iterations[0].train_loss) == false);
}

TEST(Stage2, CheckpointFileMatchesInMemoryModel) {
  RunConfig c = tiny();
  c.probe_at_checkpoints = false;
  const RunData data = prepare_data(c);
  const auto dir = scratch("stage2");
  const auto result = run_stage1(c, data, dir);
  const double a = run_stage2(result.model, data, 1.0, 3, probe_options_for(c));
  const double b = run_stage2(dir / "final.ssel", data, 1.0, 3, probe_options_for(c));
  EXPECT_EQ(a, b);
  EXPECT_THROW(run_stage2(dir / "missing.ssel", data, 1.0, 3), DataError);
  fs::remove_all(dir);
}

TEST(Compare, AggregatesPerConfig) {
  RunConfig a = tiny(PolicyKind::contrast), b = tiny(PolicyKind::random);
  a.name = "a";
  b.name = "b";
  const auto rows = compare_policies({a, b}, {1, 2}, 2);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].accuracies.size(), 2u);
  EXPECT_NEAR(rows[0].mean_accuracy, (rows[0].accuracies[0] + rows[0].accuracies[1]) / 2, 1e-15);
  EXPECT_GT(rows[0].mean_fresh_scores, 0.0);
  EXPECT_EQ(rows[1].mean_fresh_scores, 0.0);
  // Parallel execution must not change results.
  const auto serial = compare_policies({a, b}, {1, 2}, 1);
  EXPECT_EQ(serial[0].accuracies, rows[0].accuracies);
  EXPECT_EQ(serial[1].accuracies, rows[1].accuracies);
  EXPECT_NE(comparison_csv(rows).find("a,contrast"), std::string::npos);
}
