#include <gtest/gtest.h>

#include <json.hpp>

#include "sdc/config.hpp"
#include "sdc/errors.hpp"

using namespace sdc;

TEST(Config, DefaultsMatchDeskScaleRun) {
  const RunConfig c;
  EXPECT_EQ(c.buffer_size, 64u);
  EXPECT_EQ(c.stc, 100u);
  EXPECT_EQ(c.total_emissions, 20000u);
  EXPECT_EQ(c.num_classes * c.per_class, 5000u);
  EXPECT_EQ(c.dim, 32u);
  EXPECT_EQ(c.separation, 3.0);
  EXPECT_EQ(c.learning_rate, 1e-4);
  EXPECT_EQ(c.weight_decay, 1e-4);
  EXPECT_EQ(c.temperature, 0.5);
  EXPECT_EQ(c.effective_segment_size(), 64u);
  EXPECT_FALSE(c.lazy().enabled);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ParsesKeyValueTextWithComments) {
  const auto c = parse_config(
      "# sweep entry\n"
      "policy = fifo\n"
      "lazy_interval=20   # every 20 iterations\n"
      "encoder_hidden = 64,32\n"
      "geometric_runs = true\n"
      "\n"
      "seed = 9\n");
  EXPECT_EQ(c.policy, PolicyKind::fifo);
  EXPECT_TRUE(c.lazy().enabled);
  EXPECT_EQ(c.lazy().interval, 20u);
  EXPECT_EQ(c.encoder_hidden, (std::vector<std::size_t>{64, 32}));
  EXPECT_TRUE(c.geometric_runs);
  EXPECT_EQ(c.seed, 9u);
}

TEST(Config, ErrorsNameTheLine) {
  try {
    parse_config("stc = 4\nbuffer_size = many\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config("no equals sign"), ConfigError);
  EXPECT_THROW(parse_config("unknown_key = 1"), ConfigError);
  EXPECT_THROW(parse_config("policy = best"), ConfigError);
}

TEST(Config, ValidationRejectsBadValues) {
  auto bad = [](const std::string& text) { return parse_config(text); };
  EXPECT_THROW(bad("buffer_size = 1").validate(), ConfigError);
  EXPECT_THROW(bad("segment_size = 65").validate(), ConfigError);
  EXPECT_THROW(bad("label_fraction = 0").validate(), ConfigError);
  EXPECT_THROW(bad("temperature = 0").validate(), ConfigError);
  EXPECT_THROW(bad("stc = 0").validate(), ConfigError);
}

TEST(Config, TextRoundTrip) {
  RunConfig c = parse_config("policy = k_center\nlazy_interval = 4\nseparation = 2.5\nmodel_seed = 77\n");
  const RunConfig back = parse_config(to_config_text(c));
  EXPECT_EQ(to_config_text(back), to_config_text(c));
  EXPECT_EQ(back.resolved_model_seed(), 77u);
}

TEST(Config, SeedsDeriveIndependently) {
  RunConfig a, b;
  b.seed = 2;
  EXPECT_NE(a.resolved_model_seed(), a.resolved_stream_seed());
  EXPECT_NE(a.resolved_model_seed(), b.resolved_model_seed());
  a.stream_seed = 5;
  EXPECT_EQ(a.resolved_stream_seed(), 5u);
  EXPECT_NE(a.resolved_model_seed(), 5u);
}

TEST(Config, JsonSidecarCarriesResolvedSeeds) {
  const auto j = nlohmann::json::parse(to_json(RunConfig{}));
  EXPECT_EQ(j["policy"], "contrast");
  EXPECT_TRUE(j.contains("resolved_seeds"));
  EXPECT_EQ(j["resolved_seeds"]["model"].get<std::uint64_t>(), RunConfig{}.resolved_model_seed());
}
