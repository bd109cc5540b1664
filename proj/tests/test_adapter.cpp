#include <cstdlib>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "topicshift/adapter.hpp"
#include "topicshift/augment.hpp"
#include "topicshift/error.hpp"
#include "topicshift/experiment.hpp"

namespace ts = topicshift;
using ts::testing::TempDir;

namespace {

const char* const kStub = STUB_ADAPTER_PATH;

/// Sets an environment variable for the lifetime of the object.
class ScopedEnv {
 public:
  ScopedEnv(const char* name, const std::string& value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    ::setenv(name, value.c_str(), 1);
  }
  ~ScopedEnv() {
    if (old_) {
      ::setenv(name_, old_->c_str(), 1);
    } else {
      ::unsetenv(name_);
    }
  }

 private:
  const char* name_;
  std::optional<std::string> old_;
};

std::string random_text(ts::Rng& rng) {
  static const std::vector<std::string> pieces = {"plain", " ", "\"quoted\"", "back\\slash", "tab\there", "new\nline",
                                                  "ünïcödé", "日本語", "emoji \xF0\x9F\x99\x82", "\x01ctl", "/"};
  std::string s;
  const auto n = ts::uniform_index(rng, 6);
  for (std::size_t i = 0; i < n; ++i) s += pieces[ts::uniform_index(rng, pieces.size())];
  return s;
}

}  // namespace

TEST(Adapter, HandshakeReportsCapabilities) {
  ts::AdapterProcess p(kStub);
  EXPECT_THROW(p.capabilities(), ts::AdapterError);
  const auto& caps = p.handshake();
  EXPECT_EQ(caps.protocol_version, ts::kAdapterProtocolVersion);
  EXPECT_EQ(caps.genres.size(), 6u);
  EXPECT_TRUE(caps.supports("generate"));
  EXPECT_FALSE(caps.supports("fly"));
  EXPECT_EQ(p.close(), 0);
}

TEST(Adapter, VersionMismatchIsRejected) {
  ts::AdapterProcess p(kStub, {"--protocol", "2"});
  try {
    p.handshake();
    FAIL() << "expected a version error";
  } catch (const ts::AdapterError& e) {
    EXPECT_NE(std::string(e.what()).find("version 2"), std::string::npos);
    EXPECT_NE(e.payload().find("protocol_version"), std::string::npos);
  }
}

TEST(Adapter, OpsRequireHandshake) {
  ts::AdapterProcess p(kStub);
  try {
    p.request({{"op", "echo"}});
    FAIL() << "expected an adapter error";
  } catch (const ts::AdapterError& e) {
    EXPECT_NE(std::string(e.what()).find("handshake_required"), std::string::npos);
  }
}

TEST(Adapter, SoakKeepsRequestsAndResponsesInStep) {
  ts::AdapterProcess p(kStub);
  p.handshake();
  ts::Rng rng(42);
  int desyncs = 0;
  int framing_mismatches = 0;
  int responses = 0;
  for (int i = 0; i < 1000; ++i) {
    if (i % 5 == 4) {
      nlohmann::json gen = {{"op", "generate"},
                            {"genre", "news"},
                            {"keywords", {random_text(rng), "kw"}},
                            {"max_tokens", 1 + static_cast<int>(ts::uniform_index(rng, 30))},
                            {"seed", i}};
      const auto r = p.request(gen);
      ++responses;
      if (!r.contains("text")) ++desyncs;
      continue;
    }
    nlohmann::json msg = {{"op", "echo"}, {"id", i}, {"payload", random_text(rng)}, {"n", ts::uniform01(rng)}};
    const auto line = p.exchange(ts::AdapterProcess::frame(msg));
    ++responses;
    if (line != ts::AdapterProcess::frame({{"echo", msg}})) ++framing_mismatches;
    if (nlohmann::json::parse(line).at("echo").at("id") != i) ++desyncs;
  }
  EXPECT_EQ(responses, 1000);
  EXPECT_EQ(desyncs, 0);
  EXPECT_EQ(framing_mismatches, 0);
  EXPECT_EQ(p.close(), 0);
}

TEST(Adapter, ErrorsCarryPayloadAndKeepSessionAlive) {
  ts::AdapterProcess p(kStub);
  p.handshake();
  try {
    p.request({{"op", "teleport"}});
    FAIL();
  } catch (const ts::AdapterError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown_op"), std::string::npos);
    EXPECT_EQ(nlohmann::json::parse(e.payload())["detail"], "teleport");
  }
  const auto raw = p.exchange("{not json");
  EXPECT_EQ(nlohmann::json::parse(raw)["error"], "malformed_request");
  EXPECT_THROW(p.request({{"op", "predict"}, {"texts", {"a"}}}), ts::AdapterError);
  EXPECT_THROW(p.exchange("{\"op\":\n\"echo\"}"), ts::AdapterError);
  EXPECT_EQ(p.request({{"op", "echo"}, {"id", 1}})["echo"]["id"], 1);
}

TEST(Adapter, ChildExitSurfacesAsError) {
  ts::AdapterProcess p(kStub);
  p.handshake();
  EXPECT_THROW(p.request({{"op", "exit"}}), ts::AdapterError);
  EXPECT_EQ(p.close(), 3);
  EXPECT_THROW(p.request({{"op", "echo"}}), ts::AdapterError);
  EXPECT_THROW(ts::AdapterProcess("/nonexistent/adapter"), ts::AdapterError);
}

TEST(Adapter, EnvironmentLookup) {
  {
    ScopedEnv env(ts::kAdapterEnv, "");
    EXPECT_FALSE(ts::adapter_from_environment());
  }
  ScopedEnv env(ts::kAdapterEnv, kStub);
  EXPECT_EQ(ts::adapter_from_environment()->string(), kStub);
}

TEST(ExternalGenerator, DeterministicAndNormalized) {
  auto shared = std::make_shared<ts::SharedAdapter>(std::make_unique<ts::AdapterProcess>(kStub));
  shared->process->handshake();
  const auto handle = ts::external_generator("review", shared, {"d1", "d2"});
  ts::KeywordSequence kw;
  kw.tokens = {"battery", "screen"};
  const auto a = ts::generate(handle, kw, 40, 7);
  const auto b = ts::generate(handle, kw, 40, 7);
  const auto c = ts::generate(handle, kw, 40, 8);
  EXPECT_EQ(a.text, b.text);
  EXPECT_NE(a.text, c.text);
  EXPECT_EQ(a.text, ts::normalize(a.text));
  EXPECT_EQ(a.genre, "review");
  EXPECT_EQ(ts::tokenize(a.text).size(), 40u);
  EXPECT_NE(a.text.find("battery"), std::string::npos);

  const auto broken = ts::external_generator("review", nullptr, {});
  EXPECT_THROW(ts::generate(broken, kw, 5, 1), ts::ConfigError);
}

TEST(ExternalBackends, PipelineRunsThroughAdapter) {
  TempDir dir;
  ts::ExperimentConfig c;
  c.planted.genres = 2;
  c.planted.topics = 4;
  c.planted.vocab_size = 600;
  c.planted.docs_per_genre = 150;
  c.planted.doc_length = 100;
  c.lda.topics = 4;
  c.lda.sweeps = 50;
  c.fold_in_sweeps = 10;
  c.n_values = {10};
  c.n_val = 10;
  c.n_test = 10;
  c.n_on_val = 10;
  c.synthetic_length = 30;
  c.seeds = 1;
  c.topics = {0};
  c.classifier_backend = "external";
  c.generator_backend = ts::GeneratorBackend::external;
  c.output = dir.path().string();

  {
    ScopedEnv unset(ts::kAdapterEnv, "");
    EXPECT_THROW(ts::prepare_pipeline(c), ts::ConfigError);
  }
  ScopedEnv env(ts::kAdapterEnv, kStub);
  const auto pipeline = ts::prepare_pipeline(c);
  const auto out = ts::run_experiment(pipeline);
  EXPECT_TRUE(out.failures.empty()) << (out.failures.empty() ? "" : out.failures.front());
  EXPECT_EQ(out.report.cells().size(), 4u);
  for (const auto& cell : out.report.cells()) EXPECT_EQ(cell.provenance["classifier"], "external");
  EXPECT_TRUE(std::filesystem::exists(dir / "adapter"));

  c.planted.genres = 8;  // "academic" and friends are not offered by the stub
  c.planted.docs_per_genre = 60;
  EXPECT_THROW(ts::prepare_pipeline(c), ts::AdapterError);
}
