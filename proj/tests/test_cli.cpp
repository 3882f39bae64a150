#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "ccc/cli/dispatch.hpp"
#include "support/test_support.hpp"

namespace ccc::cli {
namespace {

namespace fs = std::filesystem;

struct RunOutput {
  int code = 0;
  std::string out;
  std::string err;
};

RunOutput run(std::vector<std::string> args) {
  args.insert(args.begin(), "ccc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  testing::internal::CaptureStdout();
  testing::internal::CaptureStderr();
  RunOutput r;
  r.code = dispatch(static_cast<int>(argv.size()), argv.data());
  r.out = testing::internal::GetCapturedStdout();
  r.err = testing::internal::GetCapturedStderr();
  return r;
}

/// Last stderr line parsed as the JSON error record.
nlohmann::json error_record(const std::string& err) {
  std::string line;
  std::size_t end = err.find_last_not_of('\n');
  std::size_t start = err.rfind('\n', end);
  line = err.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
  return nlohmann::json::parse(line);
}

void write_file(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

TEST(Cli, MissingSubcommandIsUsageError) {
  const RunOutput r = run({});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE((r.out + r.err).find("gen-synth"), std::string::npos);
}

TEST(Cli, UnknownSubcommandAndFlag) {
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  const RunOutput r = run({"gen-synth", "--no-such-flag"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE((r.out + r.err).find("--no-such-flag"), std::string::npos);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run({"crossval", "--help"}).code, 0); }

TEST(Cli, UnknownConfigKeyNamesField) {
  test::TempDir dir("cli_cfg");
  write_file(dir / "run.json", R"({"seed": 1, "epoch": 3})");
  const RunOutput r = run({"gen-synth", "--config", (dir / "run.json").string(), "--out", (dir / "d").string()});
  EXPECT_EQ(r.code, 1);
  const auto e = error_record(r.err);
  EXPECT_EQ(e.at("error"), "config");
  EXPECT_EQ(e.at("field"), "epoch");
}

TEST(Cli, WrongTypeConfigValueNamesField) {
  test::TempDir dir("cli_type");
  write_file(dir / "run.json", R"({"n": "forty"})");
  const RunOutput r = run({"gen-synth", "--config", (dir / "run.json").string(), "--out", (dir / "d").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(error_record(r.err).at("field"), "n");
}

TEST(Cli, InvalidValueIsFieldLevelError) {
  test::TempDir dir("cli_bad");
  const RunOutput r = run({"gen-synth", "--n", "0", "--out", (dir / "d").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(error_record(r.err).at("field"), "n_sequences");
}

TEST(Cli, MissingRequiredSetting) {
  const RunOutput r = run({"gen-synth", "--n", "4"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(error_record(r.err).at("field"), "out");
}

TEST(Cli, GenSynthWritesSequencesAndAnnotations) {
  test::TempDir dir("cli_gen");
  const fs::path data = dir / "data";
  const RunOutput r = run({"gen-synth", "--seed", "7", "--n", "6", "--image-size", "32", "--frames", "11", "--out", data.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t seqs = 0;
  for (const auto& e : fs::directory_iterator(data)) {
    if (e.is_directory() && fs::exists(e.path() / "manifest.json")) ++seqs;
  }
  EXPECT_EQ(seqs, 6u);
  EXPECT_EQ(nlohmann::json::parse(test::read_text(data / "annotations.json")).size(), 3u);
}

TEST(Cli, FlagsOverrideConfig) {
  test::TempDir dir("cli_override");
  write_file(dir / "gen.json", R"({"n": 8, "image_size": 32, "frames": 11, "seed": 2})");
  const RunOutput r = run({"gen-synth", "--config", (dir / "gen.json").string(), "--n", "4", "--out", (dir / "d").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cfg = nlohmann::json::parse(test::read_text(dir / "d" / "config.json"));
  EXPECT_EQ(cfg.at("n_sequences"), 4);
  EXPECT_EQ(cfg.at("image_size"), 32);
}

TEST(Cli, GradCheckPrintsEveryLayer) {
  const RunOutput r = run({"grad-check", "--seed", "3"});
  EXPECT_EQ(r.code, 0) << r.out;
  for (const char* layer : {"conv2d", "dense", "relu", "sigmoid", "global_avg_pool", "mse", "bce"}) {
    EXPECT_NE(r.out.find(layer), std::string::npos) << layer;
  }
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, GradCheckImpossibleToleranceFails) {
  const RunOutput r = run({"grad-check", "--tolerance", "1e-12"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, CrossvalNeedsSegmentationCheckpoint) {
  test::TempDir dir("cli_nockpt");
  ASSERT_EQ(run({"gen-synth", "--n", "8", "--image-size", "32", "--frames", "11", "--out", (dir / "d").string()}).code, 0);
  const RunOutput r = run({"crossval", "--data", (dir / "d").string(), "--out", (dir / "cv").string(), "--mode", "fsl",
                           "--freeze", "frozen", "--epochs", "1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(error_record(r.err).at("field"), "pretrained");
}

TEST(Cli, PretrainCrossvalEvaluateSubgroups) {
  test::TempDir dir("cli_e2e");
  const std::string data = (dir / "data").string();
  ASSERT_EQ(run({"gen-synth", "--seed", "5", "--n", "16", "--image-size", "32", "--frames", "11", "--out", data}).code, 0);

  const RunOutput pre = run({"pretrain", "--data", data, "--out", (dir / "pre").string(), "--epochs", "2", "--seed", "5"});
  ASSERT_EQ(pre.code, 0) << pre.err;
  const std::string ckpt = (dir / "pre" / "segmentation.ckpt").string();
  EXPECT_TRUE(fs::exists(ckpt));
  EXPECT_TRUE(fs::exists(dir / "pre" / "pretrain_result.json"));

  write_file(dir / "run.json",
             nlohmann::json{{"data", data}, {"pretrained", ckpt}, {"epochs", 2}, {"episodes_per_epoch", 2},
                            {"k_shot", 2}, {"n_query", 2}, {"seed", 9}}.dump());
  const fs::path cv = dir / "cv";
  const RunOutput r = run({"crossval", "--config", (dir / "run.json").string(), "--mode", "fsl", "--freeze", "frozen",
                           "--out", cv.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto result = nlohmann::json::parse(test::read_text(cv / "result.json"));
  EXPECT_TRUE(result.contains("selected_epoch"));
  EXPECT_GE(result.at("selected_epoch").get<int>(), 1);
  for (const char* f : {"config.json", "predictions.csv", "fold_0.ckpt", "fold_3.ckpt"}) EXPECT_TRUE(fs::exists(cv / f)) << f;

  const RunOutput ev = run({"evaluate", "--run", cv.string(), "--out", (dir / "ev").string()});
  ASSERT_EQ(ev.code, 0) << ev.err;
  const std::string table = test::read_text(dir / "ev" / "tables.csv");
  EXPECT_EQ(table.rfind("Model,Pretrain,Freeze,Acc,Sens,Spec\nFSL,yes,yes,", 0), 0u) << table;

  const RunOutput sg = run({"subgroups", "--run", cv.string(), "--data", data});
  ASSERT_EQ(sg.code, 0) << sg.err;
  for (const char* f : {"subgroup_rentrop.csv", "subgroup_flow_grade.csv", "subgroup_size_tercile.csv", "metrics.json"}) {
    EXPECT_TRUE(fs::exists(cv / "subgroups" / f)) << f;
  }

  const RunOutput seg = run({"evaluate", "--data", data, "--pretrained", ckpt});
  ASSERT_EQ(seg.code, 0) << seg.err;
  EXPECT_TRUE(nlohmann::json::parse(seg.out).contains("dice"));

  const RunOutput tr = run({"train", "--config", (dir / "run.json").string(), "--mode", "vanilla", "--freeze", "unfrozen",
                            "--epochs", "1", "--out", (dir / "tr").string()});
  ASSERT_EQ(tr.code, 0) << tr.err;
  EXPECT_TRUE(fs::exists(dir / "tr" / "classifier.ckpt"));
}

TEST(Cli, BadAnnotationFileReportsRecord) {
  test::TempDir dir("cli_ann");
  const std::string data = (dir / "data").string();
  ASSERT_EQ(run({"gen-synth", "--n", "8", "--image-size", "32", "--frames", "11", "--out", data}).code, 0);
  auto anns = nlohmann::json::parse(test::read_text(dir / "data" / "annotations.json"));
  anns[1]["flow_grade"] = 5;
  write_file(dir / "data" / "annotations.json", anns.dump());
  ASSERT_EQ(run({"pretrain", "--data", data, "--out", (dir / "pre").string(), "--epochs", "1"}).code, 0);
  const RunOutput r = run({"crossval", "--data", data, "--pretrained", (dir / "pre" / "segmentation.ckpt").string(),
                           "--mode", "vanilla", "--freeze", "none", "--epochs", "1", "--out", (dir / "cv").string()});
  EXPECT_EQ(r.code, 1);
  const auto e = error_record(r.err);
  EXPECT_EQ(e.at("error"), "validation");
  EXPECT_EQ(e.at("field"), "flow_grade");
  EXPECT_EQ(e.at("record"), 1);
}

}  // namespace
}  // namespace ccc::cli
