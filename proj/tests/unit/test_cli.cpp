/*
 *  Copyright 2026 The fabnet Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fabnet/checkpoint.hpp"
#include "fabnet/dataset.hpp"
#include "fabnet/image.hpp"
#include "fabnet_tools/cli.hpp"
#include "test_support.hpp"

namespace fabnet::tools {
namespace {

namespace fs = std::filesystem;

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult invoke(const std::vector<std::string>& args, const CliHooks& hooks = {})
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err, hooks);
    return {code, out.str(), err.str()};
}

const std::vector<std::string> kSmallModel{"--set", "image_size=8",   "--set", "blocks=4:pool,8:pool",
                                           "--set", "fab_ratio=2",    "--set", "head_hidden=8",
                                           "--set", "max_epochs=2",   "--set", "learning_rate=0.001"};

std::vector<std::string> train_args(const fs::path& data, const fs::path& out, std::vector<std::string> extra = {})
{
    std::vector<std::string> args{"train", "--data", data.string(), "--out", out.string(), "--quiet"};
    args.insert(args.end(), kSmallModel.begin(), kSmallModel.end());
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

/// A small synthetic dataset shared by the tests in this file.
class CliTest : public ::testing::Test {
protected:
    static void SetUpTestSuite()
    {
        dir_ = new testing::TempDir("cli");
        const CliResult r = invoke({"synth", "--out", (dir_->path() / "data").string(), "--classes", "3", "--per-class", "8",
                           "--size", "8", "--seed", "2"});
        ASSERT_EQ(r.code, 0) << r.err;
        manifest_ = dir_->path() / "data" / "manifest.csv";
    }
    static void TearDownTestSuite()
    {
        delete dir_;
        dir_ = nullptr;
    }

    static fs::path work(const std::string& name) { return dir_->path() / name; }

    static testing::TempDir* dir_;
    static fs::path manifest_;
};

testing::TempDir* CliTest::dir_ = nullptr;
fs::path CliTest::manifest_;

TEST_F(CliTest, SynthWritesCountsAndPrintsManifest)
{
    const CliResult r = invoke({"synth", "--out", work("synth5").string(), "--classes", "5", "--per-class", "4", "--size",
                       "8"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("manifest.csv"), std::string::npos);
    EXPECT_EQ(load_manifest(work("synth5") / "manifest.csv").entries.size(), 20u);
}

TEST_F(CliTest, SynthIsDeterministic)
{
    for (const char* name : {"det_a", "det_b"}) {
        ASSERT_EQ(invoke({"synth", "--out", work(name).string(), "--classes", "2", "--per-class", "3", "--size", "6",
                       "--seed", "11"})
                      .code,
                  0);
    }
    for (const auto& e : load_manifest(work("det_a") / "manifest.csv").entries) {
        const fs::path rel = fs::relative(e.path, work("det_a"));
        EXPECT_EQ(testing::read_file(e.path), testing::read_file(work("det_b") / rel));
    }
}

TEST_F(CliTest, UsageErrorsExitTwo)
{
    EXPECT_EQ(invoke({}).code, kExitUsage);
    EXPECT_EQ(invoke({"synth", "--classes", "3"}).code, kExitUsage);
    EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
    EXPECT_EQ(invoke({"train", "--data", manifest_.string()}).code, kExitUsage);
    const CliResult unknown = invoke(train_args(manifest_, work("bad_key"), {"--set", "colour=blue"}));
    EXPECT_EQ(unknown.code, kExitUsage);
    EXPECT_NE(unknown.err.find("colour"), std::string::npos);
    EXPECT_EQ(invoke(train_args(manifest_, work("bad_value"), {"--set", "batch_size=0"})).code, kExitUsage);
    EXPECT_EQ(invoke({"--help"}).code, kExitOk);
}

TEST_F(CliTest, RuntimeErrorsExitOne)
{
    testing::write_file(work("broken.csv"), "path,label\nmissing.ppm,a\nalso_missing.ppm,b\n");
    EXPECT_EQ(invoke(train_args(work("broken.csv"), work("broken_out"))).code, kExitRuntime);
    testing::write_file(work("not_a_checkpoint"), "nope");
    EXPECT_EQ(invoke({"eval", "--checkpoint", work("not_a_checkpoint").string(), "--data", manifest_.string(),
                   "--report", work("r").string()})
                  .code,
              kExitRuntime);
}

TEST_F(CliTest, TrainWritesArtifactsAndEvalAgrees)
{
    const fs::path out = work("train");
    const CliResult r = invoke(train_args(manifest_, out));
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"model.fabn", "curves.csv", "metrics.csv", "confusion.csv", "report.txt", "run_config.txt",
                          "train_split.csv", "test_split.csv"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    EXPECT_EQ(load_checkpoint(out / "model.fabn").config().input_height, 8u);

    const CliResult e = invoke({"eval", "--checkpoint", (out / "model.fabn").string(), "--data",
                       (out / "test_split.csv").string(), "--report", work("eval").string()});
    ASSERT_EQ(e.code, 0) << e.err;
    EXPECT_EQ(testing::read_file(work("eval") / "metrics.csv"), testing::read_file(out / "metrics.csv"));
    EXPECT_EQ(testing::read_file(work("eval") / "confusion.csv"), testing::read_file(out / "confusion.csv"));
}

TEST_F(CliTest, DefaultScheduleIsRecorded)
{
    const fs::path out = work("defaults");
    const CliResult r = invoke({"train", "--data", manifest_.string(), "--out", out.string(), "--quiet", "--set",
                       "image_size=8", "--set", "blocks=8:pool", "--set", "max_epochs=1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string cfg = testing::read_file(out / "run_config.txt");
    EXPECT_NE(cfg.find("learning_rate=0.0001\n"), std::string::npos) << cfg;
    EXPECT_NE(cfg.find("batch_size=16\n"), std::string::npos);
}

TEST_F(CliTest, NoFabIsRecordedInCheckpoint)
{
    const fs::path out = work("nofab");
    ASSERT_EQ(invoke(train_args(manifest_, out, {"--no-fab"})).code, 0);
    const Model m = load_checkpoint(out / "model.fabn");
    EXPECT_FALSE(m.config().use_fab);
    EXPECT_EQ(m.find("attention.W1"), nullptr);
}

TEST_F(CliTest, SameSeedSameCurves)
{
    ASSERT_EQ(invoke(train_args(manifest_, work("seed7a"), {"--seed", "7"})).code, 0);
    ASSERT_EQ(invoke(train_args(manifest_, work("seed7b"), {"--seed", "7"})).code, 0);
    EXPECT_EQ(testing::read_file(work("seed7a") / "curves.csv"), testing::read_file(work("seed7b") / "curves.csv"));
    EXPECT_EQ(testing::read_file(work("seed7a") / "model.fabn"), testing::read_file(work("seed7b") / "model.fabn"));
}

TEST_F(CliTest, ConfigFileAndFlagsPrecedence)
{
    testing::write_file(work("run.cfg"), "max_epochs=1\nseed=3\nuse_fab=true\n");
    const fs::path out = work("precedence");
    ASSERT_EQ(invoke(train_args(manifest_, out, {"--config", work("run.cfg").string(), "--seed", "5", "--no-fab"})).code,
              0);
    const std::string cfg = testing::read_file(out / "run_config.txt");
    EXPECT_NE(cfg.find("seed=5\n"), std::string::npos);
    EXPECT_NE(cfg.find("use_fab=false\n"), std::string::npos);
    // --set comes after the file, so max_epochs=2 from the small model wins.
    EXPECT_NE(cfg.find("max_epochs=2\n"), std::string::npos);
}

TEST_F(CliTest, EvalClassMismatchExitsOne)
{
    const fs::path out = work("mismatch");
    ASSERT_EQ(invoke(train_args(manifest_, out)).code, 0);
    ASSERT_EQ(invoke({"synth", "--out", work("five").string(), "--classes", "5", "--per-class", "2", "--size", "8"}).code,
              0);
    const CliResult e = invoke({"eval", "--checkpoint", (out / "model.fabn").string(), "--data",
                       (work("five") / "manifest.csv").string(), "--report", work("mismatch_eval").string()});
    EXPECT_EQ(e.code, kExitRuntime);
    EXPECT_NE(e.err.find("class mismatch"), std::string::npos);
}

TEST_F(CliTest, MemorizedToySetIsPerfect)
{
    ASSERT_EQ(invoke({"synth", "--out", work("toy").string(), "--classes", "2", "--per-class", "5", "--size", "8",
                   "--seed", "1"})
                  .code,
              0);
    const fs::path toy = work("toy") / "manifest.csv";
    const fs::path out = work("toy_train");
    const CliResult r = invoke({"train", "--data", toy.string(), "--out", out.string(), "--quiet", "--set", "image_size=8",
                       "--set", "blocks=8:pool", "--set", "fab_ratio=2", "--set", "max_epochs=150", "--set",
                       "learning_rate=0.01", "--set", "batch_size=8"});
    ASSERT_EQ(r.code, 0) << r.err;
    const CliResult e = invoke({"eval", "--checkpoint", (out / "model.fabn").string(), "--data",
                       (out / "train_split.csv").string(), "--report", work("toy_eval").string()});
    ASSERT_EQ(e.code, 0) << e.err;
    EXPECT_NE(e.out.find("accuracy 1.0000  top-1 error 0.00%"), std::string::npos) << e.out;
}

TEST_F(CliTest, PredictPrintsNormalizedProbabilities)
{
    const fs::path out = work("predict");
    ASSERT_EQ(invoke(train_args(manifest_, out)).code, 0);
    const DatasetManifest m = load_manifest(manifest_);
    const std::vector<std::string> args{"predict", "--checkpoint", (out / "model.fabn").string(), "--image",
                                        m.entries[0].path.string()};
    const CliResult p = invoke(args);
    ASSERT_EQ(p.code, 0) << p.err;
    EXPECT_EQ(p.out.rfind("class ", 0), 0u);
    std::istringstream lines(p.out);
    std::string line;
    std::getline(lines, line);
    double total = 0.0;
    int rows = 0;
    while (std::getline(lines, line)) {
        total += std::strtod(line.substr(line.rfind(' ') + 1).c_str(), nullptr);
        ++rows;
    }
    EXPECT_EQ(rows, 3);
    EXPECT_NEAR(total, 1.0, 1e-8);
    EXPECT_EQ(invoke(args).out, p.out);

    testing::write_file(work("gray.pgm"), encode_pgm(decode_image(m.entries[0].path)));
    EXPECT_EQ(invoke({"predict", "--checkpoint", (out / "model.fabn").string(), "--image", work("gray.pgm").string()})
                  .code,
              0);
    testing::write_file(work("bad.ppm"), "P6\n2 2\n255\nabc");
    EXPECT_EQ(invoke({"predict", "--checkpoint", (out / "model.fabn").string(), "--image", work("bad.ppm").string()})
                  .code,
              kExitRuntime);
}

TEST_F(CliTest, InitFromCopiesMatchingParameters)
{
    const fs::path base = work("init_base");
    ASSERT_EQ(invoke(train_args(manifest_, base)).code, 0);
    const fs::path tuned = work("init_tuned");
    const CliResult r = invoke(train_args(manifest_, tuned, {"--init-from", (base / "model.fabn").string(),
                                                    "--freeze-backbone", "--seed", "99"}));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("initialized 12 of 12 parameters"), std::string::npos) << r.out;
    const Model a = load_checkpoint(base / "model.fabn");
    const Model b = load_checkpoint(tuned / "model.fabn");
    EXPECT_EQ(a.find("backbone.conv1.weight")->value, b.find("backbone.conv1.weight")->value);
    EXPECT_EQ(a.find("backbone.conv2.bias")->value, b.find("backbone.conv2.bias")->value);
    EXPECT_NE(a.find("head.out.weight")->value, b.find("head.out.weight")->value);
}

TEST_F(CliTest, GradcheckPassesAndReportsCorruption)
{
    const CliResult ok = invoke({"gradcheck", "--seeds", "1"});
    EXPECT_EQ(ok.code, kExitOk) << ok.out;
    EXPECT_NE(ok.out.find("feature_attention"), std::string::npos);
    EXPECT_NE(ok.out.find("model_loss"), std::string::npos);

    CliHooks hooks;
    hooks.corrupt_gradcheck_case = "conv2d";
    const CliResult bad = invoke({"gradcheck", "--seeds", "1"}, hooks);
    EXPECT_EQ(bad.code, kExitVerification);
    EXPECT_NE(bad.err.find("conv2d"), std::string::npos);
    EXPECT_EQ(bad.err.find("relu"), std::string::npos);
}

TEST_F(CliTest, AblationWritesCsv)
{
    const CliResult r = invoke({"ablation", "--data", manifest_.string(), "--out", work("ablation").string(), "--seeds", "1",
                       "--set", "image_size=8", "--set", "blocks=4:pool,8:pool", "--set", "fab_ratio=2", "--set",
                       "max_epochs=1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(work("ablation") / "ablation.csv"));
    EXPECT_NE(r.out.find("diff confined yes"), std::string::npos);
}

} // namespace
} // namespace fabnet::tools
