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

#include "fabnet_tools/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fabnet/checkpoint.hpp"
#include "fabnet/dataset.hpp"
#include "fabnet/errors.hpp"
#include "fabnet/image.hpp"
#include "fabnet/ops.hpp"
#include "fabnet/synth.hpp"
#include "fabnet/train.hpp"
#include "fabnet_tools/gradcheck_suite.hpp"
#include "fabnet_tools/run_config.hpp"

namespace fabnet::tools {

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        throw IoError(fmt::format("cannot write {}", path.string()));
    }
}

void make_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
    }
}

std::string join(const std::vector<std::string>& items)
{
    std::string out;
    for (const auto& s : items) {
        out += out.empty() ? s : "," + s;
    }
    return out;
}

struct RunOptions {
    fs::path config_file;
    std::vector<std::string> assignments;
    bool no_fab = false;
    bool freeze_backbone = false;
    std::optional<std::uint64_t> seed;
};

void add_run_options(CLI::App* cmd, RunOptions& o)
{
    cmd->add_option("--config", o.config_file, "key=value config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", o.assignments, "key=value override (repeatable)");
    cmd->add_flag("--no-fab", o.no_fab, "disable the attention block");
    cmd->add_flag("--freeze-backbone", o.freeze_backbone, "train only the attention block and head");
    cmd->add_option("--seed", o.seed, "seed for initialization, split and batch order");
}

/// A bad setting in a config file or on the command line.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Defaults, then the config file, then --set, then dedicated flags.
RunConfig resolve_run_config(const RunOptions& o)
{
    RunConfig config;
    try {
        if (!o.config_file.empty()) {
            apply_config_file(config, o.config_file);
        }
        for (const auto& a : o.assignments) {
            apply_assignment(config, a);
        }
    }
    catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    if (o.no_fab) {
        config.model.use_fab = false;
    }
    if (o.freeze_backbone) {
        config.model.freeze_backbone = true;
    }
    if (o.seed) {
        config.train.seed = *o.seed;
    }
    return config;
}

void validate_run_config(const RunConfig& config)
{
    try {
        config.model.validate();
        config.train.validate();
    }
    catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
}

/// Copies every parameter of `source` whose name and shape match.
std::size_t copy_matching(Model& model, const Model& source)
{
    std::size_t copied = 0;
    for (auto& p : model.parameters()) {
        const Parameter* s = source.find(p.name);
        if (s != nullptr && s->value.shape() == p.value.shape()) {
            p.value = s->value;
            ++copied;
        }
    }
    return copied;
}

void write_report(const fs::path& dir, const MetricsReport& report, const std::vector<std::string>& class_names)
{
    write_text(dir / "metrics.csv", metrics_csv(report, class_names));
    write_text(dir / "confusion.csv", report.confusion.csv());
    write_text(dir / "report.txt", metrics_text(report, class_names));
}

int cmd_synth(const SynthOptions& options, const fs::path& out_dir, std::ostream& out)
{
    const fs::path manifest = synth_generate(out_dir, options);
    fmt::print(out, "{}\n", manifest.string());
    return kExitOk;
}

struct TrainArgs {
    RunOptions run;
    fs::path data;
    fs::path out_dir;
    fs::path init_from;
    bool quiet = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out)
{
    RunConfig config = resolve_run_config(a.run);
    const DatasetManifest manifest = load_manifest(a.data);
    config.model.num_classes = manifest.num_classes();
    validate_run_config(config);

    make_dir(a.out_dir);
    write_text(a.out_dir / "run_config.txt", format_run_config(config));

    const Split split = stratified_split(manifest, SplitSpec{0.2, true, config.train.seed});
    write_manifest(manifest.subset(split.train), a.out_dir / "train_split.csv");
    write_manifest(manifest.subset(split.test), a.out_dir / "test_split.csv");

    const SampleSet all = load_samples(manifest, config.model.input_height, config.model.input_width);
    const SampleSet train_set = all.subset(split.train);
    const SampleSet test_set = all.subset(split.test);

    Model model = build_model(config.model, config.train.seed, manifest.class_names);
    if (!a.init_from.empty()) {
        const std::size_t copied = copy_matching(model, load_checkpoint(a.init_from));
        fmt::print(out, "initialized {} of {} parameters from {}\n", copied, model.parameters().size(),
                   a.init_from.string());
    }
    fmt::print(out, "train {} / test {} samples, {} classes, {} trainable parameter tensors\n", train_set.size(),
               test_set.size(), manifest.num_classes(), model.trainable_parameters().size());

    const auto on_epoch = [&](const EpochRecord& r) {
        if (!a.quiet) {
            fmt::print(out, "epoch {:>3}/{}  train_loss {:.4f}  train_acc {:.4f}  val_loss {:.4f}  val_acc {:.4f}\n",
                       r.epoch, config.train.max_epochs, r.train_loss, r.train_acc, r.val_loss, r.val_acc);
        }
    };
    const EpochCurve curve = train(model, train_set, test_set, config.train, on_epoch);
    write_text(a.out_dir / "curves.csv", curve.csv());

    const MetricsReport report = evaluate(model, test_set);
    write_report(a.out_dir, report, manifest.class_names);
    save_checkpoint(model, a.out_dir / "model.fabn");

    fmt::print(out, "test accuracy {:.4f}  top-1 error {:.2f}%\n", report.accuracy, report.top1_error_percent);
    fmt::print(out, "checkpoint {}\n", (a.out_dir / "model.fabn").string());
    return kExitOk;
}

int cmd_eval(const fs::path& checkpoint, const fs::path& data, const fs::path& report_dir, std::ostream& out)
{
    const Model model = load_checkpoint(checkpoint);
    const DatasetManifest manifest = load_manifest(data);
    if (manifest.class_names != model.class_names()) {
        throw ConfigError(fmt::format("class mismatch: checkpoint has {} classes [{}], manifest has {} classes [{}]",
                                      model.class_names().size(), join(model.class_names()), manifest.num_classes(),
                                      join(manifest.class_names)));
    }
    const SampleSet samples = load_samples(manifest, model.config().input_height, model.config().input_width);
    const MetricsReport report = evaluate(model, samples);
    make_dir(report_dir);
    write_report(report_dir, report, manifest.class_names);
    fmt::print(out, "samples {}  accuracy {:.4f}  top-1 error {:.2f}%  loss {:.6f}\n", samples.size(), report.accuracy,
               report.top1_error_percent, *report.loss);
    return kExitOk;
}

int cmd_predict(const fs::path& checkpoint, const fs::path& image, std::ostream& out)
{
    const Model model = load_checkpoint(checkpoint);
    const Tensor x = preprocess(decode_image(image), model.config().input_height, model.config().input_width);
    const Tensor probs = ops::softmax(model.logits(x));
    const int best = argmax_rows(probs)[0];
    fmt::print(out, "class {}\n", model.class_names()[static_cast<std::size_t>(best)]);
    for (std::size_t k = 0; k < model.class_names().size(); ++k) {
        fmt::print(out, "{} {:.9f}\n", model.class_names()[k], probs[k]);
    }
    return kExitOk;
}

int cmd_gradcheck(std::uint64_t first_seed, std::size_t num_seeds, const CliHooks& hooks, std::ostream& out,
                  std::ostream& err)
{
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::uint64_t> seeds(num_seeds);
    for (std::size_t i = 0; i < num_seeds; ++i) {
        seeds[i] = first_seed + i;
    }
    const auto rows = run_gradcheck(seeds, hooks.corrupt_gradcheck_case);

    struct Worst {
        double coordinate = 0.0;
        double tensor = 0.0;
        std::uint64_t seed = 0;
    };
    std::vector<std::string> order;
    std::map<std::string, Worst> worst;
    for (const auto& r : rows) {
        if (!worst.contains(r.name)) {
            order.push_back(r.name);
        }
        Worst& w = worst[r.name];
        if (r.max_relative_error >= w.coordinate) {
            w.coordinate = r.max_relative_error;
            w.seed = r.seed;
        }
        w.tensor = std::max(w.tensor, r.max_tensor_error);
    }
    fmt::print(out, "{:<24} {:>16} {:>6} {:>16}  {}\n", "op", "max rel. error", "seed", "norm-wise", "status");
    std::vector<std::string> failed;
    for (const auto& name : order) {
        const Worst& w = worst[name];
        const bool ok = w.coordinate < kGradcheckTolerance;
        fmt::print(out, "{:<24} {:>16.3e} {:>6} {:>16.3e}  {}\n", name, w.coordinate, w.seed, w.tensor,
                   ok ? "ok" : "FAIL");
        if (!ok) {
            failed.push_back(name);
        }
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    fmt::print(out, "{} seeds from {}, tolerance {:.0e}, {:.1f} s\n", num_seeds, first_seed, kGradcheckTolerance,
               elapsed.count());
    if (!failed.empty()) {
        fmt::print(err, "gradient check failed for: {}\n", join(failed));
        return kExitVerification;
    }
    return kExitOk;
}

struct AblationArgs {
    RunOptions run;
    fs::path data;
    fs::path out_dir;
    std::size_t num_seeds = 10;
    std::uint64_t first_seed = 0;
};

int cmd_ablation(const AblationArgs& a, std::ostream& out)
{
    RunConfig config = resolve_run_config(a.run);
    const DatasetManifest manifest = load_manifest(a.data);
    config.model.num_classes = manifest.num_classes();
    validate_run_config(config);
    const SampleSet samples = load_samples(manifest, config.model.input_height, config.model.input_width);

    std::vector<std::uint64_t> seeds(a.num_seeds);
    for (std::size_t i = 0; i < a.num_seeds; ++i) {
        seeds[i] = a.first_seed + i;
    }
    const auto on_row = [&](const AblationRow& r) {
        fmt::print(out, "seed {:>3}  with {:.4f}  without {:.4f}  diff confined {}\n", r.seed, r.accuracy_with,
                   r.accuracy_without, r.diff_confined ? "yes" : "NO");
    };
    const AblationReport report = ablation_run(manifest, samples, config.model, config.train, seeds, 0.2, on_row);
    fmt::print(out, "mean with {:.4f}  without {:.4f}  difference {:+.2f} points\n", report.mean_with,
               report.mean_without, report.mean_difference_points());
    if (!a.out_dir.empty()) {
        make_dir(a.out_dir);
        write_text(a.out_dir / "ablation.csv", report.csv());
    }
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const CliHooks& hooks)
{
    CLI::App app{"Convolutional classifier with a channel attention block"};
    app.name("fabnet");
    app.require_subcommand(1);

    SynthOptions synth;
    fs::path synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "write a seeded synthetic image dataset");
    synth_cmd->add_option("--out", synth_out, "output directory")->required();
    synth_cmd->add_option("--classes", synth.classes, "number of classes")->check(CLI::Range(2, 1000));
    synth_cmd->add_option("--per-class", synth.per_class, "images per class")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--size", synth.height, "image height and width")->check(CLI::Range(1, 4096));
    synth_cmd->add_option("--seed", synth.seed, "generator seed");
    synth_cmd->add_option("--difficulty", synth.difficulty, "0 = separable hues, 1 = overlapping")
        ->check(CLI::Range(0.0, 1.0));
    synth_cmd->add_flag("--grayscale", synth.grayscale, "write PGM instead of PPM");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train on a manifest and write checkpoint, curves and metrics");
    train_cmd->add_option("--data", train_args.data, "manifest CSV")->required();
    train_cmd->add_option("--out", train_args.out_dir, "output directory")->required();
    train_cmd->add_option("--init-from", train_args.init_from, "checkpoint whose matching parameters seed the model")
        ->check(CLI::ExistingFile);
    train_cmd->add_flag("--quiet", train_args.quiet, "no per-epoch lines");
    add_run_options(train_cmd, train_args.run);

    fs::path eval_checkpoint;
    fs::path eval_data;
    fs::path eval_report;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a manifest");
    eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
    eval_cmd->add_option("--data", eval_data, "manifest CSV")->required();
    eval_cmd->add_option("--report", eval_report, "report directory")->required();

    fs::path predict_checkpoint;
    fs::path predict_image;
    auto* predict_cmd = app.add_subcommand("predict", "classify one PPM/PGM image");
    predict_cmd->add_option("--checkpoint", predict_checkpoint, "checkpoint file")->required();
    predict_cmd->add_option("--image", predict_image, "image file")->required();

    std::uint64_t gradcheck_seed = 0;
    std::size_t gradcheck_seeds = 5;
    auto* gradcheck_cmd = app.add_subcommand("gradcheck", "compare reverse-mode gradients with finite differences");
    gradcheck_cmd->add_option("--seed", gradcheck_seed, "first seed");
    gradcheck_cmd->add_option("--seeds", gradcheck_seeds, "number of consecutive seeds")->check(CLI::Range(1, 1000));

    AblationArgs ablation_args;
    auto* ablation_cmd = app.add_subcommand("ablation", "paired runs with and without the attention block");
    ablation_cmd->add_option("--data", ablation_args.data, "manifest CSV")->required();
    ablation_cmd->add_option("--out", ablation_args.out_dir, "directory for ablation.csv");
    ablation_cmd->add_option("--seeds", ablation_args.num_seeds, "number of paired seeds")->check(CLI::Range(1, 1000));
    ablation_cmd->add_option("--first-seed", ablation_args.first_seed, "first seed");
    add_run_options(ablation_cmd, ablation_args.run);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    synth.width = synth.height;

    try {
        if (synth_cmd->parsed()) {
            return cmd_synth(synth, synth_out, out);
        }
        if (train_cmd->parsed()) {
            return cmd_train(train_args, out);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(eval_checkpoint, eval_data, eval_report, out);
        }
        if (predict_cmd->parsed()) {
            return cmd_predict(predict_checkpoint, predict_image, out);
        }
        if (gradcheck_cmd->parsed()) {
            return cmd_gradcheck(gradcheck_seed, gradcheck_seeds, hooks, out, err);
        }
        if (ablation_cmd->parsed()) {
            return cmd_ablation(ablation_args, out);
        }
    }
    catch (const DivergenceError& e) {
        fmt::print(err, "error: training diverged at epoch {}, batch {}: {}\n", e.epoch(), e.batch(), e.what());
        return kExitRuntime;
    }
    catch (const UsageError& e) {
        fmt::print(err, "error: {}\nRun with --help for more information.\n", e.what());
        return kExitUsage;
    }
    catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}

} // namespace fabnet::tools
