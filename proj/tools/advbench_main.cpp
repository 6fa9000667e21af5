// Command-line front end: generate data, train models, run attack/defense
// grids and emit the evaluation reports.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "advbench/experiment.hpp"
#include "advbench/net_io.hpp"
#include "advbench/report.hpp"
#include "advbench/tensor_io.hpp"
#include "advbench/version.hpp"

namespace {

using namespace advbench;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
  bool dump = false;
};

ExperimentConfig load_config(const CommonArgs& args) {
  ExperimentConfig cfg = parse_config_file(args.config_path);
  if (args.seed_override) cfg.seed = *args.seed_override;
  if (args.out_override) cfg.output_dir = *args.out_override;
  if (args.dump) cfg.dump_adversarials = true;
  return cfg;
}

int cmd_gen_data(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  if (!cfg.dataset.generate_n)
    throw ConfigError("config: dataset.generate required for gen-data");
  Dataset ds = generate(cfg.seed, *cfg.dataset.generate_n);
  std::filesystem::create_directories(cfg.output_dir);
  std::string images = cfg.output_dir + "/dataset_images.atns";
  std::string labels = cfg.output_dir + "/dataset_labels.u32";
  dataset_save(ds, images, labels);
  std::cout << "wrote " << ds.size() << " samples to " << images << " / "
            << labels << "\n";
  return kExitOk;
}

int cmd_train(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  Dataset ds = cfg.dataset.generate_n
                   ? generate(cfg.seed, *cfg.dataset.generate_n)
                   : dataset_load(*cfg.dataset.load_images, *cfg.dataset.load_labels);
  ds.images = quantize_f32(ds.images);
  Dataset train_ds = train_split(ds);
  Dataset test_ds = test_split(ds);
  if (!cfg.model.train)
    throw ConfigError("config: model.train required for the train subcommand");
  SplitMix64 init_rng = SplitMix64(cfg.seed).fork(rng_streams::kModelInit);
  Model model =
      reference_model(static_cast<std::size_t>(ds.num_classes), init_rng);
  std::vector<Tensor> images;
  for (std::size_t i = 0; i < train_ds.size(); ++i)
    images.push_back(image_at(train_ds, i));
  model = train(std::move(model), images, train_ds.labels, {}, *cfg.model.train);
  std::filesystem::create_directories(cfg.output_dir);
  std::string path = cfg.output_dir + "/model.adnm";
  model_save(model, path);
  std::printf("model %s  train_acc=%.4f  test_acc=%.4f\n", path.c_str(),
              accuracy(model, train_ds), accuracy(model, test_ds));
  return kExitOk;
}

int run_grid(const CommonArgs& args, bool with_defenses, bool with_distill) {
  ExperimentConfig cfg = load_config(args);
  if (!with_defenses) cfg.defenses.clear();
  if (!with_distill) cfg.distill_temperature.reset();
  ExperimentResult result = run_experiment(cfg);
  for (const std::string& path : write_reports(cfg, result.report))
    std::cout << "wrote " << path << "\n";
  std::cout << result.report.rows.size() << " rows (model "
            << result.report.header.model_fingerprint << ")\n";
  return kExitOk;
}

int cmd_report(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  VerifyResult verdict = verify_dumped_run(cfg);
  std::cout << (verdict.ok ? "OK: " : "MISMATCH: ") << verdict.message << "\n";
  return verdict.ok ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarial robustness benchmark toolkit"};
  app.set_version_flag("--version", std::string("advbench ") + kToolkitVersion);
  app.require_subcommand(1);

  CommonArgs args;
  std::string command;
  for (const char* name : {"gen-data", "train", "attack", "defend", "bench", "report"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config_path, "experiment config (JSON)")
        ->required();
    sub->add_option("--seed", args.seed_override, "override the config seed");
    sub->add_option("--out", args.out_override, "override the output directory");
    sub->add_flag("--dump", args.dump, "persist adversarial tensors and models");
    sub->callback([&command, name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (command == "gen-data") return cmd_gen_data(args);
    if (command == "train") return cmd_train(args);
    if (command == "attack") return run_grid(args, false, false);
    if (command == "defend") return run_grid(args, true, false);
    if (command == "bench") return run_grid(args, true, true);
    if (command == "report") return cmd_report(args);
    std::cerr << "unknown subcommand\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
