#include "advbench/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "advbench/metrics.hpp"
#include "advbench/net_io.hpp"
#include "advbench/report.hpp"
#include "advbench/tensor_io.hpp"
#include "advbench/version.hpp"

namespace advbench {

namespace fs = std::filesystem;

namespace {

Dataset obtain_dataset(const ExperimentConfig& cfg) {
  Dataset ds;
  if (cfg.dataset.generate_n) {
    ds = generate(cfg.seed, *cfg.dataset.generate_n);
  } else if (cfg.dataset.load_images && cfg.dataset.load_labels) {
    try {
      ds = dataset_load(*cfg.dataset.load_images, *cfg.dataset.load_labels);
    } catch (const std::exception& e) {
      throw std::runtime_error("dataset load (" + *cfg.dataset.load_images +
                               "): " + e.what());
    }
  } else {
    throw ConfigError("config: dataset: no source configured");
  }
  // Everything downstream sees the 32-bit values the dump format stores, so
  // a dumped run can be recomputed exactly.
  ds.images = quantize_f32(ds.images);
  return ds;
}

Model obtain_model(const ExperimentConfig& cfg, const Dataset& train_ds) {
  Model model;
  if (cfg.model.train) {
    SplitMix64 init_rng = SplitMix64(cfg.seed).fork(rng_streams::kModelInit);
    model = reference_model(static_cast<std::size_t>(train_ds.num_classes), init_rng);
    std::vector<Tensor> images;
    images.reserve(train_ds.size());
    for (std::size_t i = 0; i < train_ds.size(); ++i)
      images.push_back(image_at(train_ds, i));
    model = train(std::move(model), images, train_ds.labels, {}, *cfg.model.train);
  } else if (cfg.model.load_path) {
    try {
      model = model_load(*cfg.model.load_path);
    } catch (const std::exception& e) {
      throw std::runtime_error("model load (" + *cfg.model.load_path +
                               "): " + e.what());
    }
  } else {
    throw ConfigError("config: model: no source configured");
  }
  // Evaluate the serialized form of the model for the same reason the
  // dataset is quantized.
  return model_from_bytes(model_to_bytes(model));
}

std::string adv_dir(const ExperimentConfig& cfg, const std::string& attack_name) {
  return cfg.output_dir + "/adv/" + attack_name;
}

std::string adv_path(const ExperimentConfig& cfg, const std::string& attack_name,
                     std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "%05zu.atns", index);
  return adv_dir(cfg, attack_name) + "/" + name;
}

// Builds all metric rows from quantized clean/adversarial images. Shared
// between the live run and the dump verifier.
EvaluationReport assemble_report(const ExperimentConfig& cfg, const Model& model,
                                 const Model* student, const Dataset& test_ds,
                                 const std::vector<int>& clean_preds,
                                 const std::vector<AttackEvaluation>& attacks) {
  EvaluationReport report;
  report.header.toolkit_version = kToolkitVersion;
  report.header.seed = cfg.seed;
  report.header.model_fingerprint = model_fingerprint(model);

  std::size_t n = test_ds.size();
  std::vector<Tensor> clean_images;
  clean_images.reserve(n);
  for (std::size_t i = 0; i < n; ++i) clean_images.push_back(image_at(test_ds, i));

  struct PerAttack {
    double asr = 0.0;
    double mean_pert = 0.0;
  };
  std::vector<PerAttack> base(attacks.size());

  for (std::size_t a = 0; a < attacks.size(); ++a) {
    const AttackEvaluation& ev = attacks[a];
    base[a].asr = attack_success_rate(clean_preds, ev.adv_preds);
    double pert = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      pert += mean_perturbation(clean_images[i], ev.adv_images[i]);
    base[a].mean_pert = pert / static_cast<double>(n);

    MetricRow row;
    row.attack = ev.name;
    row.defense = "none";
    row.attack_success_rate = base[a].asr;
    row.mean_perturbation_adv = base[a].mean_pert;
    report.rows.push_back(std::move(row));

    report.attack_summary.push_back(
        AttackAggregate{ev.name, base[a].asr, base[a].mean_pert});
  }

  for (std::size_t a = 0; a < attacks.size(); ++a) {
    const AttackEvaluation& ev = attacks[a];
    for (const DefenseEntry& defense : cfg.defenses) {
      std::vector<int> defended_preds(n);
      double pert = 0.0, psnr_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        Tensor defended = apply_defense(defense.spec, ev.adv_images[i]);
        defended_preds[i] = predict(model, defended);
        pert += mean_perturbation(clean_images[i], defended);
        psnr_sum += psnr(clean_images[i], defended);
      }
      MetricRow row;
      row.attack = ev.name;
      row.defense = defense.name;
      row.attack_success_rate = base[a].asr;
      row.defense_success_rate = defense_success_rate(clean_preds, defended_preds);
      row.mean_perturbation_adv = base[a].mean_pert;
      row.mean_perturbation_defended = pert / static_cast<double>(n);
      row.psnr_defended_db = psnr_sum / static_cast<double>(n);
      report.rows.push_back(std::move(row));
    }
  }

  if (student) {
    // Distillation defends by substituting the student model; the
    // adversarial images themselves pass through unchanged.
    for (std::size_t a = 0; a < attacks.size(); ++a) {
      const AttackEvaluation& ev = attacks[a];
      std::vector<int> student_preds(n);
      double pert = 0.0, psnr_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        student_preds[i] = predict(*student, ev.adv_images[i]);
        pert += mean_perturbation(clean_images[i], ev.adv_images[i]);
        psnr_sum += psnr(clean_images[i], ev.adv_images[i]);
      }
      MetricRow row;
      row.attack = ev.name;
      row.defense = "distill";
      row.attack_success_rate = base[a].asr;
      row.defense_success_rate = defense_success_rate(clean_preds, student_preds);
      row.mean_perturbation_adv = base[a].mean_pert;
      row.mean_perturbation_defended = pert / static_cast<double>(n);
      row.psnr_defended_db = psnr_sum / static_cast<double>(n);
      report.rows.push_back(std::move(row));
    }
  }

  return report;
}

}  // namespace

double accuracy(const Model& model, const Dataset& ds) {
  if (ds.size() == 0) throw std::invalid_argument("accuracy: empty dataset");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (predict(model, image_at(ds, i)) == ds.labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result;
  result.dataset = obtain_dataset(cfg);
  Dataset train_ds = train_split(result.dataset);
  Dataset test_ds = test_split(result.dataset);
  result.model = obtain_model(cfg, train_ds);

  std::size_t n = test_ds.size();
  if (n == 0) throw std::runtime_error("run_experiment: test split is empty");

  result.clean_preds.resize(n);
  std::vector<Tensor> clean_images;
  clean_images.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    clean_images.push_back(image_at(test_ds, i));
    result.clean_preds[i] = predict(result.model, clean_images[i]);
  }

  SplitMix64 root(cfg.seed);
  for (std::size_t a = 0; a < cfg.attacks.size(); ++a) {
    const AttackEntry& entry = cfg.attacks[a];
    AttackEvaluation ev;
    ev.name = entry.name;
    ev.outcomes.reserve(n);
    ev.adv_images.reserve(n);
    ev.adv_preds.resize(n);
    SplitMix64 attack_rng = root.fork(rng_streams::kAttackBase + a);
    auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < n; ++i) {
      SplitMix64 rng = attack_rng.fork(i);
      AttackOutcome outcome =
          run_attack(result.model, clean_images[i], entry.spec, rng);
      ev.adv_images.push_back(quantize_f32(outcome.x_adv));
      ev.adv_preds[i] = predict(result.model, ev.adv_images.back());
      ev.outcomes.push_back(std::move(outcome));
    }
    ev.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    result.attacks.push_back(std::move(ev));
  }

  if (cfg.distill_temperature) {
    DistillConfig dc;
    dc.teacher_train = cfg.model.train ? *cfg.model.train : TrainConfig{.seed = cfg.seed};
    dc.temperature = *cfg.distill_temperature;
    SplitMix64 distill_rng = root.fork(rng_streams::kDistill);
    DistillResult dr = distill(train_ds, dc, distill_rng);
    result.student = model_from_bytes(model_to_bytes(dr.student));
  }

  if (cfg.dump_adversarials) {
    fs::create_directories(cfg.output_dir);
    dataset_save(result.dataset, cfg.output_dir + "/dataset_images.atns",
                 cfg.output_dir + "/dataset_labels.u32");
    model_save(result.model, cfg.output_dir + "/model.adnm");
    if (result.student)
      model_save(*result.student, cfg.output_dir + "/student.adnm");
    for (const AttackEvaluation& ev : result.attacks) {
      fs::create_directories(adv_dir(cfg, ev.name));
      for (std::size_t i = 0; i < ev.adv_images.size(); ++i)
        tensor_save(ev.adv_images[i], adv_path(cfg, ev.name, i));
    }
  }

  result.report = assemble_report(cfg, result.model,
                                  result.student ? &*result.student : nullptr,
                                  test_ds, result.clean_preds, result.attacks);
  return result;
}

std::vector<std::string> write_reports(const ExperimentConfig& cfg,
                                       const EvaluationReport& report) {
  fs::create_directories(cfg.output_dir);
  std::vector<std::string> paths;
  for (ReportFormat format : cfg.report_formats) {
    std::string path = cfg.output_dir +
                       (format == ReportFormat::Csv ? "/report.csv" : "/report.md");
    write_text_file(path, format == ReportFormat::Csv ? render_csv(report)
                                                      : render_markdown(report));
    paths.push_back(std::move(path));
  }
  return paths;
}

VerifyResult verify_dumped_run(const ExperimentConfig& cfg) {
  VerifyResult result;
  Dataset ds;
  Model model;
  try {
    ds = dataset_load(cfg.output_dir + "/dataset_images.atns",
                      cfg.output_dir + "/dataset_labels.u32");
    model = model_load(cfg.output_dir + "/model.adnm");
  } catch (const std::exception& e) {
    result.message = std::string("missing or invalid dump artifacts: ") + e.what();
    return result;
  }
  Dataset test_ds = test_split(ds);
  std::size_t n = test_ds.size();

  std::vector<int> clean_preds(n);
  for (std::size_t i = 0; i < n; ++i)
    clean_preds[i] = predict(model, image_at(test_ds, i));

  std::vector<AttackEvaluation> attacks;
  for (const AttackEntry& entry : cfg.attacks) {
    AttackEvaluation ev;
    ev.name = entry.name;
    ev.adv_preds.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      Tensor adv;
      try {
        adv = tensor_load(adv_path(cfg, entry.name, i));
      } catch (const std::exception& e) {
        result.message = std::string("cannot load dumped adversarial: ") + e.what();
        return result;
      }
      ev.adv_preds[i] = predict(model, adv);
      ev.adv_images.push_back(std::move(adv));
    }
    attacks.push_back(std::move(ev));
  }

  std::optional<Model> student;
  if (cfg.distill_temperature) {
    try {
      student = model_load(cfg.output_dir + "/student.adnm");
    } catch (const std::exception& e) {
      result.message = std::string("cannot load dumped student model: ") + e.what();
      return result;
    }
  }

  EvaluationReport recomputed =
      assemble_report(cfg, model, student ? &*student : nullptr, test_ds,
                      clean_preds, attacks);
  std::string expected = render_csv(recomputed);
  std::string stored;
  try {
    stored = read_text_file(cfg.output_dir + "/report.csv");
  } catch (const std::exception& e) {
    result.message = std::string("cannot read stored report: ") + e.what();
    return result;
  }
  if (expected == stored) {
    result.ok = true;
    result.message = "verified " + std::to_string(recomputed.rows.size()) +
                     " rows: recomputed report matches byte for byte";
  } else {
    result.message = "recomputed report differs from stored report.csv";
  }
  return result;
}

}  // namespace advbench
