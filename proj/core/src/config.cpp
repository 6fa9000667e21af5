#include <fstream>
#include <set>
#include <sstream>

#include "advbench/experiment.hpp"
#include "json.hpp"

namespace advbench {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         const std::set<std::string>& allowed) {
  for (const auto& item : obj.items())
    if (!allowed.contains(item.key()))
      fail(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
}

const json& require(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing required key");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

NormKind norm_from_json(const json& v, const std::string& path) {
  if (v.is_string()) {
    try {
      return parse_norm(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
  }
  if (v.is_number_integer()) {
    int n = v.get<int>();
    if (n == 1) return NormKind::L1;
    if (n == 2) return NormKind::L2;
  }
  fail(path, "expected 1, 2 or \"inf\"");
}

TrainConfig train_config_from_json(const json& obj, const std::string& path,
                                   std::uint64_t default_seed) {
  if (!obj.is_object()) fail(path, "expected an object");
  reject_unknown_keys(obj, path,
                      {"learning_rate", "momentum", "batch_size", "epochs",
                       "seed", "temperature"});
  TrainConfig tc;
  tc.seed = default_seed;
  if (obj.contains("learning_rate"))
    tc.learning_rate = as_number(obj["learning_rate"], path + ".learning_rate");
  if (obj.contains("momentum"))
    tc.momentum = as_number(obj["momentum"], path + ".momentum");
  if (obj.contains("batch_size"))
    tc.batch_size = as_int(obj["batch_size"], path + ".batch_size");
  if (obj.contains("epochs")) tc.epochs = as_int(obj["epochs"], path + ".epochs");
  if (obj.contains("seed"))
    tc.seed = static_cast<std::uint64_t>(obj["seed"].get<std::int64_t>());
  if (obj.contains("temperature"))
    tc.temperature = as_number(obj["temperature"], path + ".temperature");
  if (tc.learning_rate <= 0.0) fail(path + ".learning_rate", "must be positive");
  if (tc.batch_size < 1) fail(path + ".batch_size", "must be at least 1");
  if (tc.epochs < 0) fail(path + ".epochs", "must be non-negative");
  if (tc.temperature <= 0.0) fail(path + ".temperature", "must be positive");
  return tc;
}

// Per-family accepted parameter keys, matching the published names.
const std::set<std::string>& attack_param_keys(AttackFamily family) {
  static const std::set<std::string> fgsm_keys{
      "norm", "eps",        "eps_step",        "targeted",
      "target_class",       "num_random_init", "batch_size",
      "minimal"};
  static const std::set<std::string> pgd_keys{
      "norm",     "eps",          "eps_step",        "random_eps",
      "decay",    "max_iter",     "targeted",        "target_class",
      "num_random_init",          "batch_size",      "verbose"};
  static const std::set<std::string> bim_keys{
      "eps", "eps_step", "max_iter", "targeted", "target_class",
      "batch_size", "verbose"};
  static const std::set<std::string> deepfool_keys{
      "max_iter", "epsilon", "nb_grads", "batch_size", "verbose"};
  static const std::set<std::string> cw_keys{
      "confidence",   "targeted",           "target_class",
      "learning_rate", "binary_search_steps", "max_iter",
      "initial_const", "max_halving",        "max_doubling",
      "batch_size",    "verbose"};
  static const std::set<std::string> simba_keys{
      "attack",   "max_iter", "epsilon",  "order",     "freq_dim",
      "stride",   "targeted", "batch_size", "verbose"};
  static const std::set<std::string> pixel_keys{"th", "es", "max_iter",
                                                "targeted", "verbose"};
  switch (family) {
    case AttackFamily::Fgsm: return fgsm_keys;
    case AttackFamily::Pgd: return pgd_keys;
    case AttackFamily::Bim: return bim_keys;
    case AttackFamily::Deepfool: return deepfool_keys;
    case AttackFamily::CwL2: return cw_keys;
    case AttackFamily::Simba: return simba_keys;
    case AttackFamily::Pixel: return pixel_keys;
  }
  throw ConfigError("config: unknown attack family");
}

void apply_attack_params(AttackSpec& spec, const json& params,
                         const std::string& path) {
  if (!params.is_object()) fail(path, "expected an object");
  reject_unknown_keys(params, path, attack_param_keys(spec.family));
  for (const auto& item : params.items()) {
    const std::string key = item.key();
    const json& v = item.value();
    const std::string kp = path + "." + key;
    if (key == "norm") spec.norm = norm_from_json(v, kp);
    else if (key == "eps") spec.eps = as_number(v, kp);
    else if (key == "eps_step") spec.eps_step = as_number(v, kp);
    else if (key == "targeted") spec.targeted = as_bool(v, kp);
    else if (key == "target_class") spec.target_class = as_int(v, kp);
    else if (key == "num_random_init") spec.num_random_init = as_int(v, kp);
    else if (key == "minimal") spec.minimal = as_bool(v, kp);
    else if (key == "random_eps") spec.random_eps = as_bool(v, kp);
    else if (key == "decay") {
      if (v.is_null()) spec.decay.reset();
      else spec.decay = as_number(v, kp);
    } else if (key == "max_iter") spec.max_iter = as_int(v, kp);
    else if (key == "epsilon") spec.epsilon = as_number(v, kp);
    else if (key == "nb_grads") spec.nb_grads = as_int(v, kp);
    else if (key == "confidence") spec.confidence = as_number(v, kp);
    else if (key == "learning_rate") spec.learning_rate = as_number(v, kp);
    else if (key == "binary_search_steps") spec.binary_search_steps = as_int(v, kp);
    else if (key == "initial_const") spec.initial_const = as_number(v, kp);
    else if (key == "max_halving") spec.max_halving = as_int(v, kp);
    else if (key == "max_doubling") spec.max_doubling = as_int(v, kp);
    else if (key == "attack") {
      std::string basis = as_string(v, kp);
      if (basis == "px") spec.basis = SimbaBasis::Px;
      else if (basis == "dct") spec.basis = SimbaBasis::Dct;
      else fail(kp, "expected \"px\" or \"dct\"");
    } else if (key == "order") {
      std::string order = as_string(v, kp);
      if (order == "random") spec.order = SimbaOrder::Random;
      else if (order == "diag") spec.order = SimbaOrder::Diag;
      else fail(kp, "expected \"random\" or \"diag\"");
    } else if (key == "freq_dim") spec.freq_dim = as_int(v, kp);
    else if (key == "stride") spec.stride = as_int(v, kp);
    else if (key == "th") {
      if (v.is_null()) spec.th.reset();
      else spec.th = as_int(v, kp);
    } else if (key == "es") spec.es = as_int(v, kp);
    else if (key == "batch_size") spec.batch_size = as_int(v, kp);
    else if (key == "verbose") spec.verbose = as_bool(v, kp);
  }
  if (spec.targeted && spec.target_class < 0)
    fail(path + ".target_class", "required when targeted is true");
}

void validate_attack_spec(const AttackSpec& spec, const std::string& path) {
  if (spec.eps < 0.0) fail(path + ".eps", "must be >= 0");
  if (spec.max_iter < 1) fail(path + ".max_iter", "must be >= 1");
  if (spec.family == AttackFamily::Simba && spec.freq_dim < 1)
    fail(path + ".freq_dim", "must be >= 1");
  if (spec.family == AttackFamily::Simba && spec.stride < 1)
    fail(path + ".stride", "must be >= 1");
  if (spec.th && *spec.th < 1) fail(path + ".th", "must be >= 1 when set");
}

const std::set<std::string>& defense_param_keys(DefenseFamily family) {
  static const std::set<std::string> median_keys{"window"};
  static const std::set<std::string> smooth_keys{"sigma"};
  static const std::set<std::string> blur_keys{"kernel_size"};
  static const std::set<std::string> bilateral_keys{"diameter", "sigma_color",
                                                    "sigma_space"};
  static const std::set<std::string> tv_keys{"tv_weight", "tv_iters"};
  static const std::set<std::string> squeeze_keys{"bit_depth"};
  switch (family) {
    case DefenseFamily::Median:
    case DefenseFamily::SpatialSmooth: return median_keys;
    case DefenseFamily::GaussianSmooth: return smooth_keys;
    case DefenseFamily::GaussianBlur: return blur_keys;
    case DefenseFamily::Bilateral: return bilateral_keys;
    case DefenseFamily::TvDenoise: return tv_keys;
    case DefenseFamily::FeatureSqueeze: return squeeze_keys;
    case DefenseFamily::Distill: break;
  }
  throw ConfigError("config: defense family has no parameter table");
}

void apply_defense_params(DefenseSpec& spec, const json& params,
                          const std::string& path) {
  if (!params.is_object()) fail(path, "expected an object");
  reject_unknown_keys(params, path, defense_param_keys(spec.family));
  for (const auto& item : params.items()) {
    const std::string key = item.key();
    const json& v = item.value();
    const std::string kp = path + "." + key;
    if (key == "window") spec.window = as_int(v, kp);
    else if (key == "sigma") spec.sigma = as_number(v, kp);
    else if (key == "kernel_size") spec.kernel_size = as_int(v, kp);
    else if (key == "diameter") spec.diameter = as_int(v, kp);
    else if (key == "sigma_color") spec.sigma_color = as_number(v, kp);
    else if (key == "sigma_space") spec.sigma_space = as_number(v, kp);
    else if (key == "tv_weight") spec.tv_weight = as_number(v, kp);
    else if (key == "tv_iters") spec.tv_iters = as_int(v, kp);
    else if (key == "bit_depth") spec.bit_depth = as_int(v, kp);
  }
  if (spec.window < 1 || spec.window % 2 == 0)
    fail(path + ".window", "must be odd and positive");
  if (spec.kernel_size < 1 || spec.kernel_size % 2 == 0)
    fail(path + ".kernel_size", "must be odd and positive");
  if (spec.diameter < 1 || spec.diameter % 2 == 0)
    fail(path + ".diameter", "must be odd and positive");
  if (spec.bit_depth < 1 || spec.bit_depth > 8)
    fail(path + ".bit_depth", "must be in [1, 8]");
  if (spec.tv_weight < 0.0) fail(path + ".tv_weight", "must be >= 0");
  if (spec.temperature <= 0.0) fail(path + ".temperature", "must be positive");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown_keys(root, "",
                      {"seed", "dataset", "model", "attacks", "defenses",
                       "distill", "output_dir", "report_formats",
                       "dump_adversarials"});

  ExperimentConfig cfg;
  const json& seed = require(root, "", "seed");
  if (!seed.is_number_integer()) throw ConfigError("config: seed: expected an integer");
  cfg.seed = static_cast<std::uint64_t>(seed.get<std::int64_t>());

  // dataset
  {
    const json& ds = require(root, "", "dataset");
    if (!ds.is_object()) throw ConfigError("config: dataset: expected an object");
    reject_unknown_keys(ds, "dataset", {"generate", "load"});
    if (ds.contains("generate") == ds.contains("load"))
      throw ConfigError("config: dataset: exactly one of generate/load required");
    if (ds.contains("generate")) {
      const json& gen = ds["generate"];
      if (!gen.is_object()) throw ConfigError("config: dataset.generate: expected an object");
      reject_unknown_keys(gen, "dataset.generate", {"n"});
      int n = as_int(require(gen, "dataset.generate", "n"), "dataset.generate.n");
      if (n < 4) throw ConfigError("config: dataset.generate.n: must be at least 4");
      cfg.dataset.generate_n = static_cast<std::size_t>(n);
    } else {
      const json& load = ds["load"];
      if (!load.is_object()) throw ConfigError("config: dataset.load: expected an object");
      reject_unknown_keys(load, "dataset.load", {"images", "labels"});
      cfg.dataset.load_images =
          as_string(require(load, "dataset.load", "images"), "dataset.load.images");
      cfg.dataset.load_labels =
          as_string(require(load, "dataset.load", "labels"), "dataset.load.labels");
    }
  }

  // model
  {
    const json& m = require(root, "", "model");
    if (!m.is_object()) throw ConfigError("config: model: expected an object");
    reject_unknown_keys(m, "model", {"train", "load"});
    if (m.contains("train") == m.contains("load"))
      throw ConfigError("config: model: exactly one of train/load required");
    if (m.contains("train"))
      cfg.model.train = train_config_from_json(m["train"], "model.train", cfg.seed);
    else
      cfg.model.load_path = as_string(m["load"], "model.load");
  }

  // attacks
  {
    const json& attacks = require(root, "", "attacks");
    if (!attacks.is_array() || attacks.empty())
      throw ConfigError("config: attacks: expected a non-empty array");
    for (std::size_t i = 0; i < attacks.size(); ++i) {
      const std::string path = "attacks[" + std::to_string(i) + "]";
      const json& a = attacks[i];
      if (!a.is_object()) fail(path, "expected an object");
      reject_unknown_keys(a, path, {"family", "preset", "params"});
      std::string family_name = as_string(require(a, path, "family"), path + ".family");
      AttackFamily family;
      try {
        family = parse_attack_family(family_name);
      } catch (const std::invalid_argument& e) {
        fail(path + ".family", e.what());
      }
      PresetKind preset = PresetKind::PaperDefault;
      if (a.contains("preset")) {
        try {
          preset = parse_preset(as_string(a["preset"], path + ".preset"));
        } catch (const std::invalid_argument& e) {
          fail(path + ".preset", e.what());
        }
      }
      AttackSpec spec = attack_preset(family, preset);
      if (a.contains("params")) apply_attack_params(spec, a["params"], path + ".params");
      validate_attack_spec(spec, path);
      cfg.attacks.push_back(AttackEntry{family_name, spec});
    }
  }

  // defenses (optional)
  if (root.contains("defenses")) {
    const json& defenses = root["defenses"];
    if (!defenses.is_array())
      throw ConfigError("config: defenses: expected an array");
    for (std::size_t i = 0; i < defenses.size(); ++i) {
      const std::string path = "defenses[" + std::to_string(i) + "]";
      const json& d = defenses[i];
      if (!d.is_object()) fail(path, "expected an object");
      reject_unknown_keys(d, path, {"family", "params"});
      std::string family_name = as_string(require(d, path, "family"), path + ".family");
      DefenseSpec spec;
      try {
        spec.family = parse_defense_family(family_name);
      } catch (const std::invalid_argument& e) {
        fail(path + ".family", e.what());
      }
      if (spec.family == DefenseFamily::Distill)
        fail(path + ".family",
             "distill is configured through the top-level \"distill\" key");
      if (d.contains("params")) apply_defense_params(spec, d["params"], path + ".params");
      cfg.defenses.push_back(DefenseEntry{family_name, spec});
    }
  }

  // distill (optional)
  if (root.contains("distill")) {
    const json& d = root["distill"];
    if (!d.is_object()) throw ConfigError("config: distill: expected an object");
    reject_unknown_keys(d, "distill", {"temperature"});
    double t = as_number(require(d, "distill", "temperature"), "distill.temperature");
    if (t <= 0.0) throw ConfigError("config: distill.temperature: must be positive");
    cfg.distill_temperature = t;
  }

  if (root.contains("output_dir"))
    cfg.output_dir = as_string(root["output_dir"], "output_dir");
  if (root.contains("report_formats")) {
    const json& formats = root["report_formats"];
    if (!formats.is_array() || formats.empty())
      throw ConfigError("config: report_formats: expected a non-empty array");
    cfg.report_formats.clear();
    for (std::size_t i = 0; i < formats.size(); ++i) {
      std::string f = as_string(formats[i], "report_formats[" + std::to_string(i) + "]");
      if (f == "csv") cfg.report_formats.push_back(ReportFormat::Csv);
      else if (f == "md") cfg.report_formats.push_back(ReportFormat::Md);
      else fail("report_formats[" + std::to_string(i) + "]", "expected \"csv\" or \"md\"");
    }
  }
  if (root.contains("dump_adversarials"))
    cfg.dump_adversarials = as_bool(root["dump_adversarials"], "dump_adversarials");

  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace advbench
