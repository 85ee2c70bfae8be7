#include "metasched/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "metasched/errors.hpp"

namespace metasched {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::set<std::string> kKnownKeys = {
    "scenario",     "meta_length", "beta",   "lambda",           "total_steps",
    "reward",       "reward_clip", "seeds",  "samplers",         "output_dir",
    "smoothing_window", "reference", "eval_batches", "threads",
};

double get_number(const json& doc, const std::string& key, double fallback) {
  if (!doc.contains(key)) return fallback;
  const auto& v = doc.at(key);
  if (!v.is_number()) throw ConfigError(key, fmt::format("'{}' must be a number", key));
  return v.get<double>();
}

std::size_t get_count(const json& doc, const std::string& key, std::size_t fallback) {
  if (!doc.contains(key)) return fallback;
  const auto& v = doc.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError(key, fmt::format("'{}' must be a non-negative integer", key));
  }
  return v.get<std::size_t>();
}

std::uint64_t parse_seed(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError(key, fmt::format("'{}' entries must be non-negative integers", key));
}

std::uint64_t parse_seed_text(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const auto value = std::stoull(text, &used);
    if (used == text.size() && !text.empty() && text.front() != '-') return value;
  } catch (const std::exception&) {
  }
  throw ConfigError(key, fmt::format("'{}' is not a valid seed: '{}'", key, text));
}

double field(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_number()) {
    throw ConfigError(where + "." + key, fmt::format("'{}.{}' must be a number", where, key));
  }
  return obj.at(key).get<double>();
}

}  // namespace

MetaConfig ExperimentConfig::run_config(SamplerKind sampler, std::uint64_t seed) const {
  MetaConfig c = meta;
  c.sampler = sampler;
  c.seed = seed;
  return c;
}

ordered_json ExperimentConfig::echo() const {
  ordered_json j;
  j["scenario"] = scenario_ref;
  j["meta_length"] = meta.meta_length;
  j["beta"] = meta.beta;
  j["lambda"] = meta.lambda;
  j["total_steps"] = meta.total_steps;
  j["reward"] = std::string(to_string(meta.reward));
  j["reward_clip"] = meta.reward_clip ? ordered_json(*meta.reward_clip) : ordered_json(nullptr);
  j["seeds"] = seeds;
  ordered_json names = ordered_json::array();
  for (const auto s : samplers) names.push_back(std::string(to_string(s)));
  j["samplers"] = names;
  j["smoothing_window"] = smoothing_window;
  j["reference"] = reference;
  j["eval_batches"] = eval_batches;
  return j;
}

sim::Scenario scenario_from_json(const json& doc, std::string name) {
  if (!doc.is_object()) throw ConfigError("scenario", "scenario document must be an object");
  if (!doc.contains("objectives") || !doc.at("objectives").is_array()) {
    throw ConfigError("objectives", "scenario needs an 'objectives' array");
  }
  sim::Scenario s;
  s.name = std::move(name);
  const auto& objs = doc.at("objectives");
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const std::string where = fmt::format("objectives[{}]", i);
    const auto& o = objs.at(i);
    if (!o.is_object()) throw ConfigError(where, fmt::format("'{}' must be an object", where));
    sim::ObjectiveSpec spec;
    spec.l0 = field(o, "l0", where);
    spec.floor = field(o, "floor", where);
    spec.noise_sigma = o.contains("noise_sigma") ? field(o, "noise_sigma", where) : 0.0;
    spec.eval_noise_sigma =
        o.contains("eval_noise_sigma") ? field(o, "eval_noise_sigma", where) : 0.0;
    s.objectives.push_back(spec);
  }

  const std::size_t m = s.objectives.size();
  if (!doc.contains("transfer") || !doc.at("transfer").is_array()) {
    throw ConfigError("transfer", "scenario needs a 'transfer' array");
  }
  std::vector<double> values;
  for (const auto& entry : doc.at("transfer")) {
    if (entry.is_array()) {
      if (entry.size() != m) {
        throw ConfigError("transfer", fmt::format("transfer rows must have {} entries", m));
      }
      for (const auto& x : entry) {
        if (!x.is_number()) throw ConfigError("transfer", "transfer entries must be numbers");
        values.push_back(x.get<double>());
      }
    } else if (entry.is_number()) {
      values.push_back(entry.get<double>());
    } else {
      throw ConfigError("transfer", "transfer entries must be numbers");
    }
  }
  if (values.size() != m * m) {
    throw ConfigError("transfer", fmt::format("transfer needs {} entries for {} objectives, got {}",
                                              m * m, m, values.size()));
  }
  s.transfer = sim::TransferMatrix(m, std::move(values));
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("objectives", e.what());
  }
  return s;
}

ordered_json scenario_to_json(const sim::Scenario& scenario) {
  ordered_json j;
  ordered_json objs = ordered_json::array();
  for (const auto& o : scenario.objectives) {
    objs.push_back(ordered_json{{"l0", o.l0},
                                {"floor", o.floor},
                                {"noise_sigma", o.noise_sigma},
                                {"eval_noise_sigma", o.eval_noise_sigma}});
  }
  j["objectives"] = objs;
  j["transfer"] = std::vector<double>(scenario.transfer.row_major().begin(),
                                      scenario.transfer.row_major().end());
  return j;
}

sim::Scenario resolve_scenario(const std::string& ref, const fs::path& base_dir) {
  const auto presets = sim::preset_names();
  if (std::find(presets.begin(), presets.end(), ref) != presets.end()) {
    return sim::scenario_preset(ref);
  }
  fs::path path(ref);
  if (path.is_relative()) path = base_dir / path;
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("scenario",
                      fmt::format("'scenario' is neither a preset nor a readable file: '{}'", ref));
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario", fmt::format("scenario file '{}' is not valid: {}", ref, e.what()));
  }
  return scenario_from_json(doc, path.stem().string());
}

ExperimentConfig parse_experiment_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("<root>", "config document must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (!kKnownKeys.contains(key)) {
      throw ConfigError(key, fmt::format("unknown config key '{}'", key));
    }
  }

  ExperimentConfig cfg;
  if (!doc.contains("scenario") || !doc.at("scenario").is_string()) {
    throw ConfigError("scenario", "'scenario' must name a preset or a scenario file");
  }
  cfg.scenario_ref = doc.at("scenario").get<std::string>();
  cfg.scenario = resolve_scenario(cfg.scenario_ref, base_dir);

  cfg.meta.meta_length = get_count(doc, "meta_length", cfg.meta.meta_length);
  cfg.meta.beta = get_number(doc, "beta", cfg.meta.beta);
  cfg.meta.lambda = get_number(doc, "lambda", cfg.meta.lambda);
  cfg.meta.total_steps = get_count(doc, "total_steps", cfg.meta.total_steps);
  if (doc.contains("reward")) {
    const auto& v = doc.at("reward");
    const auto kind = v.is_string() ? parse_reward_kind(v.get<std::string>()) : std::nullopt;
    if (!kind) throw ConfigError("reward", fmt::format("unknown reward kind {}", v.dump()));
    cfg.meta.reward = *kind;
  }
  if (doc.contains("reward_clip") && !doc.at("reward_clip").is_null()) {
    cfg.meta.reward_clip = get_number(doc, "reward_clip", 0.0);
  }

  if (doc.contains("seeds")) {
    const auto& v = doc.at("seeds");
    if (!v.is_array()) throw ConfigError("seeds", "'seeds' must be an array of integers");
    for (const auto& s : v) cfg.seeds.push_back(parse_seed(s, "seeds"));
  } else {
    cfg.seeds = {0};
  }
  if (cfg.seeds.empty()) throw ConfigError("seeds", "'seeds' must not be empty");

  if (doc.contains("samplers")) {
    const auto& v = doc.at("samplers");
    if (!v.is_array()) throw ConfigError("samplers", "'samplers' must be an array of names");
    for (const auto& s : v) {
      const auto kind = s.is_string() ? parse_sampler_kind(s.get<std::string>()) : std::nullopt;
      if (!kind) throw ConfigError("samplers", fmt::format("unknown sampler {}", s.dump()));
      cfg.samplers.push_back(*kind);
    }
  } else {
    cfg.samplers = {SamplerKind::kMometas, SamplerKind::kUniform};
  }
  if (cfg.samplers.empty()) throw ConfigError("samplers", "'samplers' must not be empty");

  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string()) {
      throw ConfigError("output_dir", "'output_dir' must be a string");
    }
    cfg.output_dir = doc.at("output_dir").get<std::string>();
  }
  cfg.smoothing_window = get_count(doc, "smoothing_window", cfg.smoothing_window);
  if (cfg.smoothing_window == 0) {
    throw ConfigError("smoothing_window", "'smoothing_window' must be positive");
  }
  if (doc.contains("reference")) {
    const auto& v = doc.at("reference");
    if (!v.is_string() || !parse_sampler_kind(v.get<std::string>())) {
      throw ConfigError("reference", fmt::format("unknown reference sampler {}", v.dump()));
    }
    cfg.reference = v.get<std::string>();
  }
  cfg.eval_batches = get_count(doc, "eval_batches", cfg.eval_batches);
  if (cfg.eval_batches == 0) throw ConfigError("eval_batches", "'eval_batches' must be positive");
  cfg.threads = get_count(doc, "threads", cfg.threads);

  try {
    cfg.meta.validate();
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    const std::string key = msg.substr(0, msg.find_first_of(" ("));
    throw ConfigError(key, msg);
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", fmt::format("cannot read config file '{}'", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", fmt::format("config file '{}' is not valid: {}", path.string(),
                                            e.what()));
  }
  ExperimentConfig cfg = parse_experiment_config(doc, path.parent_path());
  if (const char* env = std::getenv(kSeedEnvVar); env != nullptr && *env != '\0') {
    cfg.seeds = {parse_seed_text(env, kSeedEnvVar)};
  }
  return cfg;
}

}  // namespace metasched
