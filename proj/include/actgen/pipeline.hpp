#pragma once

// End-to-end orchestration: configuration, the in-memory stages (build,
// train, evaluate, importance) and the file-backed subcommands that chain
// them under one output directory.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "actgen/csv.hpp"
#include "actgen/error.hpp"
#include "actgen/evaluation.hpp"
#include "actgen/generator.hpp"
#include "actgen/ingest.hpp"
#include "actgen/neural_net.hpp"
#include "actgen/random_forest.hpp"
#include "actgen/schedule.hpp"
#include "actgen/schedule_builder.hpp"
#include "actgen/synthdata.hpp"
#include "actgen/task_models.hpp"

namespace actgen {

namespace fs = std::filesystem;

struct PipelinePaths {
  std::string data = "data";
  std::string models = "models";
  std::string generated = "generated";
  std::string reports = "reports";
};

struct PipelineConfig {
  std::uint64_t seed = 1;
  PrimaryThresholds thresholds;
  SynthSpec synth;
  CleaningRules cleaning;
  ModelTrainConfig training;
  bool group_max_samples = true;  // bootstrap cap from the person group unless set
  std::vector<Variant> primary_type_variants{Variant::DL, Variant::DLEmb, Variant::RF, Variant::RFEmb};
  Variant generation_variant = Variant::RF;
  GenPolicy policy;
  PipelinePaths paths;
  nlohmann::json source;  // the effective configuration, hashed into every artifact
};

namespace detail {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, "cli-pipeline", std::string("key '") + key + "': " + e.what());
  }
}

inline TrainConfig parse_dl(const nlohmann::json& j, TrainConfig c) {
  c.hidden_layers = get_or<std::size_t>(j, "hidden_layers", c.hidden_layers);
  c.learning_rate = get_or<double>(j, "learning_rate", c.learning_rate);
  c.activation = activation_from_string(get_or<std::string>(j, "activation", std::string(to_string(c.activation))));
  c.optimizer = optimizer_from_string(get_or<std::string>(j, "optimizer", std::string(to_string(c.optimizer))));
  c.batch_size = get_or<std::size_t>(j, "batch_size", c.batch_size);
  c.epochs = get_or<std::size_t>(j, "epochs", c.epochs);
  if (c.hidden_layers == 0 || c.batch_size == 0 || !(c.learning_rate > 0))
    throw Error(ErrorCode::ConfigError, "cli-pipeline", "dl: hidden_layers, batch_size and learning_rate must be positive");
  return c;
}

inline DlGrid parse_dl_grid(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j == "full") return full_dl_grid();
    throw Error(ErrorCode::ConfigError, "cli-pipeline", "dl_grid: unknown preset");
  }
  DlGrid g;
  g.hidden_layers = get_or<std::vector<std::size_t>>(j, "hidden_layers", g.hidden_layers);
  g.learning_rates = get_or<std::vector<double>>(j, "learning_rates", g.learning_rates);
  g.activations.clear();
  for (const auto& a : get_or<std::vector<std::string>>(j, "activations", {"relu"}))
    g.activations.push_back(activation_from_string(a));
  g.optimizers.clear();
  for (const auto& o : get_or<std::vector<std::string>>(j, "optimizers", {"adam"}))
    g.optimizers.push_back(optimizer_from_string(o));
  if (g.size() == 0) throw Error(ErrorCode::ConfigError, "cli-pipeline", "dl_grid is empty");
  return g;
}

inline RfGrid parse_rf_grid(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j == "full") return full_rf_grid();
    throw Error(ErrorCode::ConfigError, "cli-pipeline", "rf_grid: unknown preset");
  }
  RfGrid g;
  g.n_estimators = get_or<std::vector<std::size_t>>(j, "n_estimators", g.n_estimators);
  g.min_samples_leaf = get_or<std::vector<std::size_t>>(j, "min_samples_leaf", g.min_samples_leaf);
  g.max_samples = get_or<std::vector<std::size_t>>(j, "max_samples", g.max_samples);
  if (g.size() == 0) throw Error(ErrorCode::ConfigError, "cli-pipeline", "rf_grid is empty");
  return g;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

}  // namespace detail

/// Reads a configuration tree. `primary_thresholds` is required; every other
/// key has a default. `seed_override` replaces the top-level seed.
inline PipelineConfig parse_config(nlohmann::json j, std::optional<std::uint64_t> seed_override = std::nullopt) {
  using detail::get_or;
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "cli-pipeline", "configuration must be an object");
  if (!j.contains("primary_thresholds"))
    throw Error(ErrorCode::ConfigError, "cli-pipeline", "missing required key 'primary_thresholds'");
  if (seed_override) j["seed"] = *seed_override;

  PipelineConfig c;
  c.seed = get_or<std::uint64_t>(j, "seed", 1);
  const auto& t = j.at("primary_thresholds");
  c.thresholds.maintenance_min = get_or<double>(t, "maintenance_min", c.thresholds.maintenance_min);
  c.thresholds.discretionary_min = get_or<double>(t, "discretionary_min", c.thresholds.discretionary_min);

  const nlohmann::json synth = j.value("synth", nlohmann::json::object());
  c.synth.n_persons = get_or<std::size_t>(synth, "n_persons", 5000);
  c.synth.corruption_rate = get_or<double>(synth, "corruption_rate", 0.02);
  c.synth.worker_share = get_or<double>(synth, "worker_share", c.synth.worker_share);
  c.synth.student_share = get_or<double>(synth, "student_share", c.synth.student_share);
  c.synth.nonworker_share = get_or<double>(synth, "nonworker_share", c.synth.nonworker_share);
  c.synth.seed = derive_seed(c.seed, 0x73796e74ULL);
  c.synth.validate();

  const nlohmann::json paths = j.value("paths", nlohmann::json::object());
  c.paths.data = get_or<std::string>(paths, "data", c.paths.data);
  c.paths.models = get_or<std::string>(paths, "models", c.paths.models);
  c.paths.generated = get_or<std::string>(paths, "generated", c.paths.generated);
  c.paths.reports = get_or<std::string>(paths, "reports", c.paths.reports);

  TrainConfig dl;
  dl.epochs = 20;
  dl.batch_size = 64;
  c.training.dl = detail::parse_dl(j.value("dl", nlohmann::json::object()), dl);
  if (j.contains("dl_grid")) c.training.dl_grid = detail::parse_dl_grid(j.at("dl_grid")).expand(c.training.dl);

  const nlohmann::json rf = j.value("rf", nlohmann::json::object());
  c.training.rf.n_estimators = get_or<std::size_t>(rf, "n_estimators", 60);
  c.training.rf.min_samples_leaf = get_or<std::size_t>(rf, "min_samples_leaf", 5);
  if (rf.is_object() && rf.contains("max_samples")) {
    c.training.rf.max_samples = get_or<std::size_t>(rf, "max_samples", 10000);
    c.group_max_samples = false;
  }
  if (c.training.rf.n_estimators == 0 || c.training.rf.min_samples_leaf == 0)
    throw Error(ErrorCode::ConfigError, "cli-pipeline", "rf: n_estimators and min_samples_leaf must be positive");
  if (j.contains("rf_grid")) {
    c.training.rf_grid = detail::parse_rf_grid(j.at("rf_grid")).expand(c.training.rf);
    c.group_max_samples = false;
  }
  c.training.min_examples = get_or<std::size_t>(j, "min_examples", c.training.min_examples);
  c.training.seed = derive_seed(c.seed, 0x7472616eULL);

  if (j.contains("primary_type_variants")) {
    c.primary_type_variants.clear();
    for (const auto& v : j.at("primary_type_variants").get<std::vector<std::string>>())
      c.primary_type_variants.push_back(variant_from_string(v));
  }
  const nlohmann::json gen = j.value("generation", nlohmann::json::object());
  c.generation_variant = variant_from_string(get_or<std::string>(gen, "variant", "RF"));
  const std::string types = get_or<std::string>(gen, "types", "sample");
  if (types != "sample" && types != "argmax")
    throw Error(ErrorCode::ConfigError, "cli-pipeline", "generation.types must be 'sample' or 'argmax'");
  c.policy.types = types == "sample" ? TypeDecision::Sample : TypeDecision::Argmax;
  c.policy.residual_noise = get_or<bool>(gen, "residual_noise", true);
  c.policy.seed = derive_seed(c.seed, 0x67656e65ULL);
  c.source = j;
  return c;
}

inline PipelineConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed_override = std::nullopt) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, "cli-pipeline", "cannot read config " + path.string());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, "cli-pipeline", "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(std::move(j), seed_override);
}

inline std::string config_hash(const PipelineConfig& c) { return detail::hex64(fnv1a(c.source.dump())); }

inline nlohmann::json stamp(const PipelineConfig& c) { return {{"config_hash", config_hash(c)}, {"seed", c.seed}}; }

// ---------------------------------------------------------------------------
// In-memory stages
// ---------------------------------------------------------------------------

struct PersonPattern {
  PersonRecord person;
  DailyPattern pattern;
};

struct BuildStats {
  std::size_t persons = 0;
  std::size_t built = 0;
  std::map<std::string, std::size_t> failures;  // error code -> count
  std::map<std::string, std::map<std::string, std::size_t>> primary_types;  // group -> type -> count

  nlohmann::json to_json() const {
    return {{"persons", persons}, {"built", built}, {"failures", failures}, {"primary_types", primary_types}};
  }
};

/// Schedules of clean persons, in person order.
inline std::vector<ActivitySchedule> schedules_for(const CleanResult& clean_data,
                                                   const PurposeTable& purposes = PurposeTable::defaults()) {
  auto by_person = group_trips(clean_data.trips);
  std::vector<ActivitySchedule> out;
  for (const auto& p : clean_data.persons) out.push_back(trips_to_schedule(by_person[p.person_id], purposes));
  return out;
}

/// Daily patterns for persons with schedules; unbuildable schedules are
/// counted by error code and skipped.
inline std::vector<PersonPattern> build_patterns(const std::vector<PersonRecord>& persons,
                                                 const std::vector<ActivitySchedule>& schedules,
                                                 const PrimaryThresholds& thresholds, BuildStats* stats = nullptr) {
  std::map<std::string, const ActivitySchedule*> by_id;
  for (const auto& s : schedules) by_id[s.person_id] = &s;
  std::vector<PersonPattern> out;
  BuildStats local;
  for (const auto& p : persons) {
    auto it = by_id.find(p.person_id);
    if (it == by_id.end()) continue;
    ++local.persons;
    try {
      DailyPattern d = build_daily_pattern(*it->second, thresholds, person_group(p));
      ++local.primary_types[std::string(to_string(person_group(p)))][std::string(to_string(d.primary_pattern.primary.group))];
      out.push_back({p, std::move(d)});
      ++local.built;
    } catch (const Error& e) {
      ++local.failures[std::string(to_string(e.code()))];
    }
  }
  if (stats) *stats = local;
  return out;
}

struct TrainedGroup {
  PersonGroup group = PersonGroup::Worker;
  std::map<Slot, std::map<Variant, SlotModel>> models;
  std::size_t n_train = 0;
};

struct TrainedModels {
  std::map<PersonGroup, TrainedGroup> groups;
  Variant generation_variant = Variant::RF;

  /// The generation variant of every slot; a slot trained without it (too
  /// few examples) contributes its constant model.
  ModelBundle bundle() const {
    ModelBundle b;
    for (const auto& [g, tg] : groups) {
      GroupBundle gb;
      gb.group = g;
      for (const auto& [slot, variants] : tg.models) {
        auto it = variants.find(generation_variant);
        if (it == variants.end()) it = variants.find(Variant::Constant);
        if (it == variants.end()) it = variants.begin();
        gb.models.emplace(slot, it->second);
      }
      b.groups.emplace(g, std::move(gb));
    }
    return b;
  }
};

inline std::map<Slot, SlotExamples> examples_for(const std::vector<PersonPattern>& data) {
  std::map<Slot, SlotExamples> out;
  for (Slot s : kAllSlots) out[s];
  for (const auto& pp : data) add_examples(pp.person, pp.pattern, out);
  return out;
}

/// Variants to fit for a slot: all configured ones for the primary type,
/// the generation variant elsewhere; RF&Emb also needs DL&Emb.
inline std::vector<Variant> variants_for(Slot s, const PipelineConfig& c) {
  std::vector<Variant> want =
      s == Slot::PrimaryType ? c.primary_type_variants : std::vector<Variant>{c.generation_variant};
  if (s == Slot::PrimaryType && std::find(want.begin(), want.end(), c.generation_variant) == want.end())
    want.push_back(c.generation_variant);
  std::vector<Variant> ordered;
  const bool need_emb = std::find(want.begin(), want.end(), Variant::RFEmb) != want.end();
  for (Variant v : {Variant::DL, Variant::DLEmb, Variant::RF, Variant::RFEmb, Variant::Constant})
    if (std::find(want.begin(), want.end(), v) != want.end() || (v == Variant::DLEmb && need_emb)) ordered.push_back(v);
  return ordered;
}

/// Fits every slot of every person group on the training patterns.
inline TrainedModels train_models(const std::vector<PersonPattern>& train, const PipelineConfig& c) {
  TrainedModels out;
  out.generation_variant = c.generation_variant;
  for (PersonGroup g : kAllPersonGroups) {
    std::vector<PersonPattern> group_data;
    for (const auto& pp : train)
      if (person_group(pp.person) == g) group_data.push_back(pp);
    TrainedGroup tg;
    tg.group = g;
    tg.n_train = group_data.size();
    ModelTrainConfig mc = c.training;
    if (c.group_max_samples) mc.rf.max_samples = default_max_samples(g);
    mc.seed = derive_seed(c.training.seed, static_cast<std::uint64_t>(g));
    const auto examples = examples_for(group_data);
    for (Slot s : kAllSlots) {
      auto& slot_models = tg.models[s];
      const SlotExamples& ex = examples.at(s);
      for (Variant v : variants_for(s, c)) {
        const SlotModel* source = nullptr;
        if (v == Variant::RFEmb) {
          auto it = slot_models.find(Variant::DLEmb);
          if (it != slot_models.end() && it->second.net) source = &it->second;
        }
        SlotModel m = (v == Variant::RFEmb && !source && ex.rows.size() >= mc.min_examples)
                          ? fit_slot_model(s, Variant::Constant, ex, mc)
                          : fit_slot_model(s, v, ex, mc, source);
        // an under-populated slot falls back to one shared constant model
        slot_models.emplace(m.variant == Variant::Constant ? Variant::Constant : v, std::move(m));
      }
    }
    out.groups.emplace(g, std::move(tg));
  }
  return out;
}

/// Held-out scores, time-model errors and generated-vs-observed histograms.
inline EvaluationReport build_report(const TrainedModels& models, const std::vector<PersonPattern>& train,
                                     const std::vector<PersonPattern>& valid, const GenPolicy& policy) {
  EvaluationReport r;
  for (PersonGroup g : kAllPersonGroups) {
    std::vector<PersonPattern> tr, va;
    for (const auto& pp : train)
      if (person_group(pp.person) == g) tr.push_back(pp);
    for (const auto& pp : valid)
      if (person_group(pp.person) == g) va.push_back(pp);
    const auto ex_train = examples_for(tr), ex_valid = examples_for(va);
    auto git = models.groups.find(g);
    if (git == models.groups.end()) throw Error(ErrorCode::ModelMissing, "evaluation", "no models for a person group");
    const auto& slot_models = git->second.models;

    auto scores = [&](const SlotModel& m, const SlotExamples& ex) {
      std::vector<std::size_t> pred;
      for (const auto& row : ex.rows) {
        const auto dist = m.predict(row);
        pred.push_back(static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin()));
      }
      return score_classification(pred, ex.labels, m.n_classes);
    };
    for (const auto& name : model_variants()) {
      const Variant v = variant_from_string(name);
      TypeScoreRow row{g, name, {}, {}};
      const auto& pt = slot_models.at(Slot::PrimaryType);
      auto it = pt.find(v);
      if (it == pt.end()) it = pt.find(Variant::Constant);
      if (it != pt.end()) {
        row.train = scores(it->second, ex_train.at(Slot::PrimaryType));
        row.valid = scores(it->second, ex_valid.at(Slot::PrimaryType));
      }
      r.type_scores.push_back(row);
    }
    const ModelBundle bundle = models.bundle();
    for (Slot s : kAllSlots) {
      if (is_type_slot(s)) continue;
      const SlotModel& m = bundle.for_group(g).at(s);
      auto err = [&](const SlotExamples& ex) -> std::optional<double> {
        if (ex.rows.empty()) return std::nullopt;
        std::vector<double> pred;
        for (const auto& row : ex.rows) pred.push_back(m.predict(row).front());
        return rmse(pred, ex.targets);
      };
      r.time_scores.push_back({g, std::string(to_string(s)), std::string(to_string(m.variant)), err(ex_train.at(s)),
                               err(ex_valid.at(s))});
    }
  }

  // generated vs observed time-of-day histograms on the validation persons
  const ModelBundle bundle = models.bundle();
  std::map<std::string, std::vector<double>> observed, generated;
  auto collect = [](const DailyPattern& d, PersonGroup g, std::map<std::string, std::vector<double>>& into) {
    const PrimaryPattern& pp = d.primary_pattern;
    if (g == PersonGroup::Worker && pp.primary.group == ActivityGroup::W) {
      into["work_start"].push_back(pp.primary.start);
      into["work_end"].push_back(pp.primary.end);
    }
    if (pp.stop_before) into["stop_before_start"].push_back(pp.stop_before->start);
    if (pp.stop_after) into["stop_after_start"].push_back(pp.stop_after->start);
    for (const auto& a : d.secondary) into["secondary_start"].push_back(a.start);
  };
  for (const auto& pp : valid) {
    const PersonGroup g = person_group(pp.person);
    collect(pp.pattern, g, observed);
    collect(generate_schedule(pp.person, bundle, policy).pattern, g, generated);
  }
  for (const char* name : {"work_start", "work_end", "stop_before_start", "stop_after_start", "secondary_start"}) {
    HistogramPair h;
    h.name = name;
    h.observed = time_histogram(observed[name]);
    h.generated = time_histogram(generated[name]);
    if (!observed[name].empty() && !generated[name].empty()) h.distance = emd(h.observed, h.generated);
    r.histograms.push_back(std::move(h));
  }
  return r;
}

/// Column-level importance of the one-hot forest primary-type model.
inline std::vector<FeatureScore> primary_type_importance(const TrainedModels& models, PersonGroup g) {
  const auto& pt = models.groups.at(g).models.at(Slot::PrimaryType);
  auto it = pt.find(Variant::RF);
  if (it == pt.end() || !it->second.forest)
    throw Error(ErrorCode::ModelMissing, "random-forest", "no RF primary-type model for " + std::string(to_string(g)));
  const SlotModel& m = it->second;
  return feature_importance(*m.forest, encoded_layout(m.schema, m.forest_mode()));
}

// ---------------------------------------------------------------------------
// File-backed subcommands
// ---------------------------------------------------------------------------

class Pipeline {
 public:
  Pipeline(PipelineConfig cfg, fs::path out) : cfg_(std::move(cfg)), out_(std::move(out)) {}

  const PipelineConfig& config() const { return cfg_; }
  fs::path data_dir() const { return out_ / cfg_.paths.data; }
  fs::path models_dir() const { return out_ / cfg_.paths.models; }
  fs::path generated_dir() const { return out_ / cfg_.paths.generated; }
  fs::path reports_dir() const { return out_ / cfg_.paths.reports; }

  void synth() {
    log("synth start");
    const SynthSurvey s = generate_synthetic_survey(cfg_.synth);
    write_synthetic_survey(data_dir(), s);
    write_json(data_dir() / "synth.json", {{"stamp", stamp(cfg_)}, {"persons", s.persons.size()}, {"trips", s.trips.size()}});
    log("synth done: " + std::to_string(s.persons.size()) + " persons");
  }

  void ingest() {
    log("ingest start");
    SurveyData raw = parse_survey(require(data_dir() / "persons.csv"), require(data_dir() / "trips.csv"));
    const CleanResult cleaned = clean(raw.persons, raw.trips, cfg_.cleaning);
    std::ostringstream persons, quarantine, schedules, removed;
    write_persons_csv(persons, cleaned.persons);
    write_quarantine_csv(quarantine, raw.quarantine);
    for (const auto& s : schedules_for(cleaned)) schedules << schedule_to_json(s).dump() << '\n';
    write_csv_row(removed, {"person_id", "reason"});
    for (const auto& r : cleaned.removed) write_csv_row(removed, {r.person_id, r.reason});
    write_text_file(data_dir() / "clean_persons.csv", persons.str());
    write_text_file(data_dir() / "quarantine.csv", quarantine.str());
    write_text_file(data_dir() / "removed_persons.csv", removed.str());
    write_text_file(data_dir() / "schedules.jsonl", schedules.str());
    write_json(data_dir() / "ingest.json", {{"stamp", stamp(cfg_)},
                                            {"persons_read", raw.persons.size()},
                                            {"quarantined_rows", raw.quarantine.size()},
                                            {"persons_kept", cleaned.persons.size()},
                                            {"persons_removed", cleaned.removed.size()}});
    log("ingest done");
  }

  void build() {
    log("build start");
    const auto persons = clean_persons();
    std::vector<ActivitySchedule> schedules;
    for (const auto& line : read_lines(require(data_dir() / "schedules.jsonl")))
      schedules.push_back(schedule_from_json(nlohmann::json::parse(line)));
    BuildStats stats;
    const auto patterns = build_patterns(persons, schedules, cfg_.thresholds, &stats);
    std::ostringstream out;
    for (const auto& pp : patterns)
      out << nlohmann::json{{"person_id", pp.person.person_id}, {"pattern", pattern_to_json(pp.pattern)}}.dump() << '\n';
    write_text_file(data_dir() / "patterns.jsonl", out.str());
    write_json(data_dir() / "build_stats.json", {{"stamp", stamp(cfg_)}, {"stats", stats.to_json()}});
    log("build done: " + std::to_string(stats.built) + " patterns");
  }

  void train() {
    log("train start");
    const auto split = split_patterns();
    const TrainedModels models = train_models(split.first, cfg_);
    fs::remove_all(models_dir());
    nlohmann::json index = nlohmann::json::array();
    for (const auto& [g, tg] : models.groups) {
      for (const auto& [slot, variants] : tg.models) {
        const fs::path dir = models_dir() / std::string(to_string(g)) / std::string(to_string(slot));
        nlohmann::json files = nlohmann::json::object();
        for (const auto& [v, m] : variants) {
          const std::string file = "params_" + variant_file_tag(v) + ".json";
          write_json(dir / file, slot_model_to_json(m));
          files[std::string(to_string(v))] = file;
        }
        const std::string gen_variant =
            variants.count(models.generation_variant) ? std::string(to_string(models.generation_variant))
                                                      : std::string(to_string(variants.begin()->first));
        write_json(dir / "manifest.json", {{"stamp", stamp(cfg_)},
                                           {"group", to_string(g)},
                                           {"slot", to_string(slot)},
                                           {"n_train_persons", tg.n_train},
                                           {"generation_variant", gen_variant},
                                           {"variants", files}});
        index.push_back({{"group", to_string(g)}, {"slot", to_string(slot)}});
      }
    }
    write_json(models_dir() / "manifest.json",
               {{"stamp", stamp(cfg_)}, {"generation_variant", to_string(models.generation_variant)}, {"slots", index}});
    log("train done");
  }

  /// Models as written by `train`; ModelMissing names the missing manifest.
  TrainedModels load_models() const {
    const fs::path top = models_dir() / "manifest.json";
    if (!fs::exists(top))
      throw Error(ErrorCode::ModelMissing, "cli-pipeline", "model manifest " + top.string() + " not found; run train first");
    const auto index = nlohmann::json::parse(read_text_file(top));
    TrainedModels models;
    models.generation_variant = variant_from_string(index.at("generation_variant").get<std::string>());
    for (const auto& entry : index.at("slots")) {
      const PersonGroup g = person_group_from_string(entry.at("group").get<std::string>());
      const Slot s = slot_from_string(entry.at("slot").get<std::string>());
      const fs::path dir = models_dir() / std::string(to_string(g)) / std::string(to_string(s));
      const fs::path manifest_path = dir / "manifest.json";
      if (!fs::exists(manifest_path))
        throw Error(ErrorCode::ModelMissing, "cli-pipeline", "model manifest " + manifest_path.string() + " not found");
      const auto manifest = nlohmann::json::parse(read_text_file(manifest_path));
      auto& tg = models.groups[g];
      tg.group = g;
      tg.n_train = manifest.at("n_train_persons");
      for (const auto& [variant, file] : manifest.at("variants").items()) {
        const fs::path p = dir / file.get<std::string>();
        if (!fs::exists(p)) throw Error(ErrorCode::ModelMissing, "cli-pipeline", "model parameters " + p.string() + " not found");
        tg.models[s].emplace(variant_from_string(variant), slot_model_from_json(nlohmann::json::parse(read_text_file(p))));
      }
    }
    return models;
  }

  void generate() {
    log("generate start");
    const ModelBundle bundle = load_models().bundle();
    const auto persons = clean_persons();
    GenerationReport report;
    std::ostringstream out;
    for (const auto& p : persons) {
      const Generation g = generate_schedule(p, bundle, cfg_.policy);
      report.add(g);
      out << nlohmann::json{{"person_id", p.person_id}, {"pattern", pattern_to_json(g.pattern)}}.dump() << '\n';
    }
    write_text_file(generated_dir() / "generated_patterns.jsonl", out.str());
    write_json(generated_dir() / "generation_report.json", {{"stamp", stamp(cfg_)}, {"report", report.to_json()}});
    log("generate done: " + std::to_string(report.persons) + " patterns");
  }

  void evaluate() {
    log("evaluate start");
    const TrainedModels models = load_models();
    const auto split = split_patterns();
    const EvaluationReport report = build_report(models, split.first, split.second, cfg_.policy);
    write_text_file(reports_dir() / "report.csv", report_csv(report));
    write_text_file(reports_dir() / "time_models.csv", time_scores_csv(report));
    nlohmann::json j = report_json(report);
    j["stamp"] = stamp(cfg_);
    write_json(reports_dir() / "report.json", j);
    for (const auto& h : report.histograms)
      write_text_file(reports_dir() / "histograms" / (h.name + ".csv"), histogram_csv(h));
    log("evaluate done");
  }

  void importance() {
    log("importance start");
    const TrainedModels models = load_models();
    for (PersonGroup g : kAllPersonGroups) {
      std::ostringstream out;
      write_csv_row(out, {"feature", "score"});
      for (const auto& f : primary_type_importance(models, g)) write_csv_row(out, {f.feature, format_number(f.score)});
      write_text_file(reports_dir() / ("importance_" + std::string(to_string(g)) + ".csv"), out.str());
    }
    write_json(reports_dir() / "importance.json", {{"stamp", stamp(cfg_)}, {"model", "RF primary_type"}});
    log("importance done");
  }

  void run_all() {
    write_json(out_ / "config.json", cfg_.source);
    synth();
    ingest();
    build();
    train();
    generate();
    evaluate();
    importance();
  }

  /// Clean persons and patterns split by survey year (train, validation).
  std::pair<std::vector<PersonPattern>, std::vector<PersonPattern>> split_patterns() const {
    const auto persons = clean_persons();
    std::map<std::string, const PersonRecord*> by_id;
    for (const auto& p : persons) by_id[p.person_id] = &p;
    std::vector<PersonPattern> train, valid;
    for (const auto& line : read_lines(require(data_dir() / "patterns.jsonl"))) {
      const auto j = nlohmann::json::parse(line);
      auto it = by_id.find(j.at("person_id").get<std::string>());
      if (it == by_id.end()) continue;
      PersonPattern pp{*it->second, pattern_from_json(j.at("pattern"))};
      (pp.person.travel_year >= 2018 ? valid : train).push_back(std::move(pp));
    }
    return {train, valid};
  }

 private:
  static std::string variant_file_tag(Variant v) {
    switch (v) {
      case Variant::DL: return "dl";
      case Variant::DLEmb: return "dl_emb";
      case Variant::RF: return "rf";
      case Variant::RFEmb: return "rf_emb";
      case Variant::Constant: return "constant";
    }
    return "unknown";
  }

  static fs::path require(const fs::path& p) {
    if (!fs::exists(p)) throw Error(ErrorCode::Io, "cli-pipeline", "missing input " + p.string());
    return p;
  }

  static std::vector<std::string> read_lines(const fs::path& p) {
    std::istringstream in(read_text_file(p));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) lines.push_back(line);
    return lines;
  }

  std::vector<PersonRecord> clean_persons() const {
    std::vector<QuarantineEntry> ignored;
    return parse_persons(read_csv(require(data_dir() / "clean_persons.csv")), ignored, "clean_persons.csv");
  }

  static void write_json(const fs::path& p, const nlohmann::json& j) { write_text_file(p, j.dump(1) + "\n"); }

  void log(const std::string& msg) const {
    fs::create_directories(out_);
    std::ofstream f(out_ / "run.log", std::ios::app);
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    f << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << ' ' << msg << '\n';
  }

  PipelineConfig cfg_;
  fs::path out_;
};

}  // namespace actgen
