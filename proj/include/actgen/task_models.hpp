#pragma once

// The fifteen prediction slots of the cascade, their conditioning columns,
// training examples drawn from built patterns, and one trained model per
// slot in any of the four variants (one-hot or embedded network, one-hot
// forest, forest over transferred embeddings).

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "actgen/encoding.hpp"
#include "actgen/error.hpp"
#include "actgen/evaluation.hpp"
#include "actgen/ingest.hpp"
#include "actgen/neural_net.hpp"
#include "actgen/random_forest.hpp"
#include "actgen/schedule.hpp"

namespace actgen {

enum class Slot {
  PrimaryType, PrimaryStart, PrimaryEnd,
  StopBeforeType, StopBeforeStart, StopBeforeDuration,
  StopAfterType, StopAfterStart, StopAfterDuration,
  SubTourType, SubTourStart, SubTourDuration,
  SecondaryType, SecondaryStart, SecondaryDuration,
};

inline constexpr Slot kAllSlots[] = {
    Slot::PrimaryType, Slot::PrimaryStart, Slot::PrimaryEnd,
    Slot::StopBeforeType, Slot::StopBeforeStart, Slot::StopBeforeDuration,
    Slot::StopAfterType, Slot::StopAfterStart, Slot::StopAfterDuration,
    Slot::SubTourType, Slot::SubTourStart, Slot::SubTourDuration,
    Slot::SecondaryType, Slot::SecondaryStart, Slot::SecondaryDuration,
};

inline std::string_view to_string(Slot s) {
  switch (s) {
    case Slot::PrimaryType: return "primary_type";
    case Slot::PrimaryStart: return "primary_start";
    case Slot::PrimaryEnd: return "primary_end";
    case Slot::StopBeforeType: return "stop_before_type";
    case Slot::StopBeforeStart: return "stop_before_start";
    case Slot::StopBeforeDuration: return "stop_before_duration";
    case Slot::StopAfterType: return "stop_after_type";
    case Slot::StopAfterStart: return "stop_after_start";
    case Slot::StopAfterDuration: return "stop_after_duration";
    case Slot::SubTourType: return "sub_tour_type";
    case Slot::SubTourStart: return "sub_tour_start";
    case Slot::SubTourDuration: return "sub_tour_duration";
    case Slot::SecondaryType: return "secondary_type";
    case Slot::SecondaryStart: return "secondary_start";
    case Slot::SecondaryDuration: return "secondary_duration";
  }
  return "?";
}

inline Slot slot_from_string(std::string_view s) {
  for (Slot slot : kAllSlots)
    if (to_string(slot) == s) return slot;
  throw Error(ErrorCode::InvalidArgument, "generator", "unknown slot '" + std::string(s) + "'");
}

inline bool is_type_slot(Slot s) {
  return s == Slot::PrimaryType || s == Slot::StopBeforeType || s == Slot::StopAfterType || s == Slot::SubTourType ||
         s == Slot::SecondaryType;
}

/// Outcome classes of a type slot.
inline std::vector<ActivityGroup> slot_classes(Slot s) {
  switch (s) {
    case Slot::PrimaryType: return {ActivityGroup::W, ActivityGroup::M, ActivityGroup::D};
    case Slot::StopBeforeType:
    case Slot::StopAfterType: return {ActivityGroup::ZeroStop, ActivityGroup::M, ActivityGroup::D, ActivityGroup::P};
    case Slot::SubTourType:
    case Slot::SecondaryType: return {ActivityGroup::NoneSubTour, ActivityGroup::M, ActivityGroup::D, ActivityGroup::P};
    default: return {};
  }
}

inline std::size_t class_index(Slot s, ActivityGroup g) {
  const auto classes = slot_classes(s);
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i] == g) return i;
  throw Error(ErrorCode::InvalidArgument, "generator",
              "class " + std::string(to_string(g)) + " is not an outcome of " + std::string(to_string(s)));
}

/// Cascade context columns: generated attributes a slot is conditioned on.
enum class ContextColumn { PrimaryType, PrimaryStart, PrimaryEnd, StopType, TourStart, TourEnd };

inline std::string_view to_string(ContextColumn c) {
  switch (c) {
    case ContextColumn::PrimaryType: return "PrimaryType";
    case ContextColumn::PrimaryStart: return "PrimaryStart";
    case ContextColumn::PrimaryEnd: return "PrimaryEnd";
    case ContextColumn::StopType: return "StopType";
    case ContextColumn::TourStart: return "TourStart";
    case ContextColumn::TourEnd: return "TourEnd";
  }
  return "?";
}

inline std::vector<ContextColumn> slot_context(Slot s) {
  using C = ContextColumn;
  switch (s) {
    case Slot::PrimaryType: return {};
    case Slot::PrimaryStart: return {C::PrimaryType};
    case Slot::PrimaryEnd: return {C::PrimaryType, C::PrimaryStart};
    case Slot::StopBeforeType: return {C::PrimaryType, C::PrimaryStart};
    case Slot::StopBeforeStart:
    case Slot::StopBeforeDuration: return {C::PrimaryType, C::PrimaryStart, C::StopType};
    case Slot::StopAfterType: return {C::PrimaryType, C::PrimaryEnd};
    case Slot::StopAfterStart:
    case Slot::StopAfterDuration: return {C::PrimaryType, C::PrimaryEnd, C::StopType};
    case Slot::SubTourType: return {C::PrimaryType, C::PrimaryStart, C::PrimaryEnd};
    case Slot::SubTourStart:
    case Slot::SubTourDuration: return {C::PrimaryType, C::PrimaryStart, C::PrimaryEnd, C::StopType};
    case Slot::SecondaryType: return {C::PrimaryType, C::TourStart, C::TourEnd};
    case Slot::SecondaryStart:
    case Slot::SecondaryDuration: return {C::PrimaryType, C::TourStart, C::TourEnd, C::StopType};
  }
  return {};
}

/// Values of the context columns known at some point of the cascade.
struct CascadeContext {
  std::optional<ActivityGroup> primary_type;
  std::optional<double> primary_start, primary_end;
  std::optional<ActivityGroup> stop_type;  // the slot's own generated type
  std::optional<double> tour_start, tour_end;
};

/// Person columns (model features) followed by the slot's context columns.
inline FeatureSchema slot_schema(Slot s, UnseenPolicy unseen = UnseenPolicy::ReservedSlot) {
  FeatureSchema schema;
  for (const auto& name : model_feature_columns()) {
    const PersonColumn& col = person_column(name);
    if (col.categorical())
      schema.add_categorical(col.name, col.vocab, unseen);
    else
      schema.add_continuous(col.name, col.min, col.max);
  }
  for (ContextColumn c : slot_context(s)) {
    switch (c) {
      case ContextColumn::PrimaryType: schema.add_categorical("PrimaryType", {"W", "M", "D"}, unseen); break;
      case ContextColumn::StopType: schema.add_categorical("StopType", {"M", "D", "P"}, unseen); break;
      default: schema.add_continuous(std::string(to_string(c)), 0, kMaxEndMinutes); break;
    }
  }
  return schema;
}

inline Row person_row(const PersonRecord& p) {
  Row row;
  for (const auto& name : model_feature_columns()) {
    const PersonColumn& col = person_column(name);
    if (col.categorical())
      row.emplace_back(p.*std::get<std::string PersonRecord::*>(col.field));
    else
      row.emplace_back(p.*std::get<double PersonRecord::*>(col.field));
  }
  return row;
}

/// Feature row of one slot; a missing context value is a cascade bug.
inline Row slot_row(Slot s, const PersonRecord& p, const CascadeContext& ctx) {
  Row row = person_row(p);
  auto need = [&](const auto& v, ContextColumn c) {
    if (!v)
      throw Error(ErrorCode::InvalidArgument, "generator",
                  std::string(to_string(s)) + " needs " + std::string(to_string(c)) + " first");
    return *v;
  };
  for (ContextColumn c : slot_context(s)) {
    switch (c) {
      case ContextColumn::PrimaryType: row.emplace_back(std::string(to_string(need(ctx.primary_type, c)))); break;
      case ContextColumn::PrimaryStart: row.emplace_back(need(ctx.primary_start, c)); break;
      case ContextColumn::PrimaryEnd: row.emplace_back(need(ctx.primary_end, c)); break;
      case ContextColumn::StopType: row.emplace_back(std::string(to_string(need(ctx.stop_type, c)))); break;
      case ContextColumn::TourStart: row.emplace_back(need(ctx.tour_start, c)); break;
      case ContextColumn::TourEnd: row.emplace_back(need(ctx.tour_end, c)); break;
    }
  }
  return row;
}

// ---------------------------------------------------------------------------
// Training examples
// ---------------------------------------------------------------------------

struct SlotExamples {
  std::vector<Row> rows;
  std::vector<std::size_t> labels;  // type slots
  std::vector<double> targets;      // time slots, minutes
  std::vector<std::string> person_ids;
};

/// Examples of every slot for one person, taken from an observed pattern.
inline void add_examples(const PersonRecord& p, const DailyPattern& d, std::map<Slot, SlotExamples>& out) {
  const PrimaryPattern& pp = d.primary_pattern;
  CascadeContext base;
  base.primary_type = pp.primary.group;
  base.primary_start = pp.primary.start;
  base.primary_end = pp.primary.end;
  base.tour_start = pp.tour_start();
  base.tour_end = pp.tour_end();

  auto add_label = [&](Slot s, ActivityGroup g, const CascadeContext& ctx) {
    auto& ex = out[s];
    ex.rows.push_back(slot_row(s, p, ctx));
    ex.labels.push_back(class_index(s, g));
    ex.person_ids.push_back(p.person_id);
  };
  auto add_target = [&](Slot s, double v, const CascadeContext& ctx) {
    auto& ex = out[s];
    ex.rows.push_back(slot_row(s, p, ctx));
    ex.targets.push_back(v);
    ex.person_ids.push_back(p.person_id);
  };
  auto add_episode = [&](const std::optional<Activity>& a, ActivityGroup absent, Slot type, Slot start, Slot dur) {
    add_label(type, a ? a->group : absent, base);
    if (!a) return;
    CascadeContext ctx = base;
    ctx.stop_type = a->group;
    add_target(start, a->start, ctx);
    add_target(dur, a->end - a->start, ctx);
  };

  add_label(Slot::PrimaryType, pp.primary.group, base);
  add_target(Slot::PrimaryStart, pp.primary.start, base);
  add_target(Slot::PrimaryEnd, pp.primary.end, base);
  add_episode(pp.stop_before, ActivityGroup::ZeroStop, Slot::StopBeforeType, Slot::StopBeforeStart,
              Slot::StopBeforeDuration);
  add_episode(pp.stop_after, ActivityGroup::ZeroStop, Slot::StopAfterType, Slot::StopAfterStart,
              Slot::StopAfterDuration);
  if (pp.primary.group == ActivityGroup::W)
    add_episode(pp.sub_tour, ActivityGroup::NoneSubTour, Slot::SubTourType, Slot::SubTourStart, Slot::SubTourDuration);
  std::optional<Activity> first_secondary;
  if (!d.secondary.empty()) first_secondary = d.secondary.front();
  add_episode(first_secondary, ActivityGroup::NoneSubTour, Slot::SecondaryType, Slot::SecondaryStart,
              Slot::SecondaryDuration);
}

// ---------------------------------------------------------------------------
// Trained slot models
// ---------------------------------------------------------------------------

enum class Variant { DL, DLEmb, RF, RFEmb, Constant };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::DL: return "DL";
    case Variant::DLEmb: return "DL&Emb";
    case Variant::RF: return "RF";
    case Variant::RFEmb: return "RF&Emb";
    case Variant::Constant: return "Constant";
  }
  return "?";
}

inline Variant variant_from_string(std::string_view s) {
  for (Variant v : {Variant::DL, Variant::DLEmb, Variant::RF, Variant::RFEmb, Variant::Constant})
    if (to_string(v) == s) return v;
  throw Error(ErrorCode::ConfigError, "generator", "unknown model variant '" + std::string(s) + "'");
}

inline bool uses_embeddings(Variant v) { return v == Variant::DLEmb || v == Variant::RFEmb; }

struct SlotModel {
  Slot slot = Slot::PrimaryType;
  Variant variant = Variant::RF;
  FeatureSchema schema;
  std::size_t n_classes = 0;  // 0 for time slots
  std::optional<NeuralNet> net;
  std::optional<Forest> forest;
  EmbeddingMode forest_embeddings;    // RF&Emb only
  std::vector<double> constant;       // class frequencies, or {mean}
  double residual_sigma = 0.0;        // held-out RMSE of a time slot
  nlohmann::json selection;           // chosen hyperparameters

  bool classification() const { return n_classes > 0; }

  EncoderMode forest_mode() const {
    if (variant == Variant::RFEmb) return forest_embeddings;
    return OneHotMode{};
  }

  /// Class distribution, or {minutes}.
  std::vector<double> predict(const IndexedRow& row) const {
    if (variant == Variant::Constant) return constant;
    if (net) {
      if (classification()) return predict_proba(*net, row);
      return {predict_value(*net, row)};
    }
    std::vector<double> x;
    encode_indexed(row, schema, forest_mode(), x);
    return actgen::predict(*forest, x);
  }

  std::vector<double> predict(const Row& row) const { return predict(index_row(row, schema)); }
};

struct ModelTrainConfig {
  TrainConfig dl;
  std::vector<TrainConfig> dl_grid;  // empty: just `dl`
  ForestConfig rf;
  std::vector<ForestConfig> rf_grid;  // empty: just `rf`
  std::size_t min_examples = 10;      // fewer falls back to a constant model
  double sigma_holdout = 0.2;
  std::uint64_t seed = 1;
};

namespace detail {

inline SlotModel constant_model(Slot s, const FeatureSchema& schema, const SlotExamples& ex) {
  SlotModel m;
  m.slot = s;
  m.variant = Variant::Constant;
  m.schema = schema;
  if (is_type_slot(s)) {
    m.n_classes = slot_classes(s).size();
    m.constant.assign(m.n_classes, 0.0);
    for (auto l : ex.labels) m.constant[l] += 1.0;
    if (ex.labels.empty())
      m.constant[0] = 1.0;
    else
      for (double& v : m.constant) v /= static_cast<double>(ex.labels.size());
  } else {
    double mean = 0.0;
    for (double t : ex.targets) mean += t;
    m.constant = {ex.targets.empty() ? 0.0 : mean / static_cast<double>(ex.targets.size())};
    double ss = 0.0;
    for (double t : ex.targets) ss += (t - m.constant[0]) * (t - m.constant[0]);
    m.residual_sigma = ex.targets.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(ex.targets.size()));
  }
  return m;
}

inline NetDataset net_dataset(const FeatureSchema& schema, const SlotExamples& ex, std::size_t n_classes) {
  NetDataset d;
  d.n_classes = n_classes;
  for (const auto& r : ex.rows) d.rows.push_back(index_row(r, schema));
  d.labels = ex.labels;
  d.targets = ex.targets;
  return d;
}

inline ForestDataset forest_dataset(const FeatureSchema& schema, const EncoderMode& mode, const SlotExamples& ex,
                                    std::size_t n_classes) {
  ForestDataset d;
  d.n_classes = n_classes;
  d.n_features = encoded_width(schema, mode);
  const auto layout = encoded_layout(schema, mode);
  for (std::size_t c = 0; c < layout.size(); ++c) d.groups.insert(d.groups.end(), layout[c].width, c);
  std::vector<double> x;
  for (const auto& r : ex.rows) {
    encode_indexed(index_row(r, schema), schema, mode, x);
    d.push(x);
  }
  d.labels = ex.labels;
  d.targets = ex.targets;
  return d;
}

inline SlotExamples subset_examples(const SlotExamples& ex, const std::vector<std::size_t>& idx) {
  SlotExamples out;
  for (std::size_t i : idx) {
    out.rows.push_back(ex.rows[i]);
    if (!ex.labels.empty()) out.labels.push_back(ex.labels[i]);
    if (!ex.targets.empty()) out.targets.push_back(ex.targets[i]);
    out.person_ids.push_back(ex.person_ids[i]);
  }
  return out;
}

}  // namespace detail

/// Fits one slot model. RF&Emb needs the DL&Emb model of the same slot as
/// the source of its embedding tables.
inline SlotModel fit_slot_model_once(Slot s, Variant v, const SlotExamples& ex, const ModelTrainConfig& cfg,
                                     const SlotModel* embedding_source) {
  FeatureSchema schema = slot_schema(s);
  schema.fit_statistics(ex.rows);
  const std::size_t n_classes = is_type_slot(s) ? slot_classes(s).size() : 0;
  if (ex.rows.size() < cfg.min_examples || v == Variant::Constant) return detail::constant_model(s, schema, ex);

  SlotModel m;
  m.slot = s;
  m.variant = v;
  m.schema = schema;
  m.n_classes = n_classes;
  const std::uint64_t seed = derive_seed(cfg.seed, fnv1a(to_string(s)) ^ fnv1a(to_string(v)));

  if (v == Variant::DL || v == Variant::DLEmb) {
    const NetDataset data = detail::net_dataset(schema, ex, n_classes);
    std::vector<TrainConfig> grid = cfg.dl_grid.empty() ? std::vector<TrainConfig>{cfg.dl} : cfg.dl_grid;
    for (auto& g : grid) g.seed = seed;
    TrainConfig chosen = grid.front();
    if (grid.size() > 1) chosen = grid[grid_search_dl(schema, v == Variant::DLEmb, data, grid, 0.2, seed).best];
    m.net = fit_net(schema, v == Variant::DLEmb, data, chosen).net;
    m.selection = train_config_to_json(chosen);
  } else {
    if (v == Variant::RFEmb) {
      if (!embedding_source || !embedding_source->net)
        throw Error(ErrorCode::ModelMissing, "random-forest",
                    std::string(to_string(s)) + ": RF&Emb needs a trained DL&Emb model");
      m.forest_embeddings = transfer_embeddings(*embedding_source->net, schema);
    }
    const ForestDataset data = detail::forest_dataset(schema, m.forest_mode(), ex, n_classes);
    ForestConfig base = cfg.rf;
    base.task = n_classes ? ForestTask::Classification : ForestTask::Regression;
    base.seed = seed;
    std::vector<ForestConfig> grid;
    if (cfg.rf_grid.empty()) {
      grid.push_back(base);
    } else {
      for (auto g : cfg.rf_grid) {
        g.task = base.task;
        g.seed = seed;
        grid.push_back(g);
      }
    }
    ForestConfig chosen = grid.front();
    if (grid.size() > 1 && data.size() >= 5) chosen = grid[grid_search_rf(data, grid, 5, seed).best];
    m.forest = fit_forest(data, chosen);
    m.selection = forest_config_to_json(chosen);
  }
  return m;
}

/// Fits a slot model; time slots also get a residual sigma measured on a
/// seeded held-out part before the final fit on all examples.
inline SlotModel fit_slot_model(Slot s, Variant v, const SlotExamples& ex, const ModelTrainConfig& cfg,
                                const SlotModel* embedding_source = nullptr) {
  SlotModel m = fit_slot_model_once(s, v, ex, cfg, embedding_source);
  if (m.classification() || m.variant == Variant::Constant) return m;
  auto [train_idx, hold_idx] = holdout_split(ex.rows.size(), cfg.sigma_holdout, derive_seed(cfg.seed, 0x7369676dULL));
  if (hold_idx.empty() || train_idx.size() < cfg.min_examples) {
    m.residual_sigma = 0.0;
    return m;
  }
  const SlotExamples part = detail::subset_examples(ex, train_idx);
  const SlotModel probe = fit_slot_model_once(s, v, part, cfg, embedding_source);
  std::vector<double> pred, target;
  for (std::size_t i : hold_idx) {
    pred.push_back(probe.predict(ex.rows[i]).front());
    target.push_back(ex.targets[i]);
  }
  m.residual_sigma = rmse(pred, target);
  return m;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

inline nlohmann::json slot_model_to_json(const SlotModel& m) {
  nlohmann::json j{{"slot", to_string(m.slot)},
                   {"variant", to_string(m.variant)},
                   {"schema", schema_to_json(m.schema)},
                   {"n_classes", m.n_classes},
                   {"constant", m.constant},
                   {"residual_sigma", m.residual_sigma},
                   {"selection", m.selection}};
  if (m.net) j["net"] = net_to_json(*m.net);
  if (m.forest) j["forest"] = forest_to_json(*m.forest);
  if (m.variant == Variant::RFEmb) {
    nlohmann::json tables = nlohmann::json::array();
    for (const auto& t : m.forest_embeddings.tables) tables.push_back(embedding_to_json(t));
    j["forest_embeddings"] = std::move(tables);
  }
  return j;
}

inline SlotModel slot_model_from_json(const nlohmann::json& j) {
  SlotModel m;
  m.slot = slot_from_string(j.at("slot").get<std::string>());
  m.variant = variant_from_string(j.at("variant").get<std::string>());
  m.schema = schema_from_json(j.at("schema"));
  m.n_classes = j.at("n_classes");
  m.constant = j.at("constant").get<std::vector<double>>();
  m.residual_sigma = j.at("residual_sigma");
  m.selection = j.at("selection");
  if (j.contains("net")) m.net = net_from_json(j.at("net"));
  if (j.contains("forest")) m.forest = forest_from_json(j.at("forest"));
  if (j.contains("forest_embeddings"))
    for (const auto& t : j.at("forest_embeddings")) m.forest_embeddings.tables.push_back(embedding_from_json(t));
  return m;
}

}  // namespace actgen
