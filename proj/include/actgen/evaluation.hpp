#pragma once

// Classification and regression metrics, time-of-day histograms with a 1-D
// earth mover's distance, and the train/validation report tables.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "actgen/csv.hpp"
#include "actgen/error.hpp"
#include "actgen/schedule.hpp"

namespace actgen {

struct BinaryCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
};

inline double accuracy(const BinaryCounts& c) {
  if (c.total() == 0) throw Error(ErrorCode::EmptyEvaluation, "evaluation", "no predictions to score");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

/// TP / (TP + (FP + FN) / 2).
inline double f1_score(const BinaryCounts& c) {
  if (c.tp + c.fp + c.fn == 0) throw Error(ErrorCode::UndefinedF1, "evaluation", "TP = FP = FN = 0");
  return static_cast<double>(c.tp) / (static_cast<double>(c.tp) + 0.5 * static_cast<double>(c.fp + c.fn));
}

/// Harmonic mean of precision and recall; 0 when TP = 0.
inline double f1_precision_recall(const BinaryCounts& c) {
  if (c.tp + c.fp + c.fn == 0) throw Error(ErrorCode::UndefinedF1, "evaluation", "TP = FP = FN = 0");
  if (c.tp == 0) return 0.0;
  const double precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return 2.0 * (precision * recall) / (precision + recall);
}

/// k x k confusion matrix, rows = true class, columns = predicted class.
struct ConfusionCounts {
  std::size_t k = 0;
  std::vector<std::size_t> matrix;

  explicit ConfusionCounts(std::size_t classes = 0) : k(classes), matrix(classes * classes, 0) {}

  static ConfusionCounts from_pairs(std::span<const std::size_t> predicted, std::span<const std::size_t> truth,
                                    std::size_t classes) {
    if (predicted.size() != truth.size())
      throw Error(ErrorCode::LengthMismatch, "evaluation", "prediction and label counts differ");
    ConfusionCounts c(classes);
    for (std::size_t i = 0; i < truth.size(); ++i) c.add(truth[i], predicted[i]);
    return c;
  }

  void add(std::size_t truth, std::size_t predicted) {
    if (truth >= k || predicted >= k) throw Error(ErrorCode::InvalidArgument, "evaluation", "class index out of range");
    ++matrix[truth * k + predicted];
  }
  std::size_t at(std::size_t truth, std::size_t predicted) const { return matrix[truth * k + predicted]; }
  std::size_t total() const {
    std::size_t s = 0;
    for (auto v : matrix) s += v;
    return s;
  }
  std::size_t support(std::size_t cls) const {
    std::size_t s = 0;
    for (std::size_t j = 0; j < k; ++j) s += at(cls, j);
    return s;
  }
  /// One-vs-rest counts for `cls`.
  BinaryCounts binary(std::size_t cls) const {
    BinaryCounts b;
    for (std::size_t t = 0; t < k; ++t)
      for (std::size_t p = 0; p < k; ++p) {
        const std::size_t v = at(t, p);
        if (t == cls && p == cls) b.tp += v;
        else if (p == cls) b.fp += v;
        else if (t == cls) b.fn += v;
        else b.tn += v;
      }
    return b;
  }
};

/// Trace over total.
inline double accuracy(const ConfusionCounts& c) {
  const std::size_t total = c.total();
  if (total == 0) throw Error(ErrorCode::EmptyEvaluation, "evaluation", "no predictions to score");
  std::size_t trace = 0;
  for (std::size_t i = 0; i < c.k; ++i) trace += c.at(i, i);
  return static_cast<double>(trace) / static_cast<double>(total);
}

/// Support-weighted one-vs-rest F1; classes with zero support are skipped.
inline double f1_score(const ConfusionCounts& c) {
  const std::size_t total = c.total();
  if (total == 0) throw Error(ErrorCode::EmptyEvaluation, "evaluation", "no predictions to score");
  double acc = 0.0;
  for (std::size_t cls = 0; cls < c.k; ++cls) {
    const std::size_t support = c.support(cls);
    if (support == 0) continue;
    acc += static_cast<double>(support) * f1_score(c.binary(cls));
  }
  return acc / static_cast<double>(total);
}

inline double rmse(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size())
    throw Error(ErrorCode::LengthMismatch, "evaluation",
                std::to_string(pred.size()) + " predictions for " + std::to_string(target.size()) + " targets");
  if (pred.empty()) throw Error(ErrorCode::EmptyEvaluation, "evaluation", "no predictions to score");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (target[i] - pred[i]) * (target[i] - pred[i]);
  return std::sqrt(s / static_cast<double>(pred.size()));
}

inline double rmse(const std::vector<double>& pred, const std::vector<double>& target) {
  return rmse(std::span<const double>(pred), std::span<const double>(target));
}

// ---------------------------------------------------------------------------
// Time histograms
// ---------------------------------------------------------------------------

inline constexpr double kDefaultBinWidth = 30.0;

struct TimeHistogram {
  double bin_width = kDefaultBinWidth;
  std::vector<double> counts;  // left-closed bins over [0, kMaxEndMinutes)
  bool normalized = false;

  std::size_t argmax() const {
    return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  }
};

inline TimeHistogram time_histogram(std::span<const double> times, double bin_width = kDefaultBinWidth,
                                    bool normalize = true) {
  if (!(bin_width > 0.0)) throw Error(ErrorCode::InvalidArgument, "evaluation", "bin width must be positive");
  TimeHistogram h;
  h.bin_width = bin_width;
  h.counts.assign(static_cast<std::size_t>(std::ceil(kMaxEndMinutes / bin_width)), 0.0);
  for (double t : times) {
    if (!(t >= 0.0 && t < kMaxEndMinutes))
      throw Error(ErrorCode::OutOfRangeTime, "evaluation", "time " + format_number(t) + " outside [0, 1728)");
    h.counts[static_cast<std::size_t>(std::floor(t / bin_width))] += 1.0;
  }
  if (normalize) {
    const double n = static_cast<double>(times.size());
    if (n > 0)
      for (double& c : h.counts) c /= n;
    h.normalized = true;
  }
  return h;
}

inline TimeHistogram time_histogram(const std::vector<double>& times, double bin_width = kDefaultBinWidth,
                                    bool normalize = true) {
  return time_histogram(std::span<const double>(times), bin_width, normalize);
}

/// 1-D earth mover's distance in bins: sum of |cumulative difference|.
inline double emd(const TimeHistogram& a, const TimeHistogram& b) {
  if (a.bin_width != b.bin_width || a.counts.size() != b.counts.size())
    throw Error(ErrorCode::BinningMismatch, "evaluation", "histograms use different bins");
  if (!a.normalized || !b.normalized)
    throw Error(ErrorCode::BinningMismatch, "evaluation", "histograms must be normalized");
  double cum = 0.0, dist = 0.0;
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    cum += a.counts[i] - b.counts[i];
    dist += std::abs(cum);
  }
  return dist;
}

inline nlohmann::json histogram_to_json(const TimeHistogram& h) {
  return {{"bin_width", h.bin_width}, {"normalized", h.normalized}, {"counts", h.counts}};
}

// ---------------------------------------------------------------------------
// Report tables
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& model_variants() {
  static const std::vector<std::string> v{"DL", "DL&Emb", "RF", "RF&Emb"};
  return v;
}

/// Accuracy and F1 of one split; absent when the split is empty.
struct SplitScore {
  std::optional<double> accuracy, f1;
};

inline SplitScore score_classification(std::span<const std::size_t> predicted, std::span<const std::size_t> truth,
                                       std::size_t classes) {
  if (truth.empty()) return {};
  const auto c = ConfusionCounts::from_pairs(predicted, truth, classes);
  return {accuracy(c), f1_score(c)};
}

struct TypeScoreRow {
  PersonGroup group = PersonGroup::Worker;
  std::string variant;
  SplitScore train, valid;
};

struct TimeScoreRow {
  PersonGroup group = PersonGroup::Worker;
  std::string slot;
  std::string variant;
  std::optional<double> train_rmse, valid_rmse;
};

struct HistogramPair {
  std::string name;
  TimeHistogram observed, generated;
  std::optional<double> distance;
};

struct EvaluationReport {
  std::vector<TypeScoreRow> type_scores;
  std::vector<TimeScoreRow> time_scores;
  std::vector<HistogramPair> histograms;
};

namespace detail {

inline std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }
inline nlohmann::json jcell(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace detail

/// Primary-type scores in the group x variant x split x metric layout.
inline std::string report_csv(const EvaluationReport& r) {
  std::ostringstream out;
  write_csv_row(out, {"group", "variant", "train_accuracy", "train_f1", "valid_accuracy", "valid_f1"});
  for (const auto& row : r.type_scores)
    write_csv_row(out, {std::string(to_string(row.group)), row.variant, detail::cell(row.train.accuracy),
                        detail::cell(row.train.f1), detail::cell(row.valid.accuracy), detail::cell(row.valid.f1)});
  return out.str();
}

inline std::string time_scores_csv(const EvaluationReport& r) {
  std::ostringstream out;
  write_csv_row(out, {"group", "slot", "variant", "train_rmse", "valid_rmse"});
  for (const auto& row : r.time_scores)
    write_csv_row(out, {std::string(to_string(row.group)), row.slot, row.variant, detail::cell(row.train_rmse),
                        detail::cell(row.valid_rmse)});
  return out.str();
}

inline std::string histogram_csv(const HistogramPair& h) {
  std::ostringstream out;
  write_csv_row(out, {"bin_start", "observed", "generated"});
  for (std::size_t i = 0; i < h.observed.counts.size(); ++i)
    write_csv_row(out, {format_number(static_cast<double>(i) * h.observed.bin_width), format_number(h.observed.counts[i]),
                        format_number(h.generated.counts.at(i))});
  return out.str();
}

inline nlohmann::json report_json(const EvaluationReport& r) {
  nlohmann::json types = nlohmann::json::array(), times = nlohmann::json::array(), hists = nlohmann::json::array();
  for (const auto& row : r.type_scores)
    types.push_back({{"group", to_string(row.group)},
                     {"variant", row.variant},
                     {"train", {{"accuracy", detail::jcell(row.train.accuracy)}, {"f1", detail::jcell(row.train.f1)}}},
                     {"valid", {{"accuracy", detail::jcell(row.valid.accuracy)}, {"f1", detail::jcell(row.valid.f1)}}}});
  for (const auto& row : r.time_scores)
    times.push_back({{"group", to_string(row.group)},
                     {"slot", row.slot},
                     {"variant", row.variant},
                     {"train_rmse", detail::jcell(row.train_rmse)},
                     {"valid_rmse", detail::jcell(row.valid_rmse)}});
  for (const auto& h : r.histograms)
    hists.push_back({{"name", h.name},
                     {"observed", histogram_to_json(h.observed)},
                     {"generated", histogram_to_json(h.generated)},
                     {"emd", detail::jcell(h.distance)}});
  return {{"primary_type", std::move(types)}, {"time_models", std::move(times)}, {"histograms", std::move(hists)}};
}

}  // namespace actgen
