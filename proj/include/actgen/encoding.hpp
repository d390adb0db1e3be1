#pragma once

// Declarative feature schemas and the two categorical encodings: one-hot
// and entity embedding. Continuous columns are standardized with statistics
// frozen from the training split.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "actgen/error.hpp"

namespace actgen {

/// Width of an entity embedding for a categorical variable with n values:
/// ceil((n + 1) / 2).
inline std::size_t embedding_dim(std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "encoding", "cardinality must be >= 1");
  return (n + 2) / 2;
}

enum class ColumnKind { Categorical, Continuous };

/// What happens to a category that is not in the vocabulary.
/// ReservedSlot appends one "UNK" slot to the column.
enum class UnseenPolicy { Reject, ReservedSlot };

struct FeatureColumn {
  std::string name;
  ColumnKind kind = ColumnKind::Continuous;
  std::vector<std::string> vocab;
  UnseenPolicy unseen = UnseenPolicy::ReservedSlot;
  double min = 0.0, max = 0.0;
  double mean = 0.0, scale = 1.0;

  bool categorical() const { return kind == ColumnKind::Categorical; }
  std::size_t cardinality() const { return vocab.size(); }
  /// Distinct encoded categories including the UNK slot.
  std::size_t slots() const { return vocab.size() + (unseen == UnseenPolicy::ReservedSlot ? 1 : 0); }

  std::optional<std::size_t> vocab_index(const std::string& value) const {
    auto it = std::find(vocab.begin(), vocab.end(), value);
    if (it == vocab.end()) return std::nullopt;
    return static_cast<std::size_t>(it - vocab.begin());
  }

  friend bool operator==(const FeatureColumn&, const FeatureColumn&) = default;
};

/// A cell is missing, a category label, or a real value.
using Cell = std::variant<std::monostate, std::string, double>;
using Row = std::vector<Cell>;

class FeatureSchema {
 public:
  FeatureSchema& add_categorical(std::string name, std::vector<std::string> vocab,
                                 UnseenPolicy unseen = UnseenPolicy::ReservedSlot) {
    std::vector<std::string> dedup;
    for (auto& v : vocab)
      if (std::find(dedup.begin(), dedup.end(), v) == dedup.end()) dedup.push_back(std::move(v));
    FeatureColumn c;
    c.name = std::move(name);
    c.kind = ColumnKind::Categorical;
    c.vocab = std::move(dedup);
    c.unseen = unseen;
    columns_.push_back(std::move(c));
    return *this;
  }

  FeatureSchema& add_continuous(std::string name, double min, double max) {
    FeatureColumn c;
    c.name = std::move(name);
    c.kind = ColumnKind::Continuous;
    c.min = min;
    c.max = max;
    columns_.push_back(std::move(c));
    return *this;
  }

  const std::vector<FeatureColumn>& columns() const { return columns_; }
  std::vector<FeatureColumn>& columns() { return columns_; }
  std::size_t size() const { return columns_.size(); }

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i].name == name) return i;
    return std::nullopt;
  }

  std::size_t categorical_count() const {
    return static_cast<std::size_t>(std::count_if(columns_.begin(), columns_.end(), [](auto& c) { return c.categorical(); }));
  }
  std::size_t continuous_count() const { return columns_.size() - categorical_count(); }

  /// Freezes mean and scale of continuous columns from training rows.
  void fit_statistics(const std::vector<Row>& rows) {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      auto& col = columns_[c];
      if (col.categorical()) continue;
      double sum = 0.0, sumsq = 0.0;
      std::size_t n = 0;
      for (const auto& r : rows) {
        if (const double* v = std::get_if<double>(&r.at(c))) {
          sum += *v;
          ++n;
        }
      }
      col.mean = n ? sum / static_cast<double>(n) : 0.0;
      for (const auto& r : rows)
        if (const double* v = std::get_if<double>(&r.at(c))) sumsq += (*v - col.mean) * (*v - col.mean);
      const double sd = n > 1 ? std::sqrt(sumsq / static_cast<double>(n)) : 0.0;
      col.scale = sd > 1e-12 ? sd : 1.0;
    }
  }

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;

 private:
  std::vector<FeatureColumn> columns_;
};

/// Schema row with categories resolved to slot indices and continuous
/// values standardized. This is what the networks consume.
struct IndexedRow {
  std::vector<std::size_t> categories;  // one per categorical column, schema order
  std::vector<double> continuous;       // one per continuous column, schema order
};

inline std::size_t category_slot(const FeatureColumn& col, const Cell& cell) {
  if (std::holds_alternative<std::monostate>(cell)) {
    if (col.unseen == UnseenPolicy::ReservedSlot) return col.vocab.size();
    throw Error(ErrorCode::MissingValue, "encoding", "missing value for " + col.name);
  }
  const std::string* label = std::get_if<std::string>(&cell);
  if (!label) throw Error(ErrorCode::SchemaMismatch, "encoding", "column " + col.name + " expects a category");
  if (auto i = col.vocab_index(*label)) return *i;
  if (col.unseen == UnseenPolicy::ReservedSlot) return col.vocab.size();
  throw Error(ErrorCode::UnseenCategory, "encoding", "'" + *label + "' not in vocabulary of " + col.name);
}

inline double standardized_value(const FeatureColumn& col, const Cell& cell) {
  if (std::holds_alternative<std::monostate>(cell)) {
    if (col.unseen == UnseenPolicy::ReservedSlot) return 0.0;  // imputed at the training mean
    throw Error(ErrorCode::MissingValue, "encoding", "missing value for " + col.name);
  }
  const double* v = std::get_if<double>(&cell);
  if (!v) throw Error(ErrorCode::SchemaMismatch, "encoding", "column " + col.name + " expects a number");
  return (*v - col.mean) / col.scale;
}

inline IndexedRow index_row(const Row& row, const FeatureSchema& schema) {
  if (row.size() != schema.size())
    throw Error(ErrorCode::SchemaMismatch, "encoding",
                "row has " + std::to_string(row.size()) + " cells, schema " + std::to_string(schema.size()));
  IndexedRow out;
  for (std::size_t c = 0; c < row.size(); ++c) {
    const auto& col = schema.columns()[c];
    if (col.categorical())
      out.categories.push_back(category_slot(col, row[c]));
    else
      out.continuous.push_back(standardized_value(col, row[c]));
  }
  return out;
}

/// Indicator vector of length |vocab| with a single one.
inline std::vector<double> one_hot(const std::string& value, const std::vector<std::string>& vocab) {
  auto it = std::find(vocab.begin(), vocab.end(), value);
  if (it == vocab.end()) throw Error(ErrorCode::UnseenCategory, "encoding", "'" + value + "' not in vocabulary");
  std::vector<double> out(vocab.size(), 0.0);
  out[static_cast<std::size_t>(it - vocab.begin())] = 1.0;
  return out;
}

/// One-hot over a column's slots, honouring its unseen-category policy.
inline std::vector<double> one_hot(const Cell& cell, const FeatureColumn& col) {
  std::vector<double> out(col.slots(), 0.0);
  out[category_slot(col, cell)] = 1.0;
  return out;
}

/// Row-major (rows x dim) lookup table for one categorical column.
struct EmbeddingTable {
  std::string column;
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  const double* row(std::size_t i) const { return values.data() + i * dim; }
  double* row(std::size_t i) { return values.data() + i * dim; }

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;
};

struct OneHotMode {};
/// One table per categorical column, in schema order.
struct EmbeddingMode {
  std::vector<EmbeddingTable> tables;
};
using EncoderMode = std::variant<OneHotMode, EmbeddingMode>;

struct ColumnSpan {
  std::string column;
  std::size_t offset = 0;
  std::size_t width = 0;
};

struct FeatureVector {
  std::vector<double> values;
  std::vector<ColumnSpan> provenance;
};

inline std::size_t column_width(const FeatureColumn& col, const EncoderMode& mode, std::size_t cat_index) {
  if (!col.categorical()) return 1;
  if (const auto* emb = std::get_if<EmbeddingMode>(&mode)) return emb->tables.at(cat_index).dim;
  return col.slots();
}

/// Column provenance of the dense encoding, without encoding any row.
inline std::vector<ColumnSpan> encoded_layout(const FeatureSchema& schema, const EncoderMode& mode) {
  std::vector<ColumnSpan> spans;
  std::size_t offset = 0, cat = 0;
  for (const auto& col : schema.columns()) {
    const std::size_t w = column_width(col, mode, cat);
    if (col.categorical()) ++cat;
    spans.push_back({col.name, offset, w});
    offset += w;
  }
  return spans;
}

inline std::size_t encoded_width(const FeatureSchema& schema, const EncoderMode& mode) {
  auto spans = encoded_layout(schema, mode);
  return spans.empty() ? 0 : spans.back().offset + spans.back().width;
}

/// Dense encoding from an already indexed row.
inline void encode_indexed(const IndexedRow& row, const FeatureSchema& schema, const EncoderMode& mode,
                           std::vector<double>& out) {
  out.clear();
  const auto* emb = std::get_if<EmbeddingMode>(&mode);
  std::size_t cat = 0, cont = 0;
  for (const auto& col : schema.columns()) {
    if (col.categorical()) {
      const std::size_t slot = row.categories[cat];
      if (emb) {
        const EmbeddingTable& t = emb->tables.at(cat);
        if (slot >= t.rows)
          throw Error(ErrorCode::SchemaMismatch, "encoding", "embedding table for " + col.name + " too small");
        out.insert(out.end(), t.row(slot), t.row(slot) + t.dim);
      } else {
        const std::size_t begin = out.size();
        out.resize(begin + col.slots(), 0.0);
        out[begin + slot] = 1.0;
      }
      ++cat;
    } else {
      out.push_back(row.continuous[cont++]);
    }
  }
}

/// Concatenation of per-column encodings in schema order.
inline FeatureVector encode_row(const Row& row, const FeatureSchema& schema, const EncoderMode& mode) {
  if (const auto* emb = std::get_if<EmbeddingMode>(&mode)) {
    if (emb->tables.size() != schema.categorical_count())
      throw Error(ErrorCode::SchemaMismatch, "encoding", "embedding tables do not match the schema");
  }
  FeatureVector fv;
  encode_indexed(index_row(row, schema), schema, mode, fv.values);
  fv.provenance = encoded_layout(schema, mode);
  return fv;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json schema_to_json(const FeatureSchema& schema) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : schema.columns()) {
    nlohmann::json j{{"name", c.name}};
    if (c.categorical()) {
      j["kind"] = "categorical";
      j["vocab"] = c.vocab;
      j["unseen"] = c.unseen == UnseenPolicy::Reject ? "reject" : "reserved_slot";
    } else {
      j["kind"] = "continuous";
      j["min"] = c.min;
      j["max"] = c.max;
      j["mean"] = c.mean;
      j["scale"] = c.scale;
    }
    cols.push_back(std::move(j));
  }
  return {{"columns", std::move(cols)}};
}

inline FeatureSchema schema_from_json(const nlohmann::json& j) {
  FeatureSchema schema;
  for (const auto& c : j.at("columns")) {
    if (c.at("kind") == "categorical") {
      schema.add_categorical(c.at("name"), c.at("vocab").get<std::vector<std::string>>(),
                             c.value("unseen", "reserved_slot") == "reject" ? UnseenPolicy::Reject
                                                                          : UnseenPolicy::ReservedSlot);
    } else {
      schema.add_continuous(c.at("name"), c.at("min"), c.at("max"));
      schema.columns().back().mean = c.at("mean");
      schema.columns().back().scale = c.at("scale");
    }
  }
  return schema;
}

inline nlohmann::json embedding_to_json(const EmbeddingTable& t) {
  return {{"column", t.column}, {"rows", t.rows}, {"dim", t.dim}, {"values", t.values}};
}

inline EmbeddingTable embedding_from_json(const nlohmann::json& j) {
  EmbeddingTable t;
  t.column = j.at("column");
  t.rows = j.at("rows");
  t.dim = j.at("dim");
  t.values = j.at("values").get<std::vector<double>>();
  return t;
}

}  // namespace actgen
