#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "lifelong/errors.hpp"
#include "lifelong/rational.hpp"

namespace lifelong {

using Feature = std::uint32_t;

// Which cells of an S x N matrix have been read. Re-reading a cell is free.
class ProbeLedger {
 public:
  ProbeLedger() = default;
  ProbeLedger(std::size_t examples, std::size_t features);

  // Returns true when the cell was not probed before.
  bool record(std::size_t example, std::size_t feature);
  bool contains(std::size_t example, std::size_t feature) const;

  std::size_t total() const { return total_; }
  std::size_t per_example(std::size_t example) const { return per_example_.at(example); }
  std::size_t max_per_example() const;
  const std::vector<std::uint32_t>& per_example_counts() const { return per_example_; }
  std::size_t examples() const { return examples_; }
  std::size_t features() const { return features_; }

 private:
  std::size_t examples_ = 0;
  std::size_t features_ = 0;
  std::vector<bool> probed_;
  std::vector<std::uint32_t> per_example_;
  std::size_t total_ = 0;
};

template <class Value, class Label>
class CostlyDataset {
 public:
  CostlyDataset() = default;
  CostlyDataset(std::size_t n_features, std::vector<Value> cells, std::vector<Label> labels)
      : n_features_(n_features), cells_(std::move(cells)), labels_(std::move(labels)) {
    if (n_features_ == 0) throw UsageError("dataset needs at least one feature");
    if (labels_.empty()) throw UsageError("dataset needs at least one example");
    if (cells_.size() != labels_.size() * n_features_)
      throw UsageError("feature matrix shape does not match label count");
    ledger_ = ProbeLedger(labels_.size(), n_features_);
  }

  std::size_t num_examples() const { return labels_.size(); }
  std::size_t num_features() const { return n_features_; }

  const Value& probe(std::size_t example, std::size_t feature) {
    if (example >= num_examples() || feature >= n_features_)
      throw UsageError("probe index out of range");
    ledger_.record(example, feature);
    return cells_[example * n_features_ + feature];
  }

  struct MatrixView {
    const Value* data;
    std::size_t examples;
    std::size_t features;
    const Value& operator()(std::size_t e, std::size_t i) const { return data[e * features + i]; }
  };

  MatrixView probe_all() {
    for (std::size_t e = 0; e < num_examples(); ++e)
      for (std::size_t i = 0; i < n_features_; ++i) ledger_.record(e, i);
    return MatrixView{cells_.data(), num_examples(), n_features_};
  }

  Label label(std::size_t example) const { return labels_.at(example); }
  const std::vector<Label>& labels() const { return labels_; }
  const ProbeLedger& ledger() const { return ledger_; }

  // Serialization and harness audits only; learners go through probe().
  const std::vector<Value>& unmetered_cells() const { return cells_; }

 protected:
  std::size_t n_features_ = 0;
  std::vector<Value> cells_;
  std::vector<Label> labels_;
  ProbeLedger ledger_;
};

// Boolean features, labels true = "+".
using BoolDataset = CostlyDataset<std::uint8_t, bool>;

// Features on the grid {1 + j/M}; each cell stores the numerator M + j so the
// value is cell / M. Labels are exact target values.
class GridDataset : public CostlyDataset<std::uint64_t, Rational> {
 public:
  GridDataset() = default;
  GridDataset(std::size_t n_features, std::uint64_t denominator, std::vector<std::uint64_t> cells,
              std::vector<Rational> labels);

  std::uint64_t denominator() const { return denominator_; }
  Rational probe_value(std::size_t example, std::size_t feature);
  double probe_log2(std::size_t example, std::size_t feature);

 private:
  std::uint64_t denominator_ = 1;
};

struct ProbeCounts {
  std::size_t total = 0;
  std::size_t per_example_max = 0;
};

inline ProbeCounts counts_of(const ProbeLedger& ledger) {
  return {ledger.total(), ledger.max_per_example()};
}

struct TaskProbeEntry {
  std::size_t task_index = 0;
  std::size_t probes = 0;
  bool learned_from_scratch = false;
  std::size_t per_example_max = 0;
};

struct EvaluationReport {
  std::vector<TaskProbeEntry> per_task;
  std::size_t total_probes = 0;
  std::size_t probes_on_good_targets = 0;
  std::size_t scratch_count = 0;
  std::size_t restart_count = 0;
};

EvaluationReport make_report(const std::vector<ProbeCounts>& per_task,
                             const std::vector<bool>& scratch_flags,
                             const std::vector<bool>& good_flags);

nlohmann::json to_json(const BoolDataset& ds);
nlohmann::json to_json(const GridDataset& ds);
BoolDataset bool_dataset_from_json(const nlohmann::json& j);
GridDataset grid_dataset_from_json(const nlohmann::json& j);

}  // namespace lifelong
