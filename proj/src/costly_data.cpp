#include "lifelong/costly_data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lifelong {

ProbeLedger::ProbeLedger(std::size_t examples, std::size_t features)
    : examples_(examples),
      features_(features),
      probed_(examples * features, false),
      per_example_(examples, 0) {}

bool ProbeLedger::record(std::size_t example, std::size_t feature) {
  if (example >= examples_ || feature >= features_) throw UsageError("ledger index out of range");
  std::vector<bool>::reference cell = probed_[example * features_ + feature];
  if (cell) return false;
  cell = true;
  ++per_example_[example];
  ++total_;
  return true;
}

bool ProbeLedger::contains(std::size_t example, std::size_t feature) const {
  if (example >= examples_ || feature >= features_) throw UsageError("ledger index out of range");
  return probed_[example * features_ + feature];
}

std::size_t ProbeLedger::max_per_example() const {
  if (per_example_.empty()) return 0;
  return *std::max_element(per_example_.begin(), per_example_.end());
}

GridDataset::GridDataset(std::size_t n_features, std::uint64_t denominator,
                         std::vector<std::uint64_t> cells, std::vector<Rational> labels)
    : CostlyDataset(n_features, std::move(cells), std::move(labels)), denominator_(denominator) {
  if (denominator_ == 0) throw UsageError("grid denominator must be positive");
}

Rational GridDataset::probe_value(std::size_t example, std::size_t feature) {
  std::uint64_t num = probe(example, feature);
  Rational q(BigInt(std::to_string(num)), BigInt(std::to_string(denominator_)));
  q.canonicalize();
  return q;
}

double GridDataset::probe_log2(std::size_t example, std::size_t feature) {
  std::uint64_t num = probe(example, feature);
  return std::log2(static_cast<long double>(num) / static_cast<long double>(denominator_));
}

EvaluationReport make_report(const std::vector<ProbeCounts>& per_task,
                             const std::vector<bool>& scratch_flags,
                             const std::vector<bool>& good_flags) {
  if (per_task.size() != scratch_flags.size() || per_task.size() != good_flags.size())
    throw UsageError("report inputs have different lengths");
  EvaluationReport r;
  for (std::size_t j = 0; j < per_task.size(); ++j) {
    r.per_task.push_back({j, per_task[j].total, scratch_flags[j], per_task[j].per_example_max});
    r.total_probes += per_task[j].total;
    if (good_flags[j]) r.probes_on_good_targets += per_task[j].total;
    if (scratch_flags[j]) ++r.scratch_count;
  }
  return r;
}

nlohmann::json to_json(const BoolDataset& ds) {
  nlohmann::json examples = nlohmann::json::array();
  const auto& cells = ds.unmetered_cells();
  for (std::size_t e = 0; e < ds.num_examples(); ++e) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t i = 0; i < ds.num_features(); ++i)
      row.push_back(static_cast<int>(cells[e * ds.num_features() + i]));
    examples.push_back(std::move(row));
  }
  nlohmann::json labels = nlohmann::json::array();
  for (bool l : ds.labels()) labels.push_back(l ? "+" : "-");
  return {{"n_features", ds.num_features()},
          {"examples", std::move(examples)},
          {"labels", std::move(labels)},
          {"value_kind", "bool"}};
}

nlohmann::json to_json(const GridDataset& ds) {
  nlohmann::json examples = nlohmann::json::array();
  const auto& cells = ds.unmetered_cells();
  BigInt den(std::to_string(ds.denominator()));
  for (std::size_t e = 0; e < ds.num_examples(); ++e) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t i = 0; i < ds.num_features(); ++i) {
      Rational q(BigInt(std::to_string(cells[e * ds.num_features() + i])), den);
      q.canonicalize();
      row.push_back(to_string(q));
    }
    examples.push_back(std::move(row));
  }
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& l : ds.labels()) labels.push_back(to_string(l));
  return {{"n_features", ds.num_features()},
          {"examples", std::move(examples)},
          {"labels", std::move(labels)},
          {"value_kind", "rational"}};
}

namespace {

void check_kind(const nlohmann::json& j, const char* kind) {
  if (!j.is_object() || !j.contains("value_kind") || j.at("value_kind") != kind)
    throw UsageError(std::string("dataset JSON must have value_kind \"") + kind + "\"");
}

}  // namespace

BoolDataset bool_dataset_from_json(const nlohmann::json& j) {
  check_kind(j, "bool");
  std::size_t n = j.at("n_features").get<std::size_t>();
  std::vector<std::uint8_t> cells;
  for (const auto& row : j.at("examples")) {
    if (row.size() != n) throw UsageError("dataset row has wrong length");
    for (const auto& v : row) {
      int x = v.is_boolean() ? static_cast<int>(v.get<bool>()) : v.get<int>();
      if (x != 0 && x != 1) throw UsageError("bool feature must be 0 or 1");
      cells.push_back(static_cast<std::uint8_t>(x));
    }
  }
  std::vector<bool> labels;
  for (const auto& l : j.at("labels")) {
    std::string s = l.get<std::string>();
    if (s != "+" && s != "-") throw UsageError("bool label must be \"+\" or \"-\"");
    labels.push_back(s == "+");
  }
  return BoolDataset(n, std::move(cells), std::move(labels));
}

GridDataset grid_dataset_from_json(const nlohmann::json& j) {
  check_kind(j, "rational");
  std::size_t n = j.at("n_features").get<std::size_t>();
  std::vector<Rational> values;
  BigInt common = 1;
  for (const auto& row : j.at("examples")) {
    if (row.size() != n) throw UsageError("dataset row has wrong length");
    for (const auto& v : row) {
      Rational q = parse_rational(v.get<std::string>());
      if (sgn(q) <= 0) throw UsageError("rational feature must be positive");
      mpz_lcm(common.get_mpz_t(), common.get_mpz_t(), q.get_den_mpz_t());
      values.push_back(std::move(q));
    }
  }
  if (!common.fits_ulong_p()) throw UsageError("grid denominator exceeds 64 bits");
  std::vector<std::uint64_t> cells;
  cells.reserve(values.size());
  for (const auto& q : values) {
    BigInt num = q.get_num() * (common / q.get_den());
    if (!num.fits_ulong_p()) throw UsageError("grid numerator exceeds 64 bits");
    cells.push_back(num.get_ui());
  }
  std::vector<Rational> labels;
  for (const auto& l : j.at("labels")) labels.push_back(parse_rational(l.get<std::string>()));
  return GridDataset(n, common.get_ui(), std::move(cells), std::move(labels));
}

}  // namespace lifelong
