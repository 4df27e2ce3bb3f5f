#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "stpen/model.hpp"
#include "stpen/model_config.hpp"
#include "stpen/vocab.hpp"

namespace stpen {

struct PrPoint {
  double precision = 0.0;
  double recall = 0.0;
  friend bool operator==(const PrPoint&, const PrPoint&) = default;
};

/// Records ranked by descending score of `class_index`; ties by
/// (video_id, timestamp, actor_id). Throws UndefinedClassError when the class
/// has no positives and ArgumentError when a record lacks targets.
std::vector<const PredictionRecord*> rank_records(const std::vector<PredictionRecord>& records,
                                                  std::size_t class_index);

/// (P(j), R(j)) for the top-j records, j = 1..n.
std::vector<PrPoint> pr_points(const std::vector<PredictionRecord>& records, std::size_t class_index);

/// sum_j (R(j) - R(j-1)) P(j) with R(0) = 0. With `interpolated`, P(j) is
/// replaced by max_{k >= j} P(k).
double average_precision(const std::vector<PredictionRecord>& records, std::size_t class_index,
                         bool interpolated = false);

struct EvalReport {
  std::array<std::optional<double>, kNumBehaviors> ap{};  // nullopt: no positives
  std::array<std::size_t, kNumBehaviors> positives{};
  double map = 0.0;
  std::size_t records = 0;

  std::size_t defined_classes() const;
  /// Human-readable note listing classes excluded from the mean.
  std::string note() const;
};

/// Mean of APs over classes with positives. Throws EmptyEvalError when there
/// are no records or no class is defined.
EvalReport mean_ap(const std::vector<PredictionRecord>& records, bool interpolated = false);
/// Mean of the given APs (no record bookkeeping).
double mean_of(const std::vector<double>& aps);

std::string report_csv(const EvalReport& report);
std::string report_text(const EvalReport& report);

struct AblationRun {
  ModuleToggles toggles;
  EvalReport report;
};

struct AblationTable {
  std::vector<std::string> columns;  // configuration names, full model first when present
  std::vector<std::string> rows;     // behaviors then "mAP"
  /// values[row][col]; nullopt for undefined classes.
  std::vector<std::vector<std::optional<double>>> values;
  /// values minus the full-model column; empty when no full run exists.
  std::vector<std::vector<std::optional<double>>> deltas;
};

/// Throws DuplicateConfigError when two runs share a toggle vector.
AblationTable ablation_report(const std::vector<AblationRun>& runs);
std::string ablation_csv(const AblationTable& table);
std::string ablation_text(const AblationTable& table);

/// Full model, four single-module removals, six pairwise combinations.
std::vector<ModuleToggles> ablation_configs();

}  // namespace stpen
