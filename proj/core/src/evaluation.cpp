#include "stpen/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <tuple>

#include "stpen/errors.hpp"

namespace stpen {
namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string signed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.4f", v);
  return buf;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::vector<const PredictionRecord*> rank_records(const std::vector<PredictionRecord>& records,
                                                  std::size_t class_index) {
  if (class_index >= kNumBehaviors) throw ArgumentError("class index " + std::to_string(class_index) + " out of range");
  if (records.empty()) throw EmptyEvalError("no prediction records");
  std::vector<const PredictionRecord*> ranked;
  std::size_t positives = 0;
  for (const auto& r : records) {
    if (r.targets.size() != kNumBehaviors || r.scores.size() != kNumBehaviors) {
      throw ArgumentError("record " + r.video_id + "@" + std::to_string(r.timestamp_s) + "#" +
                          std::to_string(r.actor_id) + " lacks " + std::to_string(kNumBehaviors) +
                          " scores and targets");
    }
    positives += r.targets[class_index] == 1;
    ranked.push_back(&r);
  }
  if (positives == 0) throw UndefinedClassError(class_index);
  std::sort(ranked.begin(), ranked.end(), [class_index](const PredictionRecord* a, const PredictionRecord* b) {
    if (a->scores[class_index] != b->scores[class_index]) return a->scores[class_index] > b->scores[class_index];
    return std::tie(a->video_id, a->timestamp_s, a->actor_id) < std::tie(b->video_id, b->timestamp_s, b->actor_id);
  });
  return ranked;
}

std::vector<PrPoint> pr_points(const std::vector<PredictionRecord>& records, std::size_t class_index) {
  const auto ranked = rank_records(records, class_index);
  std::size_t total_pos = 0;
  for (const auto* r : ranked) total_pos += r->targets[class_index] == 1;
  std::vector<PrPoint> points;
  std::size_t tp = 0;
  for (std::size_t j = 0; j < ranked.size(); ++j) {
    tp += ranked[j]->targets[class_index] == 1;
    points.push_back({static_cast<double>(tp) / static_cast<double>(j + 1),
                      static_cast<double>(tp) / static_cast<double>(total_pos)});
  }
  return points;
}

double average_precision(const std::vector<PredictionRecord>& records, std::size_t class_index, bool interpolated) {
  std::vector<PrPoint> points = pr_points(records, class_index);
  if (interpolated) {
    for (std::size_t j = points.size() - 1; j-- > 0;) {
      points[j].precision = std::max(points[j].precision, points[j + 1].precision);
    }
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (const auto& p : points) {
    ap += (p.recall - prev_recall) * p.precision;
    prev_recall = p.recall;
  }
  return ap;
}

std::size_t EvalReport::defined_classes() const {
  return static_cast<std::size_t>(std::count_if(ap.begin(), ap.end(), [](const auto& a) { return a.has_value(); }));
}

std::string EvalReport::note() const {
  std::string excluded;
  for (std::size_t k = 0; k < kNumBehaviors; ++k) {
    if (ap[k]) continue;
    if (!excluded.empty()) excluded += ", ";
    excluded += behavior_name(static_cast<int>(k));
  }
  if (excluded.empty()) return "";
  return "mAP averages " + std::to_string(defined_classes()) + " of " + std::to_string(kNumBehaviors) +
         " classes; no positives for: " + excluded;
}

double mean_of(const std::vector<double>& aps) {
  if (aps.empty()) throw EmptyEvalError("no defined classes to average");
  double sum = 0.0;
  for (double a : aps) sum += a;
  return sum / static_cast<double>(aps.size());
}

EvalReport mean_ap(const std::vector<PredictionRecord>& records, bool interpolated) {
  if (records.empty()) throw EmptyEvalError("no prediction records to evaluate");
  EvalReport report;
  report.records = records.size();
  std::vector<double> defined;
  for (std::size_t k = 0; k < kNumBehaviors; ++k) {
    for (const auto& r : records) {
      if (k < r.targets.size()) report.positives[k] += r.targets[k] == 1;
    }
    try {
      report.ap[k] = average_precision(records, k, interpolated);
      defined.push_back(*report.ap[k]);
    } catch (const UndefinedClassError&) {
      report.ap[k] = std::nullopt;
    }
  }
  if (defined.empty()) throw EmptyEvalError("no class has positive records");
  report.map = mean_of(defined);
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "class_id,behavior,ap,positives\n";
  for (std::size_t k = 0; k < kNumBehaviors; ++k) {
    out << k << "," << behavior_name(static_cast<int>(k)) << "," << (report.ap[k] ? fixed4(*report.ap[k]) : "")
        << "," << report.positives[k] << "\n";
  }
  out << ",mAP," << fixed4(report.map) << "," << report.records << "\n";
  return out.str();
}

std::string report_text(const EvalReport& report) {
  std::ostringstream out;
  out << pad_right("behavior", 16) << pad_left("AP", 8) << pad_left("positives", 11) << "\n";
  for (std::size_t k = 0; k < kNumBehaviors; ++k) {
    out << pad_right(behavior_name(static_cast<int>(k)), 16)
        << pad_left(report.ap[k] ? fixed4(*report.ap[k]) : "-", 8)
        << pad_left(std::to_string(report.positives[k]), 11) << "\n";
  }
  out << pad_right("mAP", 16) << pad_left(fixed4(report.map), 8) << pad_left(std::to_string(report.records), 11)
      << "\n";
  if (const std::string n = report.note(); !n.empty()) out << "note: " << n << "\n";
  return out.str();
}

AblationTable ablation_report(const std::vector<AblationRun>& runs) {
  if (runs.empty()) throw EmptyEvalError("ablation report needs at least one run");
  for (std::size_t i = 0; i < runs.size(); ++i)
    for (std::size_t j = i + 1; j < runs.size(); ++j)
      if (runs[i].toggles == runs[j].toggles) {
        throw DuplicateConfigError("configuration '" + runs[i].toggles.name() + "' appears twice");
      }

  std::vector<const AblationRun*> order;
  const AblationRun* full = nullptr;
  for (const auto& r : runs) {
    if (r.toggles == ModuleToggles{}) full = &r;
  }
  if (full) order.push_back(full);
  for (const auto& r : runs) {
    if (&r != full) order.push_back(&r);
  }

  AblationTable t;
  for (std::size_t k = 0; k < kNumBehaviors; ++k) t.rows.push_back(behavior_name(static_cast<int>(k)));
  t.rows.push_back("mAP");
  for (const auto* r : order) t.columns.push_back(r->toggles.name());
  t.values.assign(t.rows.size(), std::vector<std::optional<double>>(order.size()));
  for (std::size_t c = 0; c < order.size(); ++c) {
    for (std::size_t k = 0; k < kNumBehaviors; ++k) t.values[k][c] = order[c]->report.ap[k];
    t.values[kNumBehaviors][c] = order[c]->report.map;
  }
  if (full) {
    t.deltas = t.values;
    for (std::size_t row = 0; row < t.rows.size(); ++row)
      for (std::size_t c = 0; c < order.size(); ++c) {
        const auto& base = t.values[row][0];
        const auto& v = t.values[row][c];
        t.deltas[row][c] = base && v ? std::optional<double>(*v - *base) : std::nullopt;
      }
  }
  return t;
}

std::string ablation_csv(const AblationTable& t) {
  std::ostringstream out;
  out << "behavior";
  for (const auto& c : t.columns) out << "," << c;
  if (!t.deltas.empty())
    for (std::size_t c = 1; c < t.columns.size(); ++c) out << ",delta_" << t.columns[c];
  out << "\n";
  for (std::size_t row = 0; row < t.rows.size(); ++row) {
    out << t.rows[row];
    for (const auto& v : t.values[row]) out << "," << (v ? fixed4(*v) : "");
    if (!t.deltas.empty())
      for (std::size_t c = 1; c < t.columns.size(); ++c) {
        const auto& d = t.deltas[row][c];
        out << "," << (d ? signed4(*d) : "");
      }
    out << "\n";
  }
  return out.str();
}

std::string ablation_text(const AblationTable& t) {
  std::vector<std::vector<std::string>> cells(t.rows.size(), std::vector<std::string>(t.columns.size()));
  for (std::size_t row = 0; row < t.rows.size(); ++row)
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const auto& v = t.values[row][c];
      std::string s = v ? fixed4(*v) : "-";
      if (!t.deltas.empty() && c > 0 && t.deltas[row][c]) s += " (" + signed4(*t.deltas[row][c]) + ")";
      cells[row][c] = s;
    }
  std::size_t label_w = 8;
  for (const auto& r : t.rows) label_w = std::max(label_w, r.size());
  std::vector<std::size_t> widths(t.columns.size());
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    widths[c] = t.columns[c].size();
    for (const auto& row : cells) widths[c] = std::max(widths[c], row[c].size());
  }
  std::ostringstream out;
  out << pad_right("behavior", label_w);
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << "  " << pad_left(t.columns[c], widths[c]);
  out << "\n";
  for (std::size_t row = 0; row < t.rows.size(); ++row) {
    out << pad_right(t.rows[row], label_w);
    for (std::size_t c = 0; c < t.columns.size(); ++c) out << "  " << pad_left(cells[row][c], widths[c]);
    out << "\n";
  }
  return out.str();
}

std::vector<ModuleToggles> ablation_configs() {
  std::vector<ModuleToggles> out{ModuleToggles{}};
  for (int off = 0; off < 4; ++off) {
    ModuleToggles t;
    bool* flags[4] = {&t.fl_sam, &t.kmfem, &t.cl_sam, &t.mfem};
    *flags[off] = false;
    out.push_back(t);
  }
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      ModuleToggles t{false, false, false, false};
      bool* flags[4] = {&t.fl_sam, &t.kmfem, &t.cl_sam, &t.mfem};
      *flags[a] = true;
      *flags[b] = true;
      out.push_back(t);
    }
  return out;
}

}  // namespace stpen
