#include "stpen/model.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "stpen/annotation.hpp"
#include "stpen/errors.hpp"
#include "stpen/lstm.hpp"
#include "stpen/ops.hpp"

namespace stpen {

Var cl_sam(const Var& roi_low) { return ops::mul(roi_low, ops::sigmoid(roi_low)); }

Var mfem(const Var& roi_high, const ParamBinding& params, const ModelConfig& cfg) {
  if (roi_high.value().rank() != 4 || roi_high.shape()[1] != cfg.feature_channels()) {
    throw ShapeError("mfem expects [T x " + std::to_string(cfg.feature_channels()) + " x P x P], got " +
                     shape_to_string(roi_high.shape()));
  }
  const Var seq = ops::spatial_max_pool(roi_high);
  if (!cfg.toggles.mfem) return ops::linear(ops::time_mean(seq), params["mfem.proj.w"], params["mfem.proj.b"]);
  const std::size_t hidden = cfg.hidden_size();
  LstmState state{Var::constant(Tensor::zeros({hidden})), Var::constant(Tensor::zeros({hidden}))};
  for (std::size_t t = 0; t < seq.shape()[0]; ++t) {
    state = lstm_step(ops::row(seq, t), state.h, state.c, params, "mfem.lstm");
  }
  return state.h;
}

Var classify(const Var& gated_low, const Var& temporal_vec, const ParamBinding& params) {
  const Var& w = params["head.w"];
  const Var pooled = ops::channel_mean(gated_low);
  if (temporal_vec.value().rank() != 1 || pooled.shape()[0] + temporal_vec.shape()[0] != w.shape()[1]) {
    throw ShapeError("classify: head expects " + std::to_string(w.shape()[1]) + " inputs, got " +
                     std::to_string(pooled.shape()[0]) + " + " + shape_to_string(temporal_vec.shape()));
  }
  return ops::sigmoid(ops::linear(ops::concat(pooled, temporal_vec), w, params["head.b"]));
}

Model::Model(ModelConfig cfg, std::uint64_t seed) : cfg_(cfg), params_(init_params(cfg, seed)) {}

Model::Model(ModelConfig cfg, ParamSet params) : cfg_(cfg), params_(std::move(params)) {
  validate_model_config(cfg_);
  const ParamSet expected = init_params(cfg_, 0);
  for (const auto& [path, value] : expected) {
    if (!params_.contains(path)) throw ConsistencyError("missing parameter '" + path + "'");
    if (params_.get(path).shape() != value.shape()) {
      throw ConsistencyError("parameter '" + path + "' has shape " + shape_to_string(params_.get(path).shape()) +
                             ", config expects " + shape_to_string(value.shape()));
    }
  }
  if (params_.size() != expected.size()) throw ConsistencyError("parameter set has entries the config does not use");
}

ForwardResult Model::forward_graph(const ParamBinding& binding, const DualRateSample& sample,
                                   bool record_gates) const {
  return forward_graph(binding, sample, Var::constant(sample.low), Var::constant(sample.high), record_gates);
}

ForwardResult Model::forward_graph(const ParamBinding& binding, const DualRateSample& sample, const Var& low_clip,
                                   const Var& high_clip, bool record_gates) const {
  const std::string where = sample.video_id + "@" + std::to_string(sample.timestamp_s);
  const char* stage = "low branch";
  ForwardResult result;
  GateMaps* gates = record_gates ? &result.gates : nullptr;
  try {
    const Var low = run_low_branch(low_clip, binding, cfg_, gates);
    stage = "high branch";
    const Var high = run_high_branch(high_clip, binding, cfg_, gates);
    stage = "fusion";
    const Var fused = fuse_branches(low, high);
    stage = "roi crop";
    CropResult crops = crop_actor_features(fused, high, sample.boxes, sample.actor_ids, sample.hidden,
                                           cfg_.branch.roi_size);
    if (!crops.errors.empty()) {
      const auto& e = crops.errors.front();
      throw BoxError(where + ": actor " + std::to_string(e.actor_id) + ": " + e.message);
    }
    stage = "head";
    for (const auto& a : crops.actors) {
      const Var gated = cfg_.toggles.cl_sam ? cl_sam(a.roi_low) : a.roi_low;
      result.actors.push_back({a.actor_index, a.actor_id, classify(gated, mfem(a.roi_high, binding, cfg_), binding)});
    }
  } catch (const BoxError&) {
    throw;
  } catch (const Error& e) {
    throw Error(where + ": " + stage + ": " + e.what());
  }
  return result;
}

std::vector<PredictionRecord> Model::forward(const DualRateSample& sample, GateMaps* gates) const {
  const ParamBinding binding(params_, false);
  ForwardResult r = forward_graph(binding, sample, gates != nullptr);
  std::vector<PredictionRecord> out;
  for (const auto& a : r.actors) {
    PredictionRecord rec{sample.video_id, sample.timestamp_s, a.actor_id,
                         std::vector<double>(a.scores.value().storage()), {}};
    if (a.actor_index < sample.targets.size()) {
      for (double t : sample.targets[a.actor_index].storage()) rec.targets.push_back(t > 0.5 ? 1 : 0);
    }
    out.push_back(std::move(rec));
  }
  if (gates) *gates = std::move(r.gates);
  return out;
}

std::string serialize_records(const std::vector<PredictionRecord>& records) {
  std::ostringstream out;
  char buf[32];
  for (const auto& r : records) {
    out << r.video_id << "," << r.timestamp_s << "," << r.actor_id;
    for (double s : r.scores) {
      std::snprintf(buf, sizeof(buf), ",%.6f", s);
      out << buf;
    }
    for (int t : r.targets) out << "," << t;
    out << "\n";
  }
  return out.str();
}

std::vector<PredictionRecord> parse_records(const std::string& text) {
  std::vector<PredictionRecord> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    const std::size_t k = kNumBehaviors;
    if (fields.size() != 3 + k && fields.size() != 3 + 2 * k) {
      throw ParseError("expected " + std::to_string(3 + k) + " or " + std::to_string(3 + 2 * k) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    PredictionRecord r;
    try {
      r.video_id = fields[0];
      r.timestamp_s = std::stoi(fields[1]);
      r.actor_id = std::stoi(fields[2]);
      for (std::size_t i = 0; i < k; ++i) r.scores.push_back(std::stod(fields[3 + i]));
      if (fields.size() == 3 + 2 * k) {
        for (std::size_t i = 0; i < k; ++i) {
          const int t = std::stoi(fields[3 + k + i]);
          if (t != 0 && t != 1) throw ParseError("target must be 0 or 1", line_no);
          r.targets.push_back(t);
        }
      }
    } catch (const std::logic_error&) {
      throw ParseError("malformed number", line_no);
    }
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw ParseError("gate grid truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 4;
  return v;
}

}  // namespace

void write_gate_grid(const std::filesystem::path& path, const Tensor& gate) {
  std::string bytes;
  put_u32(bytes, static_cast<std::uint32_t>(gate.rank()));
  for (std::size_t d : gate.shape()) put_u32(bytes, static_cast<std::uint32_t>(d));
  for (double v : gate.storage()) put_u32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  write_text_file(path, bytes);
}

Tensor read_gate_grid(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  std::size_t pos = 0;
  const std::uint32_t rank = get_u32(bytes, pos);
  if (rank == 0 || rank > 8) throw ParseError("gate grid has invalid rank " + std::to_string(rank));
  Shape shape;
  for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(get_u32(bytes, pos));
  Tensor t(shape);
  for (auto& v : t.storage()) v = std::bit_cast<float>(get_u32(bytes, pos));
  if (pos != bytes.size()) throw ParseError("gate grid has trailing bytes");
  return t;
}

}  // namespace stpen
