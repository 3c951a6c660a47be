#include "ncomp/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ncomp {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void hard_sigmoid_inplace(VectorXd& v) {
  v.array() = (0.2 * v.array() + 0.5).cwiseMax(0.0).cwiseMin(1.0);
}

// Scratch vectors reused across timesteps.
struct GruWork {
  VectorXd r, z, c, rh, vx_r, vx_z, vx_h;

  explicit GruWork(Index units) : r(units), z(units), c(units), rh(units),
                                  vx_r(units), vx_z(units), vx_h(units) {}
};

// Advances h by one step given precomputed input contributions
// vx_* = v_* x + b_*.
void gru_core(const GruParams& p, GruWork& w, VectorXd& h) {
  w.r.noalias() = p.u_r * h;
  w.r += w.vx_r;
  hard_sigmoid_inplace(w.r);

  w.z.noalias() = p.u_z * h;
  w.z += w.vx_z;
  hard_sigmoid_inplace(w.z);

  w.rh.array() = w.r.array() * h.array();
  w.c.noalias() = p.u_h * w.rh;
  w.c += w.vx_h;
  w.c.array() = w.c.array().tanh();

  h.array() = w.z.array() * h.array() + (1.0 - w.z.array()) * w.c.array();
}

struct GruTraceCols {
  MatrixXd* r = nullptr;
  MatrixXd* z = nullptr;
  MatrixXd* c = nullptr;
};

void record_step(const GruTraceCols& tr, const GruWork& w, Index t) {
  if (tr.r != nullptr) {
    tr.r->col(t) = w.r;
    tr.z->col(t) = w.z;
    tr.c->col(t) = w.c;
  }
}

// Branch GRU over a one-hot id sequence; the input-side product reduces to
// picking a column of v. With use_input false the input vector is zero (tag
// ablation), leaving only bias and recurrent contributions.
MatrixXd run_gru_onehot(const GruParams& p, std::span<const std::uint8_t> ids, bool use_input,
                        const GruTraceCols& tr = {}) {
  const Index units = p.units();
  const Index steps = static_cast<Index>(ids.size());
  MatrixXd states(units, steps);
  GruWork w(units);
  VectorXd h = VectorXd::Zero(units);
  for (Index t = 0; t < steps; ++t) {
    if (use_input) {
      w.vx_r = p.v_r.col(ids[t]) + p.b_r;
      w.vx_z = p.v_z.col(ids[t]) + p.b_z;
      w.vx_h = p.v_h.col(ids[t]) + p.b_h;
    } else {
      w.vx_r = p.b_r;
      w.vx_z = p.b_z;
      w.vx_h = p.b_h;
    }
    gru_core(p, w, h);
    states.col(t) = h;
    record_step(tr, w, t);
  }
  return states;
}

// GRU over dense input columns (one timestep per column of xs).
MatrixXd run_gru_dense(const GruParams& p, const MatrixXd& xs, const GruTraceCols& tr = {}) {
  const Index units = p.units();
  const Index steps = xs.cols();
  MatrixXd states(units, steps);
  GruWork w(units);
  VectorXd h = VectorXd::Zero(units);
  for (Index t = 0; t < steps; ++t) {
    w.vx_r.noalias() = p.v_r * xs.col(t);
    w.vx_r += p.b_r;
    w.vx_z.noalias() = p.v_z * xs.col(t);
    w.vx_z += p.b_z;
    w.vx_h.noalias() = p.v_h * xs.col(t);
    w.vx_h += p.b_h;
    gru_core(p, w, h);
    states.col(t) = h;
    record_step(tr, w, t);
  }
  return states;
}

void check_window_inputs(const ModelConfig& cfg, std::span<const std::uint8_t> chars,
                         std::span<const std::uint8_t> tags) {
  if (chars.size() != cfg.window) {
    throw std::invalid_argument("forward: expected " + std::to_string(cfg.window) +
                                " context bytes, got " + std::to_string(chars.size()));
  }
  if (tags.size() != cfg.window) {
    throw std::invalid_argument("forward: expected " + std::to_string(cfg.window) +
                                " tag ids, got " + std::to_string(tags.size()));
  }
  for (std::size_t t = 0; t < tags.size(); ++t) {
    if (tags[t] >= cfg.tag_alphabet) {
      throw std::invalid_argument("forward: tag id " + std::to_string(tags[t]) +
                                  " at position " + std::to_string(t) + " out of range");
    }
  }
}

MatrixXd draw_mask(Index units, Index steps, double rho, Rng& rng) {
  MatrixXd mask(units, steps);
  const double scale = 1.0 / (1.0 - rho);
  for (Index t = 0; t < steps; ++t) {
    for (Index j = 0; j < units; ++j) {
      mask(j, t) = rng.next_unit() < rho ? 0.0 : scale;
    }
  }
  return mask;
}

Pmf forward_impl(const NetworkParams& params, std::span<const std::uint8_t> chars,
                 std::span<const std::uint8_t> tags, PosMode pos, RunMode mode,
                 const MatrixXd* char_mask, const MatrixXd* pos_mask, ForwardTrace* trace) {
  const ModelConfig& cfg = params.config;
  check_window_inputs(cfg, chars, tags);
  const Index steps = static_cast<Index>(cfg.window);
  const Index uc = static_cast<Index>(cfg.char_gru_units);
  const Index up = static_cast<Index>(cfg.pos_gru_units);

  GruTraceCols char_tr, pos_tr, merged_tr;
  if (trace != nullptr) {
    trace->chars.assign(chars.begin(), chars.end());
    trace->tags.assign(tags.begin(), tags.end());
    trace->pos_mode = pos;
    trace->char_r.resize(uc, steps);
    trace->char_z.resize(uc, steps);
    trace->char_c.resize(uc, steps);
    trace->pos_r.resize(up, steps);
    trace->pos_z.resize(up, steps);
    trace->pos_c.resize(up, steps);
    char_tr = {&trace->char_r, &trace->char_z, &trace->char_c};
    pos_tr = {&trace->pos_r, &trace->pos_z, &trace->pos_c};
  }

  MatrixXd char_states = run_gru_onehot(params.char_gru, chars, true, char_tr);
  MatrixXd pos_states = run_gru_onehot(params.pos_gru, tags, pos == PosMode::enabled, pos_tr);

  // Merged-GRU input: dropout-masked branch outputs, char block on top.
  MatrixXd merged_in(uc + up, steps);
  if (mode == RunMode::train) {
    merged_in.topRows(uc) = char_states.cwiseProduct(*char_mask);
    merged_in.bottomRows(up) = pos_states.cwiseProduct(*pos_mask);
  } else {
    merged_in.topRows(uc) = char_states;
    merged_in.bottomRows(up) = pos_states;
  }

  if (trace != nullptr) {
    const Index um = static_cast<Index>(cfg.merged_gru_units);
    trace->merged_r.resize(um, steps);
    trace->merged_z.resize(um, steps);
    trace->merged_c.resize(um, steps);
    merged_tr = {&trace->merged_r, &trace->merged_z, &trace->merged_c};
  }
  MatrixXd merged_states = run_gru_dense(params.merged_gru, merged_in, merged_tr);

  const VectorXd y1 = dense_relu(params.dense1, merged_states.col(steps - 1));
  Pmf pmf = dense_softmax(params.dense2, y1);

  if (trace != nullptr) {
    trace->char_h = std::move(char_states);
    trace->pos_h = std::move(pos_states);
    trace->char_mask = *char_mask;
    trace->pos_mask = *pos_mask;
    trace->merged_h = std::move(merged_states);
    trace->dense1_out = y1;
    trace->pmf = pmf;
  }
  return pmf;
}

}  // namespace

void ModelConfig::validate() const {
  if (window < 1) throw std::invalid_argument("ModelConfig: window must be >= 1");
  if (char_alphabet != kAlphabetSize) {
    throw std::invalid_argument("ModelConfig: char alphabet must be 256");
  }
  if (tag_alphabet != kTagAlphabetSize) {
    throw std::invalid_argument("ModelConfig: tag alphabet must be 49");
  }
  if (char_gru_units < 1 || pos_gru_units < 1 || merged_gru_units < 1 || dense1_units < 1) {
    throw std::invalid_argument("ModelConfig: all unit counts must be >= 1");
  }
  if (!(dropout_rho >= 0.0 && dropout_rho < 1.0)) {
    throw std::invalid_argument("ModelConfig: dropout fraction must lie in [0, 1)");
  }
}

Eigen::MatrixXd one_hot_chars(std::span<const std::uint8_t> bytes, std::size_t window) {
  if (bytes.size() != window) {
    throw std::invalid_argument("one_hot_chars: expected " + std::to_string(window) +
                                " bytes, got " + std::to_string(bytes.size()));
  }
  MatrixXd m = MatrixXd::Zero(static_cast<Index>(window), kAlphabetSize);
  for (std::size_t t = 0; t < bytes.size(); ++t) {
    m(static_cast<Index>(t), bytes[t]) = 1.0;
  }
  return m;
}

Eigen::MatrixXd one_hot_tags(std::span<const std::uint8_t> tags, std::size_t window,
                             PosMode mode) {
  if (tags.size() != window) {
    throw std::invalid_argument("one_hot_tags: expected " + std::to_string(window) +
                                " tag ids, got " + std::to_string(tags.size()));
  }
  MatrixXd m = MatrixXd::Zero(static_cast<Index>(window), kTagAlphabetSize);
  for (std::size_t t = 0; t < tags.size(); ++t) {
    if (tags[t] >= kTagAlphabetSize) {
      throw std::invalid_argument("one_hot_tags: tag id " + std::to_string(tags[t]) +
                                  " out of range");
    }
    if (mode == PosMode::enabled) {
      m(static_cast<Index>(t), tags[t]) = 1.0;
    }
  }
  return m;
}

Eigen::VectorXd gru_step(const GruParams& p, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& h_prev) {
  if (x.size() != p.input_dim() || h_prev.size() != p.units()) {
    throw std::invalid_argument("gru_step: shape mismatch");
  }
  GruWork w(p.units());
  w.vx_r.noalias() = p.v_r * x;
  w.vx_r += p.b_r;
  w.vx_z.noalias() = p.v_z * x;
  w.vx_z += p.b_z;
  w.vx_h.noalias() = p.v_h * x;
  w.vx_h += p.b_h;
  VectorXd h = h_prev;
  gru_core(p, w, h);
  return h;
}

Eigen::MatrixXd gru_sequence(const GruParams& p, const Eigen::MatrixXd& xs,
                             bool return_sequence) {
  if (xs.rows() < 1) {
    throw std::invalid_argument("gru_sequence: empty sequence");
  }
  if (xs.cols() != p.input_dim()) {
    throw std::invalid_argument("gru_sequence: input width mismatch");
  }
  const MatrixXd states = run_gru_dense(p, xs.transpose());
  if (return_sequence) {
    return states.transpose();
  }
  return states.col(states.cols() - 1).transpose();
}

DropoutResult dropout_apply(const Eigen::VectorXd& v, double rho, Rng& rng, bool training) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw std::invalid_argument("dropout_apply: fraction must lie in [0, 1)");
  }
  DropoutResult out;
  if (!training || rho == 0.0) {
    out.value = v;
    out.mask = VectorXd::Ones(v.size());
    return out;
  }
  out.mask.resize(v.size());
  const double scale = 1.0 / (1.0 - rho);
  for (Index j = 0; j < v.size(); ++j) {
    out.mask[j] = rng.next_unit() < rho ? 0.0 : scale;
  }
  out.value = v.cwiseProduct(out.mask);
  return out;
}

Eigen::MatrixXd merge_concat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("merge_concat: timestep counts differ");
  }
  MatrixXd out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

Eigen::VectorXd dense_relu(const DenseParams& p, const Eigen::VectorXd& x) {
  if (x.size() != p.w.cols()) {
    throw std::invalid_argument("dense_relu: input width mismatch");
  }
  if (!x.allFinite()) {
    throw std::invalid_argument("dense_relu: non-finite input");
  }
  VectorXd y = p.w * x + p.theta;
  y.array() = y.array().cwiseMax(0.0);
  return y;
}

Eigen::VectorXd dense_softmax(const DenseParams& p, const Eigen::VectorXd& x) {
  if (x.size() != p.w.cols()) {
    throw std::invalid_argument("dense_softmax: input width mismatch");
  }
  if (!x.allFinite()) {
    throw std::invalid_argument("dense_softmax: non-finite input");
  }
  VectorXd logits = p.w * x + p.theta;
  logits.array() -= logits.maxCoeff();
  VectorXd e = logits.array().exp();
  return e / e.sum();
}

NetworkParams init_params(const ModelConfig& config) {
  config.validate();
  NetworkParams params;
  params.config = config;

  const Index uc = static_cast<Index>(config.char_gru_units);
  const Index up = static_cast<Index>(config.pos_gru_units);
  const Index um = static_cast<Index>(config.merged_gru_units);
  const Index d1 = static_cast<Index>(config.dense1_units);

  auto size_gru = [](GruParams& g, Index units, Index input_dim) {
    g.v_r.resize(units, input_dim);
    g.v_z.resize(units, input_dim);
    g.v_h.resize(units, input_dim);
    g.u_r.resize(units, units);
    g.u_z.resize(units, units);
    g.u_h.resize(units, units);
    g.b_r.resize(units);
    g.b_z.resize(units);
    g.b_h.resize(units);
  };
  size_gru(params.char_gru, uc, kAlphabetSize);
  size_gru(params.pos_gru, up, kTagAlphabetSize);
  size_gru(params.merged_gru, um, uc + up);
  params.dense1.w.resize(d1, um);
  params.dense1.theta.resize(d1);
  params.dense2.w.resize(kAlphabetSize, d1);
  params.dense2.theta.resize(kAlphabetSize);

  Rng rng(config.seed);
  for_each_tensor(
      [&rng](auto& tensor) {
        using T = std::decay_t<decltype(tensor)>;
        if constexpr (T::ColsAtCompileTime == 1) {
          tensor.setZero();
        } else {
          const double limit = std::sqrt(6.0 / static_cast<double>(tensor.rows() + tensor.cols()));
          for (Index c = 0; c < tensor.cols(); ++c) {
            for (Index r = 0; r < tensor.rows(); ++r) {
              tensor(r, c) = rng.next_symmetric(limit);
            }
          }
        }
      },
      params);
  return params;
}

TensorBundle zeros_like(const NetworkParams& params) {
  TensorBundle out;
  for_each_tensor([](auto& dst, const auto& src) { dst.setZero(src.rows(), src.cols()); }, out,
                  params);
  return out;
}

Pmf forward_infer(const NetworkParams& params, std::span<const std::uint8_t> chars,
                  std::span<const std::uint8_t> tags, PosMode pos) {
  return forward_impl(params, chars, tags, pos, RunMode::infer, nullptr, nullptr, nullptr);
}

Pmf forward_train(const NetworkParams& params, std::span<const std::uint8_t> chars,
                  std::span<const std::uint8_t> tags, PosMode pos, Rng& rng,
                  ForwardTrace& trace) {
  const Index steps = static_cast<Index>(params.config.window);
  const MatrixXd char_mask =
      draw_mask(static_cast<Index>(params.config.char_gru_units), steps,
                params.config.dropout_rho, rng);
  const MatrixXd pos_mask =
      draw_mask(static_cast<Index>(params.config.pos_gru_units), steps,
                params.config.dropout_rho, rng);
  return forward_impl(params, chars, tags, pos, RunMode::train, &char_mask, &pos_mask, &trace);
}

Pmf forward_train_with_masks(const NetworkParams& params, std::span<const std::uint8_t> chars,
                             std::span<const std::uint8_t> tags, PosMode pos,
                             const Eigen::MatrixXd& char_mask, const Eigen::MatrixXd& pos_mask,
                             ForwardTrace& trace) {
  const Index steps = static_cast<Index>(params.config.window);
  if (char_mask.rows() != static_cast<Index>(params.config.char_gru_units) ||
      char_mask.cols() != steps ||
      pos_mask.rows() != static_cast<Index>(params.config.pos_gru_units) ||
      pos_mask.cols() != steps) {
    throw std::invalid_argument("forward_train_with_masks: mask shape mismatch");
  }
  return forward_impl(params, chars, tags, pos, RunMode::train, &char_mask, &pos_mask, &trace);
}

}  // namespace ncomp
