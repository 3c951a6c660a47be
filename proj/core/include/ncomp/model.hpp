#ifndef NCOMP_MODEL_HPP
#define NCOMP_MODEL_HPP

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ncomp/pmf.hpp"
#include "ncomp/rng.hpp"

namespace ncomp {

inline constexpr int kTagAlphabetSize = 49;

// Layer sizes and shared constants of the predictor network. The defaults
// are proportional to the width of each input channel; all sizes are
// configurable and serialized with the model.
struct ModelConfig {
  std::uint32_t window = 40;
  std::uint32_t char_alphabet = kAlphabetSize;
  std::uint32_t tag_alphabet = kTagAlphabetSize;
  std::uint32_t char_gru_units = 128;
  std::uint32_t pos_gru_units = 32;
  std::uint32_t merged_gru_units = 128;
  std::uint32_t dense1_units = 128;
  double dropout_rho = 0.2;
  std::uint64_t seed = 1;

  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

// One gated recurrent unit layer: per-gate input weights v, recurrent
// weights u, and biases b for the reset gate (r), update gate (z), and
// candidate state (h).
struct GruParams {
  Eigen::MatrixXd v_r, v_z, v_h;  // units x input_dim
  Eigen::MatrixXd u_r, u_z, u_h;  // units x units
  Eigen::VectorXd b_r, b_z, b_h;  // units

  Eigen::Index units() const { return u_r.rows(); }
  Eigen::Index input_dim() const { return v_r.cols(); }
};

struct DenseParams {
  Eigen::MatrixXd w;      // out x in
  Eigen::VectorXd theta;  // out
};

// The tensors of the full network, shared by parameters, gradients, and
// optimizer accumulators (all three are shape-congruent).
struct TensorBundle {
  GruParams char_gru;
  GruParams pos_gru;
  GruParams merged_gru;
  DenseParams dense1;
  DenseParams dense2;
};

struct NetworkParams : TensorBundle {
  ModelConfig config;
};

// Applies f to each tensor of one or more shape-congruent bundles, always in
// the same fixed order. This order also defines the model file layout.
template <class F, class... B>
void for_each_tensor(F&& f, B&&... b) {
  f(b.char_gru.v_r...);
  f(b.char_gru.v_z...);
  f(b.char_gru.v_h...);
  f(b.char_gru.u_r...);
  f(b.char_gru.u_z...);
  f(b.char_gru.u_h...);
  f(b.char_gru.b_r...);
  f(b.char_gru.b_z...);
  f(b.char_gru.b_h...);
  f(b.pos_gru.v_r...);
  f(b.pos_gru.v_z...);
  f(b.pos_gru.v_h...);
  f(b.pos_gru.u_r...);
  f(b.pos_gru.u_z...);
  f(b.pos_gru.u_h...);
  f(b.pos_gru.b_r...);
  f(b.pos_gru.b_z...);
  f(b.pos_gru.b_h...);
  f(b.merged_gru.v_r...);
  f(b.merged_gru.v_z...);
  f(b.merged_gru.v_h...);
  f(b.merged_gru.u_r...);
  f(b.merged_gru.u_z...);
  f(b.merged_gru.u_h...);
  f(b.merged_gru.b_r...);
  f(b.merged_gru.b_z...);
  f(b.merged_gru.b_h...);
  f(b.dense1.w...);
  f(b.dense1.theta...);
  f(b.dense2.w...);
  f(b.dense2.theta...);
}

// Tensor names in for_each_tensor order, for diagnostics.
inline constexpr std::array<std::string_view, 31> kTensorNames = {
    "char_gru.v_r",   "char_gru.v_z",   "char_gru.v_h",   "char_gru.u_r",
    "char_gru.u_z",   "char_gru.u_h",   "char_gru.b_r",   "char_gru.b_z",
    "char_gru.b_h",   "pos_gru.v_r",    "pos_gru.v_z",    "pos_gru.v_h",
    "pos_gru.u_r",    "pos_gru.u_z",    "pos_gru.u_h",    "pos_gru.b_r",
    "pos_gru.b_z",    "pos_gru.b_h",    "merged_gru.v_r", "merged_gru.v_z",
    "merged_gru.v_h", "merged_gru.u_r", "merged_gru.u_z", "merged_gru.u_h",
    "merged_gru.b_r", "merged_gru.b_z", "merged_gru.b_h", "dense1.w",
    "dense1.theta",   "dense2.w",       "dense2.theta",
};

// Whether the part-of-speech channel feeds the network or is replaced by a
// zero input vector (the tag ablation mode).
enum class PosMode { enabled, ablated };

enum class RunMode { infer, train };

// Everything the backward pass needs from one train-mode forward pass.
// Matrices hold one timestep per column.
struct ForwardTrace {
  std::vector<std::uint8_t> chars;
  std::vector<std::uint8_t> tags;
  PosMode pos_mode = PosMode::enabled;

  Eigen::MatrixXd char_h, char_r, char_z, char_c;
  Eigen::MatrixXd pos_h, pos_r, pos_z, pos_c;
  // Dropout masks with the survivor scale baked in: entries are 0 or
  // 1/(1 - rho), so masked value = raw value * mask.
  Eigen::MatrixXd char_mask, pos_mask;
  Eigen::MatrixXd merged_h, merged_r, merged_z, merged_c;
  Eigen::VectorXd dense1_out;
  Pmf pmf;
};

// Piecewise-linear sigmoid used as the GRU gate activation:
// clamp(0.2 x + 0.5, 0, 1).
inline double hard_sigmoid(double x) {
  const double y = 0.2 * x + 0.5;
  return y < 0.0 ? 0.0 : (y > 1.0 ? 1.0 : y);
}

// One-hot encodings. Rows are timesteps. one_hot_tags with PosMode::ablated
// returns the all-zero matrix regardless of the tag values.
Eigen::MatrixXd one_hot_chars(std::span<const std::uint8_t> bytes, std::size_t window);
Eigen::MatrixXd one_hot_tags(std::span<const std::uint8_t> tags, std::size_t window,
                             PosMode mode = PosMode::enabled);

// Single GRU step:
//   r = hs(v_r x + u_r h_prev + b_r)
//   z = hs(v_z x + u_z h_prev + b_z)
//   c = tanh(v_h x + u_h (r . h_prev) + b_h)
//   h = z . h_prev + (1 - z) . c
Eigen::VectorXd gru_step(const GruParams& p, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& h_prev);

// Iterates gru_step over the rows of xs starting from the zero state.
// Returns all T states (T x units) or only the final one (1 x units).
Eigen::MatrixXd gru_sequence(const GruParams& p, const Eigen::MatrixXd& xs,
                             bool return_sequence = true);

struct DropoutResult {
  Eigen::VectorXd value;
  // 0 for dropped entries, 1/(1 - rho) for survivors; all ones in
  // inference mode.
  Eigen::VectorXd mask;
};

DropoutResult dropout_apply(const Eigen::VectorXd& v, double rho, Rng& rng, bool training);

// Per-timestep feature concatenation, a's columns first.
Eigen::MatrixXd merge_concat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

Eigen::VectorXd dense_relu(const DenseParams& p, const Eigen::VectorXd& x);
Eigen::VectorXd dense_softmax(const DenseParams& p, const Eigen::VectorXd& x);

// Fresh network with weights drawn uniformly in +-sqrt(6/(fan_in+fan_out))
// from config.seed and zero biases.
NetworkParams init_params(const ModelConfig& config);

// Bundle of zero tensors shaped like params (gradients, optimizer state).
TensorBundle zeros_like(const NetworkParams& params);

// Full forward pass: both branch GRUs over the whole window, dropout,
// per-timestep concatenation, merged GRU (final state), dense ReLU, dense
// softmax. Inference mode is a pure function of (params, chars, tags).
Pmf forward_infer(const NetworkParams& params, std::span<const std::uint8_t> chars,
                  std::span<const std::uint8_t> tags, PosMode pos = PosMode::enabled);

// Train-mode forward: draws dropout masks from rng (char branch first, then
// pos branch, timestep major) and records the trace needed by backward().
Pmf forward_train(const NetworkParams& params, std::span<const std::uint8_t> chars,
                  std::span<const std::uint8_t> tags, PosMode pos, Rng& rng,
                  ForwardTrace& trace);

// Train-mode forward with caller-supplied masks (units x window, scaled as
// in ForwardTrace). Used by tests that pin specific dropout patterns.
Pmf forward_train_with_masks(const NetworkParams& params, std::span<const std::uint8_t> chars,
                             std::span<const std::uint8_t> tags, PosMode pos,
                             const Eigen::MatrixXd& char_mask, const Eigen::MatrixXd& pos_mask,
                             ForwardTrace& trace);

}  // namespace ncomp

#endif  // NCOMP_MODEL_HPP
