#ifndef NCOMP_TRAINING_HPP
#define NCOMP_TRAINING_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "ncomp/dataset.hpp"
#include "ncomp/model.hpp"

namespace ncomp {

struct TrainingConfig {
  double eta = 0.001;      // learning rate
  double epsilon = 1e-8;   // denominator stabilizer
  std::size_t epochs = 1;
  std::size_t stride = 1;
  std::size_t batch = 1;   // samples per update; gradients are mean-reduced
  std::uint64_t seed = 1;

  void validate() const;
};

// Gradients and the per-weight squared-gradient moving averages share the
// parameter tensor layout.
using Gradients = TensorBundle;
using RmspropState = TensorBundle;

// Per-sample loss: half the cross entropy of the predicted distribution
// against the one-hot target, natural log. A zero probability at the target
// is clamped to 1e-30; *clamped reports whether that happened.
double cross_entropy_loss(const Pmf& pmf, std::uint8_t target, bool* clamped = nullptr);

// Exact reverse-mode gradients of cross_entropy_loss with respect to every
// tensor: back through the softmax and dense layers, the merged GRU's
// timesteps, the concatenation split, the dropout masks, and both branch
// GRUs. trace must come from a train-mode forward on the same params.
Gradients backward(const NetworkParams& params, const ForwardTrace& trace, std::uint8_t target);

// Per weight: E' = 0.9 E + 0.1 g^2;  w' = w - (eta / (sqrt(E') + epsilon)) g.
// Rejects non-finite gradients, naming the offending tensor.
void rmsprop_step(NetworkParams& params, const Gradients& grads, RmspropState& state,
                  const TrainingConfig& cfg);

// Compares every analytic gradient entry against central finite differences
// (C(w+h) - C(w-h)) / 2h and returns the largest relative error, with
// denominators floored at 1e-8. Requires dropout off (rho = 0) so the loss
// is a deterministic function of the weights.
double grad_check(const NetworkParams& params, const WindowSample& sample, double h,
                  PosMode pos = PosMode::enabled);

struct EpochStats {
  std::size_t epoch = 0;   // 1-based
  double mean_loss = 0.0;
  double accuracy = 0.0;   // top-1, from the train-mode forward passes
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> epochs;
  std::size_t clamp_events = 0;  // times a zero target probability was clamped
  bool stopped_early = false;
};

// Called after each epoch; return false to stop training early.
using EpochCallback = std::function<bool(const EpochStats&)>;

// Shuffles the dataset each epoch with an rng seeded from cfg.seed, then for
// each sample runs a train-mode forward, backward, and an rmsprop update
// (mean-reduced over cfg.batch samples when batch > 1). The per-epoch mean
// loss is accumulated in dataset order so it does not depend on the shuffle.
// If log is non-null, writes one tab-separated line per epoch:
// epoch, mean loss, accuracy, wall-clock seconds.
TrainResult train(NetworkParams& params, const std::vector<WindowSample>& dataset,
                  const TrainingConfig& cfg, PosMode pos = PosMode::enabled,
                  std::ostream* log = nullptr, const EpochCallback& callback = {});

// Fraction of samples whose argmax prediction equals the target, in
// inference mode.
double evaluate_accuracy(const NetworkParams& params, const std::vector<WindowSample>& dataset,
                         PosMode pos = PosMode::enabled);

}  // namespace ncomp

#endif  // NCOMP_TRAINING_HPP
