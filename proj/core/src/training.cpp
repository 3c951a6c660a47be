#include "ncomp/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "ncomp/errors.hpp"

namespace ncomp {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Derivative of the piecewise-linear gate activation, recovered from the
// stored gate value: 0.2 strictly inside (0, 1), 0 at the clamped rails.
inline double hs_prime(double gate) { return (gate > 0.0 && gate < 1.0) ? 0.2 : 0.0; }

// Scratch for one reverse GRU timestep.
struct GruGradWork {
  VectorXd g_z, g_c, g_ah, g_rh, g_r, g_az, g_ar, g_hprev, h_prev;

  explicit GruGradWork(Index units)
      : g_z(units), g_c(units), g_ah(units), g_rh(units), g_r(units), g_az(units),
        g_ar(units), g_hprev(units), h_prev(units) {}
};

// Reverse of one gru_core step. g_h holds dL/dh(t) on entry; the bias and
// recurrent-weight gradients are accumulated into gp, and w.g_hprev /
// w.g_ah / w.g_az / w.g_ar are left for the caller (input-side gradients
// depend on the input encoding).
void gru_backward_core(const GruParams& p, GruParams& gp, const VectorXd& g_h,
                       Eigen::Ref<const VectorXd> r, Eigen::Ref<const VectorXd> z,
                       Eigen::Ref<const VectorXd> c, GruGradWork& w) {
  // h(t) = z . h_prev + (1 - z) . c
  w.g_z.array() = g_h.array() * (w.h_prev.array() - c.array());
  w.g_c.array() = g_h.array() * (1.0 - z.array());
  w.g_hprev.array() = g_h.array() * z.array();

  // c = tanh(a_h), a_h = v_h x + u_h (r . h_prev) + b_h
  w.g_ah.array() = w.g_c.array() * (1.0 - c.array().square());
  w.g_rh.array() = r.array() * w.h_prev.array();
  gp.u_h.noalias() += w.g_ah * w.g_rh.transpose();
  gp.b_h += w.g_ah;
  w.g_rh.noalias() = p.u_h.transpose() * w.g_ah;
  w.g_r.array() = w.g_rh.array() * w.h_prev.array();
  w.g_hprev.array() += w.g_rh.array() * r.array();

  // gates through the piecewise-linear activation
  w.g_az.array() = w.g_z.array() * z.array().unaryExpr([](double v) { return hs_prime(v); });
  w.g_ar.array() = w.g_r.array() * r.array().unaryExpr([](double v) { return hs_prime(v); });
  gp.u_z.noalias() += w.g_az * w.h_prev.transpose();
  gp.b_z += w.g_az;
  gp.u_r.noalias() += w.g_ar * w.h_prev.transpose();
  gp.b_r += w.g_ar;
  w.g_hprev.noalias() += p.u_z.transpose() * w.g_az;
  w.g_hprev.noalias() += p.u_r.transpose() * w.g_ar;
}

// BPTT through a branch GRU fed with one-hot ids. ext holds the per-timestep
// gradient arriving from above (already multiplied by the dropout mask).
// With use_input false the forward saw a zero input vector, so the
// input-side weights receive no gradient.
void branch_backward(const GruParams& p, GruParams& gp, const MatrixXd& h, const MatrixXd& r,
                     const MatrixXd& z, const MatrixXd& c, const MatrixXd& ext,
                     std::span<const std::uint8_t> ids, bool use_input) {
  const Index units = p.units();
  GruGradWork w(units);
  VectorXd g_h = VectorXd::Zero(units);
  for (Index t = ext.cols() - 1; t >= 0; --t) {
    g_h += ext.col(t);
    if (t > 0) {
      w.h_prev = h.col(t - 1);
    } else {
      w.h_prev.setZero();
    }
    gru_backward_core(p, gp, g_h, r.col(t), z.col(t), c.col(t), w);
    if (use_input) {
      gp.v_h.col(ids[t]) += w.g_ah;
      gp.v_z.col(ids[t]) += w.g_az;
      gp.v_r.col(ids[t]) += w.g_ar;
    }
    g_h = w.g_hprev;
  }
}

void check_trace(const NetworkParams& params, const ForwardTrace& trace) {
  const ModelConfig& cfg = params.config;
  const Index steps = static_cast<Index>(cfg.window);
  auto ok = [steps](const MatrixXd& m, Index rows) {
    return m.rows() == rows && m.cols() == steps;
  };
  const Index uc = static_cast<Index>(cfg.char_gru_units);
  const Index up = static_cast<Index>(cfg.pos_gru_units);
  const Index um = static_cast<Index>(cfg.merged_gru_units);
  const bool good =
      trace.chars.size() == cfg.window && trace.tags.size() == cfg.window &&
      ok(trace.char_h, uc) && ok(trace.char_r, uc) && ok(trace.char_z, uc) &&
      ok(trace.char_c, uc) && ok(trace.char_mask, uc) && ok(trace.pos_h, up) &&
      ok(trace.pos_r, up) && ok(trace.pos_z, up) && ok(trace.pos_c, up) &&
      ok(trace.pos_mask, up) && ok(trace.merged_h, um) && ok(trace.merged_r, um) &&
      ok(trace.merged_z, um) && ok(trace.merged_c, um) &&
      trace.dense1_out.size() == static_cast<Index>(cfg.dense1_units) &&
      trace.pmf.size() == kAlphabetSize;
  if (!good) {
    throw std::invalid_argument("backward: trace missing or not produced by these params");
  }
}

// Accumulates into g, which must be shape-congruent with params and zeroed.
void backward_into(const NetworkParams& params, const ForwardTrace& trace, std::uint8_t target,
                   Gradients& g) {
  check_trace(params, trace);
  const ModelConfig& cfg = params.config;
  const Index steps = static_cast<Index>(cfg.window);
  const Index uc = static_cast<Index>(cfg.char_gru_units);
  const Index up = static_cast<Index>(cfg.pos_gru_units);
  const Index um = static_cast<Index>(cfg.merged_gru_units);

  // Softmax + cross entropy collapse to 1/2 (pmf - onehot(target)).
  VectorXd g_a2 = 0.5 * trace.pmf;
  g_a2[target] -= 0.5;
  g.dense2.w.noalias() += g_a2 * trace.dense1_out.transpose();
  g.dense2.theta += g_a2;

  VectorXd g_y1 = params.dense2.w.transpose() * g_a2;
  VectorXd g_a1 =
      (g_y1.array() * (trace.dense1_out.array() > 0.0).cast<double>()).matrix();
  g.dense1.w.noalias() += g_a1 * trace.merged_h.col(steps - 1).transpose();
  g.dense1.theta += g_a1;

  // Merged GRU: only the final state feeds the dense head, so the seed
  // gradient enters at t = steps-1 and everything earlier arrives through
  // the recurrence.
  MatrixXd g_x(uc + up, steps);
  {
    GruGradWork w(um);
    VectorXd g_h = params.dense1.w.transpose() * g_a1;
    VectorXd x_t(uc + up);
    for (Index t = steps - 1; t >= 0; --t) {
      if (t > 0) {
        w.h_prev = trace.merged_h.col(t - 1);
      } else {
        w.h_prev.setZero();
      }
      gru_backward_core(params.merged_gru, g.merged_gru, g_h, trace.merged_r.col(t),
                        trace.merged_z.col(t), trace.merged_c.col(t), w);
      x_t.head(uc).array() = trace.char_h.col(t).array() * trace.char_mask.col(t).array();
      x_t.tail(up).array() = trace.pos_h.col(t).array() * trace.pos_mask.col(t).array();
      g.merged_gru.v_h.noalias() += w.g_ah * x_t.transpose();
      g.merged_gru.v_z.noalias() += w.g_az * x_t.transpose();
      g.merged_gru.v_r.noalias() += w.g_ar * x_t.transpose();
      g_x.col(t).noalias() = params.merged_gru.v_h.transpose() * w.g_ah;
      g_x.col(t).noalias() += params.merged_gru.v_z.transpose() * w.g_az;
      g_x.col(t).noalias() += params.merged_gru.v_r.transpose() * w.g_ar;
      g_h = w.g_hprev;
    }
  }

  // Undo the concatenation and the dropout scaling, then run each branch.
  MatrixXd char_ext = g_x.topRows(uc).cwiseProduct(trace.char_mask);
  MatrixXd pos_ext = g_x.bottomRows(up).cwiseProduct(trace.pos_mask);
  branch_backward(params.char_gru, g.char_gru, trace.char_h, trace.char_r, trace.char_z,
                  trace.char_c, char_ext, trace.chars, true);
  branch_backward(params.pos_gru, g.pos_gru, trace.pos_h, trace.pos_r, trace.pos_z,
                  trace.pos_c, pos_ext, trace.tags, trace.pos_mode == PosMode::enabled);
}

}  // namespace

void TrainingConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("TrainingConfig: eta must be positive and finite");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("TrainingConfig: epsilon must be positive and finite");
  }
  if (stride < 1) throw std::invalid_argument("TrainingConfig: stride must be >= 1");
  if (batch < 1) throw std::invalid_argument("TrainingConfig: batch must be >= 1");
}

double cross_entropy_loss(const Pmf& pmf, std::uint8_t target, bool* clamped) {
  if (pmf.size() != kAlphabetSize) {
    throw std::invalid_argument("cross_entropy_loss: pmf must have 256 entries");
  }
  double p = pmf[target];
  const bool clip = !(p >= 1e-30);
  if (clip) p = 1e-30;
  if (clamped != nullptr) *clamped = clip;
  return -0.5 * std::log(p);
}

Gradients backward(const NetworkParams& params, const ForwardTrace& trace,
                   std::uint8_t target) {
  Gradients g = zeros_like(params);
  backward_into(params, trace, target, g);
  return g;
}

void rmsprop_step(NetworkParams& params, const Gradients& grads, RmspropState& state,
                  const TrainingConfig& cfg) {
  std::size_t i = 0;
  for_each_tensor(
      [&](auto& w, const auto& g, auto& e) {
        if (g.rows() != w.rows() || g.cols() != w.cols() || e.rows() != w.rows() ||
            e.cols() != w.cols()) {
          throw std::invalid_argument("rmsprop_step: shape mismatch in " +
                                      std::string(kTensorNames[i]));
        }
        if (!g.allFinite()) {
          throw Error("rmsprop_step: non-finite gradient in " + std::string(kTensorNames[i]));
        }
        e.array() = 0.9 * e.array() + 0.1 * g.array().square();
        w.array() -= cfg.eta * g.array() / (e.array().sqrt() + cfg.epsilon);
        ++i;
      },
      params, grads, state);
}

double grad_check(const NetworkParams& params, const WindowSample& sample, double h,
                  PosMode pos) {
  if (params.config.dropout_rho != 0.0) {
    throw std::invalid_argument("grad_check: requires dropout disabled (rho = 0)");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("grad_check: step size must be positive and finite");
  }
  const Index steps = static_cast<Index>(params.config.window);
  const MatrixXd ones_c =
      MatrixXd::Ones(static_cast<Index>(params.config.char_gru_units), steps);
  const MatrixXd ones_p =
      MatrixXd::Ones(static_cast<Index>(params.config.pos_gru_units), steps);
  ForwardTrace trace;
  forward_train_with_masks(params, sample.context, sample.tags, pos, ones_c, ones_p, trace);
  const Gradients analytic = backward(params, trace, sample.target);

  NetworkParams work = params;
  const auto loss_at = [&work, &sample, pos]() {
    return cross_entropy_loss(forward_infer(work, sample.context, sample.tags, pos),
                              sample.target);
  };
  double max_rel = 0.0;
  for_each_tensor(
      [&](auto& w, const auto& a) {
        for (Index c = 0; c < w.cols(); ++c) {
          for (Index r = 0; r < w.rows(); ++r) {
            const double orig = w(r, c);
            w(r, c) = orig + h;
            const double up = loss_at();
            w(r, c) = orig - h;
            const double down = loss_at();
            w(r, c) = orig;
            const double fd = (up - down) / (2.0 * h);
            const double denom = std::max(1e-8, std::abs(a(r, c)) + std::abs(fd));
            max_rel = std::max(max_rel, std::abs(a(r, c) - fd) / denom);
          }
        }
      },
      work, analytic);
  return max_rel;
}

TrainResult train(NetworkParams& params, const std::vector<WindowSample>& dataset,
                  const TrainingConfig& cfg, PosMode pos, std::ostream* log,
                  const EpochCallback& callback) {
  cfg.validate();
  params.config.validate();
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");

  Rng rng(cfg.seed);
  RmspropState state = zeros_like(params);
  Gradients grads = zeros_like(params);
  Gradients batch_acc;
  if (cfg.batch > 1) batch_acc = zeros_like(params);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Indexed by dataset position so the epoch mean is a sum in canonical
  // order, independent of the shuffle.
  std::vector<double> losses(dataset.size(), 0.0);

  TrainResult result;
  result.epochs.reserve(cfg.epochs);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    rng.shuffle(order);
    std::size_t correct = 0;
    std::size_t in_batch = 0;
    ForwardTrace trace;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const WindowSample& s = dataset[order[k]];
      const Pmf pmf = forward_train(params, s.context, s.tags, pos, rng, trace);
      bool clipped = false;
      losses[order[k]] = cross_entropy_loss(pmf, s.target, &clipped);
      if (clipped) ++result.clamp_events;
      Index arg = 0;
      pmf.maxCoeff(&arg);
      if (arg == static_cast<Index>(s.target)) ++correct;

      for_each_tensor([](auto& t) { t.setZero(); }, grads);
      backward_into(params, trace, s.target, grads);
      if (cfg.batch == 1) {
        rmsprop_step(params, grads, state, cfg);
      } else {
        for_each_tensor([](auto& acc, const auto& g) { acc += g; }, batch_acc, grads);
        ++in_batch;
        if (in_batch == cfg.batch || k + 1 == order.size()) {
          const double inv = 1.0 / static_cast<double>(in_batch);
          for_each_tensor([inv](auto& acc) { acc *= inv; }, batch_acc);
          rmsprop_step(params, batch_acc, state, cfg);
          for_each_tensor([](auto& acc) { acc.setZero(); }, batch_acc);
          in_batch = 0;
        }
      }
    }
    double sum = 0.0;
    for (double l : losses) sum += l;
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EpochStats st;
    st.epoch = epoch;
    st.mean_loss = sum / static_cast<double>(dataset.size());
    st.accuracy = static_cast<double>(correct) / static_cast<double>(dataset.size());
    st.seconds = seconds;
    result.epochs.push_back(st);
    if (log != nullptr) {
      char line[128];
      std::snprintf(line, sizeof(line), "%zu\t%.6f\t%.6f\t%.3f\n", st.epoch, st.mean_loss,
                    st.accuracy, st.seconds);
      *log << line;
      log->flush();
    }
    if (callback && !callback(st)) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

double evaluate_accuracy(const NetworkParams& params, const std::vector<WindowSample>& dataset,
                         PosMode pos) {
  if (dataset.empty()) return 0.0;
  std::size_t correct = 0;
  for (const WindowSample& s : dataset) {
    const Pmf pmf = forward_infer(params, s.context, s.tags, pos);
    Index arg = 0;
    pmf.maxCoeff(&arg);
    if (arg == static_cast<Index>(s.target)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

}  // namespace ncomp
