#include "luresid/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "luresid/io.hpp"
#include "luresid/rng.hpp"

namespace luresid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Mat sym(const Mat& M) { return 0.5 * (M + M.transpose()); }

/// -log det(A) through Cholesky; nullopt when A is not (numerically)
/// positive definite or contains non-finite entries.
std::optional<double> neg_logdet_pd(const Mat& A) {
  if (!A.allFinite()) return std::nullopt;
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success) return std::nullopt;
  double acc = 0.0;
  const auto& Lf = llt.matrixLLT();
  for (Index i = 0; i < Lf.rows(); ++i) acc += std::log(Lf(i, i));
  return -2.0 * acc;
}

}  // namespace

const char* to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::gensec: return "gensec";
    case TrainMode::stdsec: return "stdsec";
    case TrainMode::nosec: return "nosec";
  }
  return "unknown";
}

TrainMode train_mode_from_string(const std::string& name) {
  if (name == "gensec") return TrainMode::gensec;
  if (name == "stdsec") return TrainMode::stdsec;
  if (name == "nosec") return TrainMode::nosec;
  throw ConfigError("unknown training mode '" + name +
                    "' (expected gensec, stdsec or nosec)");
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("TrainConfig: epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw ConfigError("TrainConfig: learning_rate must be positive");
  }
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("TrainConfig: Adam betas must lie in (0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ConfigError("TrainConfig: adam_eps must be > 0");
  if (!(nu0 > 0.0)) throw ConfigError("TrainConfig: nu0 must be positive");
  if (!(nu_decay > 0.0 && nu_decay <= 1.0)) {
    throw ConfigError("TrainConfig: nu_decay must lie in (0, 1]");
  }
  if (!(nu_min > 0.0)) throw ConfigError("TrainConfig: nu_min must be > 0");
  if (check_every < 1) throw ConfigError("TrainConfig: check_every must be >= 1");
  if (rollback_limit < 1) {
    throw ConfigError("TrainConfig: rollback_limit must be >= 1");
  }
  if (model_n < 1 || model_m < 1) {
    throw ConfigError("TrainConfig: model_n and model_m must be >= 1");
  }
}

Certificate Learnable::certificate() const {
  if (!(sigma > 0.0)) {
    throw ConfigError("Learnable: sigma must be positive to form a certificate");
  }
  Certificate cert;
  cert.P = sym(P);
  cert.m_diag = m_diag;
  cert.L = L;
  cert.s = std::sqrt(sigma);
  cert.alpha = alpha;
  return cert;
}

Learnable Learnable::from(const ModelParams& params, const Certificate& cert) {
  Learnable w;
  w.theta = params;
  w.P = cert.P;
  w.m_diag = cert.m_diag;
  w.L = cert.L;
  w.alpha = cert.alpha;
  w.sigma = cert.s * cert.s;
  return w;
}

Index flat_size(const Dimensions& dims) {
  const Index n = dims.n, r = dims.r, e = dims.e, m = dims.m;
  return n * n + n * r + n * m + e * n + e * r + e * m + m * n + m * r  // theta
         + n * n + m + m * n + 2;  // P, m_diag, L, alpha, sigma
}

Vec flatten(const Learnable& w) {
  Vec x(flat_size(w.theta.dims));
  Index off = 0;
  const auto put = [&](const Mat& M) {
    x.segment(off, M.size()) = Eigen::Map<const Vec>(M.data(), M.size());
    off += M.size();
  };
  put(w.theta.A);
  put(w.theta.B);
  put(w.theta.B2);
  put(w.theta.C);
  put(w.theta.D);
  put(w.theta.D12);
  put(w.theta.C2);
  put(w.theta.D21);
  put(w.P);
  x.segment(off, w.m_diag.size()) = w.m_diag;
  off += w.m_diag.size();
  put(w.L);
  x[off++] = w.alpha;
  x[off++] = w.sigma;
  return x;
}

Learnable unflatten(const Vec& x, const Dimensions& dims) {
  if (x.size() != flat_size(dims)) {
    throw ConfigError("unflatten: flat vector has size " +
                      std::to_string(x.size()) + ", expected " +
                      std::to_string(flat_size(dims)));
  }
  Learnable w;
  w.theta = ModelParams::zero(dims);
  Index off = 0;
  const auto take = [&](Mat& M) {
    M = Eigen::Map<const Mat>(x.data() + off, M.rows(), M.cols());
    off += M.size();
  };
  take(w.theta.A);
  take(w.theta.B);
  take(w.theta.B2);
  take(w.theta.C);
  take(w.theta.D);
  take(w.theta.D12);
  take(w.theta.C2);
  take(w.theta.D21);
  w.P.resize(dims.n, dims.n);
  take(w.P);
  w.m_diag = x.segment(off, dims.m);
  off += dims.m;
  w.L.resize(dims.m, dims.n);
  take(w.L);
  w.alpha = x[off++];
  w.sigma = x[off++];
  return w;
}

double barrier(const Mat& C) {
  if (C.rows() != C.cols()) throw ConfigError("barrier: matrix must be square");
  const auto v = neg_logdet_pd((-C).eval());
  return v ? *v : kInf;
}

namespace {

/// The LMI data the barrier terms are built from. F never depends on s, and
/// the region blocks take 1/sigma directly in the corner so every term is an
/// exact function of the stored variables.
struct AssembledLmis {
  bool scalars_ok = false;
  double h = 0.0;  // (1 - alpha^2) sigma - delta^2
  Mat Psym;
  Mat F;
  std::vector<Mat> G;
};

AssembledLmis assemble_lmis(const Learnable& w, double delta) {
  AssembledLmis out;
  out.scalars_ok = w.sigma > 0.0 && w.alpha > 0.0 && w.alpha < 1.0;
  if (out.scalars_ok) {
    out.h = (1.0 - w.alpha * w.alpha) * w.sigma - delta * delta;
    out.scalars_ok = out.h > 0.0;
  }
  out.Psym = sym(w.P);

  Certificate cert;
  cert.P = out.Psym;
  cert.m_diag = w.m_diag;
  cert.L = w.L;
  cert.s = 1.0;  // F does not involve s
  cert.alpha = w.alpha;
  out.F = build_F(w.theta, cert);

  const Index n = w.theta.dims.n, m = w.theta.dims.m;
  out.G.reserve(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    Mat G(1 + n, 1 + n);
    G(0, 0) = w.sigma > 0.0 ? 1.0 / w.sigma : -1.0;
    G.block(0, 1, 1, n) = w.L.row(i);
    G.block(1, 0, n, 1) = w.L.row(i).transpose();
    G.block(1, 1, n, n) = out.Psym;
    out.G.push_back(std::move(G));
  }
  return out;
}

double barrier_part_value(const Learnable& w, double delta) {
  const AssembledLmis lmis = assemble_lmis(w, delta);
  if (!lmis.scalars_ok) return kInf;
  const auto fF = neg_logdet_pd((-lmis.F).eval());
  if (!fF) return kInf;
  double acc = *fF;
  for (const auto& G : lmis.G) {
    const auto fG = neg_logdet_pd(G);
    if (!fG) return kInf;
    acc += *fG;
  }
  acc += -std::log(lmis.h);
  acc += -std::log(1.0 - w.alpha);
  acc += -std::log(w.alpha);
  acc += -std::log(w.sigma);
  return acc;
}

double mse_over_prefix(const Trajectory& pred, const Trajectory& data) {
  const Index K = pred.length();
  double acc = 0.0;
  for (Index k = 0; k < K; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    acc += (pred.y[idx] - data.y[idx]).squaredNorm();
  }
  return acc / static_cast<double>(K);
}

}  // namespace

LossParts training_loss(const Learnable& w, const Batch& batch, double nu,
                        TrainMode mode, double delta) {
  if (batch.empty()) throw ConfigError("training_loss: empty batch");
  LossParts parts;
  for (const Trajectory* traj : batch) {
    const Trajectory pred = simulate(w.theta, traj->x0, traj->u);
    parts.mse_part += mse_over_prefix(pred, *traj);
  }
  parts.mse_part /= static_cast<double>(batch.size());

  if (mode == TrainMode::nosec) {
    parts.barrier_part = 0.0;
    parts.total = parts.mse_part;
    return parts;
  }
  parts.barrier_part = barrier_part_value(w, delta);
  parts.total = std::isfinite(parts.barrier_part)
                    ? parts.mse_part + nu * parts.barrier_part
                    : kInf;
  return parts;
}

namespace {

Learnable zero_like(const Learnable& w) {
  Learnable g;
  g.theta = ModelParams::zero(w.theta.dims);
  g.P = Mat::Zero(w.P.rows(), w.P.cols());
  g.m_diag = Vec::Zero(w.m_diag.size());
  g.L = Mat::Zero(w.L.rows(), w.L.cols());
  g.alpha = 0.0;
  g.sigma = 0.0;
  return g;
}

/// Reverse-mode pass through the unrolled recursion for one trajectory.
/// weight = 2 / (batch size * trajectory length); adds into g.theta.
void accumulate_bptt(const Learnable& w, const Trajectory& data,
                     double inv_batch, Learnable& g) {
  const Trajectory pred = simulate(w.theta, data.x0, data.u,
                                   /*record_internal=*/true);
  const Index K = pred.length();
  const double weight = 2.0 * inv_batch / static_cast<double>(K);
  const ModelParams& t = w.theta;
  Vec lambda = Vec::Zero(t.dims.n);  // adjoint of x_{k+1}
  for (Index k = K - 1; k >= 0; --k) {
    const auto idx = static_cast<std::size_t>(k);
    const Vec& xk = pred.x[idx];
    const Vec& uk = data.u[idx];
    const Vec& wk = pred.w[idx];
    const Vec ek = weight * (pred.y[idx] - data.y[idx]);
    Vec dw = t.D12.transpose() * ek + t.B2.transpose() * lambda;
    for (Index i = 0; i < dw.size(); ++i) {
      dw[i] *= deadzone_derivative(pred.v[idx][i]);
    }
    g.theta.A += lambda * xk.transpose();
    g.theta.B += lambda * uk.transpose();
    g.theta.B2 += lambda * wk.transpose();
    g.theta.C += ek * xk.transpose();
    g.theta.D += ek * uk.transpose();
    g.theta.D12 += ek * wk.transpose();
    g.theta.C2 += dw * xk.transpose();
    g.theta.D21 += dw * uk.transpose();
    lambda = t.C.transpose() * ek + t.A.transpose() * lambda +
             t.C2.transpose() * dw;
  }
}

/// Gradient of the barrier part via d[-log det(-C)] = <(-C)^{-1}, dC>,
/// chained through the affine block structure. Adds nu * gradient into g.
void accumulate_barrier_gradient(const Learnable& w, double delta, double nu,
                                 Learnable& g) {
  const AssembledLmis lmis = assemble_lmis(w, delta);
  if (!lmis.scalars_ok) {
    throw NumericalError("loss_gradient: scalar constraints violated");
  }
  const Index n = w.theta.dims.n, r = w.theta.dims.r, m = w.theta.dims.m;
  const Index ox = 0, ou = n, ow = n + r, os = n + r + m;

  Eigen::LLT<Mat> lltF((-lmis.F).eval());
  if (lltF.info() != Eigen::Success) {
    throw NumericalError("loss_gradient: F is not negative definite");
  }
  const Mat W = lltF.solve(Mat::Identity(lmis.F.rows(), lmis.F.cols()));

  const Mat W11 = W.block(ox, ox, n, n);
  const Mat W13 = W.block(ox, ow, n, m);
  const Mat W14 = W.block(ox, os, n, n);
  const Mat W31 = W.block(ow, ox, m, n);
  const Mat W32 = W.block(ow, ou, m, r);
  const Mat W33 = W.block(ow, ow, m, m);
  const Mat W41 = W.block(os, ox, n, n);
  const Mat W42 = W.block(os, ou, n, r);
  const Mat W43 = W.block(os, ow, n, m);
  const Mat W44 = W.block(os, os, n, n);

  g.theta.A += nu * 2.0 * W41 * lmis.Psym;
  g.theta.B += nu * 2.0 * W42;
  g.theta.B2 += nu * 2.0 * W43 * w.m_diag.asDiagonal();
  g.theta.C2 += nu * 2.0 * W31 * lmis.Psym;
  g.theta.D21 += nu * 2.0 * W32;
  g.L += nu * 2.0 * W31;
  g.m_diag += nu * (-2.0 * W33.diagonal() +
                    2.0 * (w.theta.B2.transpose() * W43).diagonal());
  Mat gradP = -(w.alpha * w.alpha) * W11 - W44 + 2.0 * W13 * w.theta.C2 +
              2.0 * W14 * w.theta.A;
  g.alpha += nu * (-2.0 * w.alpha * (W11 * lmis.Psym).trace());

  for (Index i = 0; i < m; ++i) {
    Eigen::LLT<Mat> lltG(lmis.G[static_cast<std::size_t>(i)]);
    if (lltG.info() != Eigen::Success) {
      throw NumericalError("loss_gradient: region LMI " + std::to_string(i) +
                           " is not positive definite");
    }
    const Mat V = lltG.solve(Mat::Identity(1 + n, 1 + n));
    g.sigma += nu * V(0, 0) / (w.sigma * w.sigma);
    g.L.row(i) += nu * (-2.0) * V.block(0, 1, 1, n);
    gradP += -V.block(1, 1, n, n);
  }
  g.P += nu * sym(gradP);

  // Scalar barrier terms: -log h, -log(1 - alpha), -log alpha, -log sigma.
  g.sigma += nu * (-(1.0 - w.alpha * w.alpha) / lmis.h);
  g.alpha += nu * (2.0 * w.alpha * w.sigma / lmis.h);
  g.alpha += nu * (1.0 / (1.0 - w.alpha));
  g.alpha += nu * (-1.0 / w.alpha);
  g.sigma += nu * (-1.0 / w.sigma);
}

}  // namespace

Learnable loss_gradient(const Learnable& w, const Batch& batch, double nu,
                        TrainMode mode, double delta) {
  if (batch.empty()) throw ConfigError("loss_gradient: empty batch");
  Learnable g = zero_like(w);
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  for (const Trajectory* traj : batch) {
    accumulate_bptt(w, *traj, inv_batch, g);
  }
  if (mode != TrainMode::nosec) {
    accumulate_barrier_gradient(w, delta, nu, g);
    if (mode == TrainMode::stdsec) g.L.setZero();
  }
  return g;
}

AdamState AdamState::zero(Index size) {
  AdamState st;
  st.m = Vec::Zero(size);
  st.v = Vec::Zero(size);
  st.t = 0;
  return st;
}

Vec adam_step(AdamState& state, const Vec& grad, const TrainConfig& config) {
  if (state.m.size() != grad.size() || state.v.size() != grad.size()) {
    throw ConfigError("adam_step: moment shape does not match gradient");
  }
  state.t += 1;
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  state.m = b1 * state.m + (1.0 - b1) * grad;
  state.v = b2 * state.v.array().matrix() +
            (1.0 - b2) * grad.array().square().matrix();
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  const Vec m_hat = state.m / corr1;
  const Vec v_hat = state.v / corr2;
  return (-config.learning_rate) *
         (m_hat.array() / (v_hat.array().sqrt() + config.adam_eps)).matrix();
}

namespace {

Learnable nosec_initial_point(const Dimensions& dims, std::uint64_t seed) {
  CounterRng rng(seed, /*stream=*/2);
  Learnable w;
  w.theta = ModelParams::zero(dims);
  w.theta.A = 0.9 * Mat::Identity(dims.n, dims.n);
  w.theta.C.leftCols(std::min(dims.e, dims.n)) =
      Mat::Identity(dims.e, std::min(dims.e, dims.n));
  const auto perturb = [&](Mat& M, double scale) {
    for (Index j = 0; j < M.cols(); ++j) {
      for (Index i = 0; i < M.rows(); ++i) M(i, j) += rng.uniform(-scale, scale);
    }
  };
  perturb(w.theta.A, 0.01);
  perturb(w.theta.B, 0.01);
  perturb(w.theta.B2, 0.01);
  perturb(w.theta.C, 0.01);
  perturb(w.theta.D, 0.01);
  perturb(w.theta.D12, 0.01);
  perturb(w.theta.C2, 1.0);
  perturb(w.theta.D21, 0.01);
  // Certificate slots are inert in this mode; keep benign placeholders.
  w.P = Mat::Identity(dims.n, dims.n);
  w.m_diag = Vec::Ones(dims.m);
  w.L = Mat::Zero(dims.m, dims.n);
  w.alpha = 0.5;
  w.sigma = 1.0;
  return w;
}

}  // namespace

TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  const std::optional<InitialPoint>& warm_start) {
  config.validate();
  if (dataset.trajectories.empty()) {
    throw ConfigError("train: dataset has no trajectories");
  }
  const double delta = config.delta > 0.0 ? config.delta : dataset.delta;
  Dimensions mdims{config.model_n, dataset.dims.r, dataset.dims.e,
                   config.model_m};

  Learnable w;
  if (warm_start) {
    if (warm_start->params.dims.r != dataset.dims.r ||
        warm_start->params.dims.e != dataset.dims.e) {
      throw ConfigError("train: warm start model does not match dataset dims");
    }
    mdims = warm_start->params.dims;
    w = Learnable::from(warm_start->params, warm_start->certificate);
  } else if (config.mode == TrainMode::nosec) {
    w = nosec_initial_point(mdims, config.seed);
  } else {
    sdp::InitializeOptions opts;
    opts.pin_l_zero = (config.mode == TrainMode::stdsec);
    opts.solver = config.solver;
    const std::optional<double> beta =
        config.beta > 0.0 ? std::optional<double>(config.beta) : std::nullopt;
    const auto init = sdp::initialize(mdims, delta, beta, config.seed, opts);
    w = Learnable::from(init.params, init.certificate);
  }

  const Batch probe{&dataset.trajectories.front()};
  if (!std::isfinite(
          training_loss(w, probe, config.nu0, config.mode, delta).total)) {
    throw ConfigError(
        "train: training loss is not finite at the initial point; "
        "re-initialize (the certificate must be strictly feasible)");
  }

  Vec flat = flatten(w);
  AdamState adam = AdamState::zero(flat.size());

  Vec snapshot_flat = flat;
  AdamState snapshot_adam = adam;

  CounterRng rng(config.seed, /*stream=*/0);
  std::vector<std::size_t> order(dataset.trajectories.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  result.history.reserve(static_cast<std::size_t>(config.epochs));
  double nu = config.nu0;
  Index consecutive_rollbacks = 0;
  bool last_check_ok = config.mode != TrainMode::nosec;

  for (Index epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, rng);
    bool restore_requested = false;
    double sum_mse = 0.0, sum_barrier = 0.0, sum_total = 0.0;
    Index steps = 0;

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      Batch batch;
      batch.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        batch.push_back(&dataset.trajectories[order[i]]);
      }

      const Learnable grad = loss_gradient(w, batch, nu, config.mode, delta);
      const Vec step = adam_step(adam, flatten(grad), config);

      LossParts accepted_loss;
      bool accepted = false;
      for (int halvings = 0; halvings <= 20; ++halvings) {
        const Vec candidate = flat + std::ldexp(1.0, -halvings) * step;
        const Learnable wc = unflatten(candidate, mdims);
        const LossParts lp = training_loss(wc, batch, nu, config.mode, delta);
        if (std::isfinite(lp.total)) {
          flat = candidate;
          w = wc;
          accepted_loss = lp;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        restore_requested = true;
        accepted_loss = training_loss(w, batch, nu, config.mode, delta);
      }
      sum_mse += accepted_loss.mse_part;
      sum_barrier += accepted_loss.barrier_part;
      sum_total += accepted_loss.total;
      ++steps;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.nu = nu;
    rec.mse = sum_mse / static_cast<double>(steps);
    rec.barrier = sum_barrier / static_cast<double>(steps);
    rec.total = sum_total / static_cast<double>(steps);

    const bool run_check =
        config.mode != TrainMode::nosec &&
        ((epoch + 1) % config.check_every == 0 || epoch + 1 == config.epochs);
    if (run_check) {
      const Certificate cert = w.certificate();
      const auto report = check_certificate(w.theta, cert, delta);
      rec.feasible = report.passed() && !restore_requested;
      if (!rec.feasible) {
        bool healed = false;
        try {
          sdp::RestoreOptions opts;
          opts.pin_l_zero = (config.mode == TrainMode::stdsec);
          opts.solver = config.solver;
          opts.warm_start = cert;
          const auto restored = sdp::feasibility_restore(
              w.theta, cert.s, cert.alpha, delta, opts);
          if (restored.status == sdp::SdpStatus::optimal &&
              restored.certificate) {
            Learnable wr = w;
            wr.P = restored.certificate->P;
            wr.L = restored.certificate->L;
            wr.m_diag = restored.certificate->m_diag;
            const bool ok =
                check_certificate(wr.theta, wr.certificate(), delta).passed() &&
                std::isfinite(
                    training_loss(wr, probe, nu, config.mode, delta).total);
            if (ok) {
              w = wr;
              flat = flatten(w);
              healed = true;
            }
          }
        } catch (const ConfigError&) {
          // Scalar precondition failed; fall through to rollback.
        }
        if (healed) {
          rec.restored = true;
          ++result.total_restores;
          consecutive_rollbacks = 0;
          snapshot_flat = flat;
          snapshot_adam = adam;
        } else {
          flat = snapshot_flat;
          adam = snapshot_adam;
          w = unflatten(flat, mdims);
          rec.rolled_back = true;
          ++result.total_rollbacks;
          ++consecutive_rollbacks;
          if (consecutive_rollbacks > config.rollback_limit) {
            throw NumericalError(
                "train: " + std::to_string(consecutive_rollbacks) +
                " consecutive rollbacks (limit " +
                std::to_string(config.rollback_limit) +
                "); optimization cannot stay feasible");
          }
        }
      } else {
        consecutive_rollbacks = 0;
        snapshot_flat = flat;
        snapshot_adam = adam;
      }
      last_check_ok = rec.feasible || rec.restored;
    } else {
      rec.feasible = config.mode != TrainMode::nosec && last_check_ok;
    }
    result.history.push_back(rec);
    nu = std::max(config.nu_min, nu * config.nu_decay);
  }

  result.params = w.theta;
  if (config.mode != TrainMode::nosec) {
    result.certificate = w.certificate();
  }
  return result;
}

void write_history_csv(const std::vector<EpochRecord>& history,
                       const std::string& path) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,mse,barrier,total,nu,feasible,restored,rolled_back\n";
  for (const auto& rec : history) {
    out << rec.epoch << "," << rec.mse << "," << rec.barrier << ","
        << rec.total << "," << rec.nu << "," << (rec.feasible ? 1 : 0) << ","
        << (rec.restored ? 1 : 0) << "," << (rec.rolled_back ? 1 : 0) << "\n";
  }
  write_text_file(path, out.str());
}

}  // namespace luresid
