#pragma once
// Background-model calibration: alternate RMSprop phases fit object
// positions against a delay mismatch and material constants against a
// smoothed ratio-amplitude mismatch, over a dataset of (RX position, CSI)
// records. Measured-side features are cached once; the simulated side is
// re-traced per step with the RX moved to each record's position.

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "rfray/grad.hpp"
#include "rfray/optim.hpp"
#include "rfray/parallel.hpp"

namespace rfray {

struct CalibRecord {
  V3 rx_pos;
  Csi csi;
};

struct CalibDataset {
  std::vector<CalibRecord> records;
};

inline void validate_dataset(const Scene& s, const CalibDataset& d) {
  if (d.records.empty()) throw UsageError("dataset has no records");
  for (const auto& r : d.records) {
    if (r.csi.nt != s.tx.array.count || r.csi.nr != s.rx.array.count ||
        r.csi.ns != s.freq.ns)
      throw UsageError("dataset record shape does not match the scene arrays");
    if (r.csi.freq.fc != s.freq.fc || r.csi.freq.df != s.freq.df)
      throw UsageError("dataset frequency grid does not match the scene");
  }
}

// Symmetric mean absolute percentage error |x - y| / (x + y) for
// non-negative inputs; both-effectively-zero arguments yield 0 with a flag.
template <class T>
inline T smape(const T& x, const T& y, bool* flagged = nullptr) {
  using std::abs;
  if (flagged) *flagged = false;
  if (value_of(x + y) < 1e-15) {
    if (flagged) *flagged = true;
    return T(0);
  }
  return abs(x - y) / (x + y);
}

namespace detail {

// Sum of per-pair mean delays; zero-power pairs contribute 0.
template <class T>
inline T delay_sum(const CsiTensor<T>& H, bool* any_flag = nullptr) {
  const auto f = delay_feature(H);
  if (any_flag)
    for (char c : f.flag)
      if (c) *any_flag = true;
  T sum(0.0);
  for (const auto& t : f.tau) sum += t;
  return sum;
}

// Sum of smoothed adjacent-antenna ratio amplitudes.
template <class T>
inline T ratio_amp_sum(const CsiTensor<T>& H) {
  const auto R = savgol(csi_ratio(H));
  T sum(0.0);
  for (const auto& c : R.data) sum += abs(c);
  return sum;
}

struct MeasuredCache {
  std::vector<double> delay;  // per record
  std::vector<double> ratio;  // per record; empty when ratios are unused
  std::vector<char> ok;       // 0 = record skipped (zero-power measurement)
  int skipped = 0;
};

inline MeasuredCache build_measured_cache(const CalibDataset& d, bool need_ratio) {
  MeasuredCache c;
  for (const auto& rec : d.records) {
    bool flag = false;
    c.delay.push_back(delay_sum(rec.csi, &flag));
    c.ok.push_back(flag ? 0 : 1);
    if (flag) ++c.skipped;
    if (need_ratio) c.ratio.push_back(flag ? 0.0 : ratio_amp_sum(rec.csi));
  }
  if (c.skipped == int(d.records.size()))
    throw NumericError("every dataset record is zero-power");
  return c;
}

// Mean loss (and gradient when sel is nonempty) over usable records, with
// the RX origin moved to each record position. Reduction is ordered by
// record index, so results do not depend on the worker count.
template <class LossMaker>
inline std::pair<double, std::vector<double>> dataset_loss_grad(
    const Scene& scene, const CalibDataset& data, const MeasuredCache& cache,
    const ParamSelector& sel, LossMaker&& make_loss) {
  const auto reports = parallel_map(data.records.size(),
                                    [&](std::size_t i) -> std::optional<GradReport> {
                                      if (!cache.ok[i]) return std::nullopt;
                                      Scene sr = scene;
                                      sr.rx.array.origin = data.records[i].rx_pos;
                                      return loss_and_grad(sr, sel, make_loss(i));
                                    });
  double loss = 0.0;
  std::vector<double> grad(sel.size(), 0.0);
  int used = 0;
  for (const auto& r : reports) {
    if (!r) continue;
    ++used;
    loss += r->loss;
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += r->grad[k];
  }
  loss /= double(used);
  for (auto& g : grad) g /= double(used);
  return {loss, grad};
}

}  // namespace detail

// Mean-over-records SMAPE between measured and simulated delay-feature sums,
// optionally with its gradient over the selector.
inline std::pair<double, std::vector<double>> positions_loss_grad(
    const Scene& scene, const CalibDataset& data, const ParamSelector& sel,
    int* skipped = nullptr) {
  validate_dataset(scene, data);
  const auto cache = detail::build_measured_cache(data, false);
  if (skipped) *skipped = cache.skipped;
  return detail::dataset_loss_grad(scene, data, cache, sel, [&](std::size_t i) {
    const double m = cache.delay[i];
    return [m](const auto& H) {
      using T = std::decay_t<decltype(H.data[0].re)>;
      return smape(T(m), detail::delay_sum(H));
    };
  });
}

// Mean-over-records SMAPE between measured and simulated sums of smoothed
// ratio amplitudes.
inline std::pair<double, std::vector<double>> materials_loss_grad(
    const Scene& scene, const CalibDataset& data, const ParamSelector& sel,
    int* skipped = nullptr) {
  validate_dataset(scene, data);
  if (scene.tx.array.count < 2)
    throw UsageError("material loss needs at least two TX antennas");
  const auto cache = detail::build_measured_cache(data, true);
  if (skipped) *skipped = cache.skipped;
  return detail::dataset_loss_grad(scene, data, cache, sel, [&](std::size_t i) {
    const double m = cache.ratio[i];
    return [m](const auto& H) {
      using T = std::decay_t<decltype(H.data[0].re)>;
      return smape(T(m), detail::ratio_amp_sum(H));
    };
  });
}

inline double loss_positions(const Scene& scene, const CalibDataset& data,
                             int* skipped = nullptr) {
  return positions_loss_grad(scene, data, {}, skipped).first;
}

inline double loss_materials(const Scene& scene, const CalibDataset& data,
                             int* skipped = nullptr) {
  return materials_loss_grad(scene, data, {}, skipped).first;
}

struct CalibSchedule {
  int rounds = 10;
  int pos_steps = 15;
  int mat_steps = 15;
  double lr = 0.03;
  double momentum = 0.6;
  double lr_decay = 0.55;   // per-round learning-rate multiplier
  double threshold = 1e-7;  // stop when both phase losses move less than this
};

struct CalibStepRow {
  int round = 0;
  char phase = 'p';  // 'p' = positions, 'm' = materials
  int step = 0;
  double loss = 0.0;                 // before this step's update
  std::vector<double> params;        // selector values after update and clamp
};

struct CalibPhaseSummary {
  int round = 0;
  char phase = 'p';
  double loss_start = 0.0, loss_end = 0.0;
};

struct CalibResult {
  Scene scene;
  std::vector<CalibStepRow> history;
  std::vector<CalibPhaseSummary> phases;
  int skipped_records = 0;
  bool converged = false;
  int rounds_run = 0;
};

namespace detail {

inline std::vector<double> selector_values(const Scene& s, const ParamSelector& pos,
                                           const ParamSelector& mat) {
  std::vector<double> out;
  for (const auto& p : pos) out.push_back(get_param(s, p));
  for (const auto& p : mat) out.push_back(get_param(s, p));
  return out;
}

}  // namespace detail

// Alternating calibration. Each round runs a position phase (delay loss over
// sel_pos) then a material phase (ratio-amplitude loss over sel_mat); either
// phase is skipped when its selector is empty. Material values are clamped
// to eps_r >= 1, sigma >= 0 after every step.
inline CalibResult calibrate(const Scene& scene_in, const CalibDataset& data,
                             const ParamSelector& sel_pos, const ParamSelector& sel_mat,
                             const CalibSchedule& sched = {}) {
  if (sched.rounds < 1 || sched.pos_steps < 1 || sched.mat_steps < 1)
    throw UsageError("calibration schedule counts must be >= 1");
  if (sched.lr <= 0.0) throw UsageError("calibration learning rate must be > 0");
  if (sel_pos.empty() && sel_mat.empty()) throw UsageError("nothing selected to calibrate");
  validate_selector(scene_in, sel_pos);
  validate_selector(scene_in, sel_mat);
  validate_dataset(scene_in, data);
  for (const auto& p : sel_pos)
    if (is_material_kind(p.kind))
      throw UsageError("material parameter in the position selector");
  for (const auto& p : sel_mat)
    if (!is_material_kind(p.kind))
      throw UsageError("position parameter in the material selector");

  CalibResult out;
  out.scene = scene_in;
  const auto cache = detail::build_measured_cache(data, !sel_mat.empty());
  out.skipped_records = cache.skipped;

  RmsProp opt_pos{sched.lr, 0.9, sched.momentum, 1e-8, {}, {}};
  RmsProp opt_mat{sched.lr, 0.9, sched.momentum, 1e-8, {}, {}};
  opt_pos.reset(sel_pos.size());
  opt_mat.reset(sel_mat.size());

  const auto delay_loss = [&](std::size_t i) {
    const double m = cache.delay[i];
    return [m](const auto& H) {
      using T = std::decay_t<decltype(H.data[0].re)>;
      return smape(T(m), detail::delay_sum(H));
    };
  };
  const auto ratio_loss = [&](std::size_t i) {
    const double m = cache.ratio[i];
    return [m](const auto& H) {
      using T = std::decay_t<decltype(H.data[0].re)>;
      return smape(T(m), detail::ratio_amp_sum(H));
    };
  };

  // One descent phase; returns the explicit loss at the updated parameters.
  double guard_floor = -1.0;  // divergence reference, set at the first phase
  const auto run_phase = [&](int round, char tag, const ParamSelector& sel, RmsProp& opt,
                             int steps, auto&& loss_maker) {
    std::vector<double> theta;
    theta.reserve(sel.size());
    for (const auto& p : sel) theta.push_back(get_param(out.scene, p));
    CalibPhaseSummary summary{round, tag, 0.0, 0.0};
    for (int step = 1; step <= steps; ++step) {
      const auto [loss, grad] =
          detail::dataset_loss_grad(out.scene, data, cache, sel, loss_maker);
      if (step == 1) summary.loss_start = loss;
      if (guard_floor < 0.0) guard_floor = std::max(loss, 0.05);
      if (loss > 10.0 * guard_floor) {
        std::string dump = "calibration diverged at round " + std::to_string(round) +
                           " phase " + tag + ": loss " + std::to_string(loss) + ", params";
        for (double v : theta) dump += " " + std::to_string(v);
        throw NumericError(dump);
      }
      opt.step(theta, grad);
      for (std::size_t k = 0; k < sel.size(); ++k) {
        if (sel[k].kind == ParamKind::MaterialEps) theta[k] = std::max(1.0, theta[k]);
        if (sel[k].kind == ParamKind::MaterialSigma) theta[k] = std::max(0.0, theta[k]);
        set_param(out.scene, sel[k], theta[k]);
      }
      out.history.push_back(
          {round, tag, step, loss, detail::selector_values(out.scene, sel_pos, sel_mat)});
    }
    const auto [end_loss, end_grad] =
        detail::dataset_loss_grad(out.scene, data, cache, {}, loss_maker);
    (void)end_grad;
    summary.loss_end = end_loss;
    out.phases.push_back(summary);
    return summary;
  };

  double prev_lp = kInf, prev_lm = kInf;
  for (int round = 1; round <= sched.rounds; ++round) {
    out.rounds_run = round;
    double lp_delta = 0.0, lm_delta = 0.0;
    if (!sel_pos.empty()) {
      const auto ph = run_phase(round, 'p', sel_pos, opt_pos, sched.pos_steps, delay_loss);
      lp_delta = std::abs(ph.loss_end - (prev_lp == kInf ? ph.loss_start : prev_lp));
      prev_lp = ph.loss_end;
    }
    if (!sel_mat.empty()) {
      const auto ph = run_phase(round, 'm', sel_mat, opt_mat, sched.mat_steps, ratio_loss);
      lm_delta = std::abs(ph.loss_end - (prev_lm == kInf ? ph.loss_start : prev_lm));
      prev_lm = ph.loss_end;
    }
    opt_pos.lr *= sched.lr_decay;
    opt_mat.lr *= sched.lr_decay;
    if (lp_delta < sched.threshold && lm_delta < sched.threshold) {
      out.converged = true;
      break;
    }
  }
  return out;
}

// Synthetic dataset: the scene simulated at each RX position, optionally
// with additive complex Gaussian noise at the given SNR. Per-record noise
// streams are forked from the record index, so output is independent of the
// worker count.
inline CalibDataset make_dataset(const Scene& scene, const std::vector<V3>& rx_positions,
                                 double snr_db, std::uint64_t seed) {
  const SplitMix64 root(seed);
  auto records = parallel_map(rx_positions.size(), [&](std::size_t i) -> CalibRecord {
    Scene sr = scene;
    sr.rx.array.origin = rx_positions[i];
    Csi H = synthesize_csi(sr);
    if (std::isfinite(snr_db)) {
      double power = 0.0;
      for (const auto& c : H.data) power += abs2(c);
      power /= double(H.data.size());
      const double sigma = std::sqrt(power * std::pow(10.0, -snr_db / 10.0) / 2.0);
      GaussStream g(root.fork(std::uint64_t(i)));
      for (auto& c : H.data) {
        c.re += sigma * g.next();
        c.im += sigma * g.next();
      }
    }
    return {rx_positions[i], std::move(H)};
  });
  CalibDataset d;
  d.records = std::move(records);
  return d;
}

}  // namespace rfray
