#pragma once
// Gradients of scalar losses over the synthesized CSI with respect to
// selected scene parameters. Forward-mode duals ride the whole pipeline
// (geometry re-solve, Fresnel transfer, visibility, channel sum, loss) with
// the path-key set frozen at the primal trace; selectors wider than one dual
// width are processed in chunks.

#include <cmath>
#include <string>
#include <vector>

#include "rfray/channel.hpp"
#include "rfray/dual.hpp"

namespace rfray {

struct GradReport {
  double loss = 0.0;
  std::vector<double> grad;  // aligned with the selector
  int path_count = 0;
  int pruned_count = 0;
};

namespace detail {

inline std::string param_name(const ParamRef& p) {
  switch (p.kind) {
    case ParamKind::ObjectX: return "object:" + p.target + ":x";
    case ParamKind::ObjectY: return "object:" + p.target + ":y";
    case ParamKind::ObjectZ: return "object:" + p.target + ":z";
    case ParamKind::TxX: return "tx:x";
    case ParamKind::TxY: return "tx:y";
    case ParamKind::TxZ: return "tx:z";
    case ParamKind::RxX: return "rx:x";
    case ParamKind::RxY: return "rx:y";
    case ParamKind::RxZ: return "rx:z";
    case ParamKind::MaterialEps: return "material:" + p.target + ":eps_r";
    case ParamKind::MaterialSigma: return "material:" + p.target + ":sigma";
  }
  return "?";
}

template <class D, class LossFn>
inline void grad_chunk(const Scene& scene, const ParamSelector& sel, std::size_t lo,
                       std::size_t hi, LossFn&& loss_fn, GradReport& out) {
  auto params = SceneParams<D>::from_scene(scene);
  for (std::size_t i = lo; i < hi; ++i) seed_param(scene, params, sel[i], int(i - lo));
  const auto H = synthesize_csi_with(scene, params);
  const D L = loss_fn(H);
  out.loss = L.v;
  out.path_count = H.path_count;
  out.pruned_count = H.pruned_count;
  for (std::size_t i = lo; i < hi; ++i) {
    const double g = L.d[std::size_t(i - lo)];
    if (!std::isfinite(g))
      throw NumericError("non-finite gradient for parameter " + param_name(sel[i]));
    out.grad[i] = g;
  }
}

}  // namespace detail

// Loss value and gradient under a frozen path-key set. loss_fn must accept
// CsiTensor<T> for dual T and return T.
template <class LossFn>
inline GradReport loss_and_grad(const Scene& scene, const ParamSelector& sel,
                                LossFn&& loss_fn) {
  validate_selector(scene, sel);
  GradReport out;
  out.grad.assign(sel.size(), 0.0);
  if (sel.empty()) {
    const auto H = synthesize_csi(scene);
    out.loss = loss_fn(H);
    out.path_count = H.path_count;
    out.pruned_count = H.pruned_count;
  } else if (sel.size() <= 2) {
    detail::grad_chunk<Dual2>(scene, sel, 0, sel.size(), loss_fn, out);
  } else {
    for (std::size_t lo = 0; lo < sel.size(); lo += 8)
      detail::grad_chunk<Dual8>(scene, sel, lo, std::min(lo + 8, sel.size()), loss_fn, out);
  }
  if (!std::isfinite(out.loss)) throw NumericError("non-finite loss value");
  return out;
}

struct FdReport {
  std::vector<double> rel_err;  // aligned with the selector
  double max_rel_err = 0.0;
  bool unreliable = false;  // step too small for the loss scale (cancellation)
};

// Central-difference cross-check of loss_and_grad, parameter by parameter.
template <class LossFn>
inline FdReport fd_check(const Scene& scene, const ParamSelector& sel, LossFn&& loss_fn,
                         double step) {
  if (step <= 0.0) throw UsageError("fd_check requires step > 0");
  validate_selector(scene, sel);
  const GradReport ad = loss_and_grad(scene, sel, loss_fn);
  FdReport out;
  out.rel_err.assign(sel.size(), 0.0);
  if (step < 1e-10) out.unreliable = true;
  for (std::size_t i = 0; i < sel.size(); ++i) {
    const double base = get_param(scene, sel[i]);
    Scene plus = scene, minus = scene;
    set_param(plus, sel[i], base + step);
    set_param(minus, sel[i], base - step);
    const double lp = loss_fn(synthesize_csi(plus));
    const double lm = loss_fn(synthesize_csi(minus));
    if (std::abs(lp - lm) < 1e3 * 2.2e-16 * (std::abs(lp) + std::abs(lm)))
      out.unreliable = true;
    const double fd = (lp - lm) / (2.0 * step);
    const double scale = std::max({std::abs(fd), std::abs(ad.grad[i]), 1e-12});
    out.rel_err[i] = std::abs(fd - ad.grad[i]) / scale;
    out.max_rel_err = std::max(out.max_rel_err, out.rel_err[i]);
  }
  return out;
}

}  // namespace rfray
