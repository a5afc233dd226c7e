#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "stratgn/errors.hpp"
#include "stratgn/kkt.hpp"
#include "stratgn/model.hpp"
#include "stratgn/spectral.hpp"

namespace stratgn {

inline constexpr const char* kVersion = "stratgn 1.0.0";

struct SolverConfig {
  double tol = 1e-8;
  double delta = 1e-4;
  double eta = 0.75;
  double rho = 0.5;
  int max_iter = 500;
  int j_max = 50;
  double mu_min = 1e-16;
  double mu_max = 1e8;
  double zero_tol = kDefaultRelativeZeroTolerance;
  std::uint64_t seed = 0;

  /// Throws InputError naming the first invalid field.
  void validate() const {
    const auto bad = [](const char* field, const char* what) {
      throw InputError(field, what);
    };
    if (!(tol >= 0.0) || !std::isfinite(tol)) bad("tol", "must be finite and >= 0");
    if (!(delta > 0.0) || !std::isfinite(delta)) bad("delta", "must be finite and > 0");
    if (!(eta > 0.5 && eta < 1.0)) bad("eta", "must lie in (0.5, 1)");
    if (!(rho > 0.0 && rho < 1.0)) bad("rho", "must lie in (0, 1)");
    if (max_iter < 0) bad("max-iter", "must be >= 0");
    if (j_max < 0) bad("jmax", "must be >= 0");
    if (!(mu_min > 0.0) || !std::isfinite(mu_min)) bad("mu-min", "must be finite and > 0");
    if (!(mu_max >= mu_min) || !std::isfinite(mu_max)) bad("mu-max", "must be finite and >= mu-min");
    if (!(zero_tol >= 0.0) || !std::isfinite(zero_tol)) bad("zero-tol", "must be finite and >= 0");
  }
};

/// δ(z): smallest |λ_i| over eigenvalues classified nonzero; +inf if none.
inline double delta_lower_modulus(const Ied& ied) {
  double out = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ied.n(); ++i) {
    if (!ied.in_beta(i)) {
      out = std::min(out, std::abs(ied.eigenvalues(i)));
    }
  }
  return out;
}

struct NormalDirections {
  SymMatrix w1;
  SymMatrix w2;
};

/// Eigenvalues of a normal projection below this multiple of the norm of the
/// projected matrix are rounding noise.
inline constexpr double kNormalNoiseFactor = 1e-12;

/// W₁ = Π₋(−π²(g′(x)F₁)),  W₂ = Π₊(−π²(g′(x)F₁ + F₂)).
inline NormalDirections normal_dirs(const NlsdpProblem& problem,
                                    const PrimalDualPoint& z,
                                    const KktResidual& res) {
  const int n = problem.order();
  if (res.ied.beta_size() == 0) {
    return {SymMatrix(n), SymMatrix(n)};
  }
  const SymMatrix dg_f1 = problem.apply_dg(z.x, res.f1);
  const SymMatrix dg_f1_f2 = dg_f1 + res.f2;
  const SymMatrix a = -normal_project_pi2(res.ied, dg_f1);
  const SymMatrix b = -normal_project_pi2(res.ied, dg_f1_f2);
  return {project_nsd(make_ied(a, kNormalNoiseFactor * dg_f1.norm())),
          project_psd(make_ied(b, kNormalNoiseFactor * dg_f1_f2.norm()))};
}

struct NormalStep {
  PrimalDualPoint point;
  double step = 0.0;
  double predicted_decrease = 0.0;
};

/**
 * z + t*(0, W) with the exact minimizing t* along the normal direction; absent
 * when W = 0.
 */
inline std::optional<NormalStep> normal_step(const NlsdpProblem& problem,
                                             const PrimalDualPoint& z,
                                             const NormalDirections& dirs,
                                             int which) {
  if (which != 1 && which != 2) {
    throw InputError("which", "normal step index must be 1 or 2");
  }
  const SymMatrix& w = which == 1 ? dirs.w1 : dirs.w2;
  const double w2 = w.squared_norm();
  if (w2 == 0.0) {
    return std::nullopt;
  }
  const double dg2 = problem.adjoint_dg(z.x, w).squaredNorm();
  const double denom = which == 1 ? dg2 : w2 + dg2;
  if (denom == 0.0) {
    throw NumericalInconsistency(
        "normal direction is nonzero but its image under the constraint "
        "adjoint vanishes");
  }
  const double t = w2 / denom;
  return NormalStep{{z.x, z.y + t * w}, t, 0.5 * w2 * w2 / denom};
}

inline std::optional<NormalStep> normal_step(const NlsdpProblem& problem,
                                             const PrimalDualPoint& z,
                                             const KktResidual& res, int which) {
  return normal_step(problem, z, normal_dirs(problem, z, res), which);
}

struct LmDirection {
  TangentVector v;
  double mu = 0.0;
  /// φ′(z; v) = ⟨Jᵀr, v⟩.
  double slope = 0.0;
};

/// v = −(μI + JᵀJ)⁻¹ Jᵀr with μ = clamp(‖F‖², μ_min, μ_max).
inline LmDirection lm_direction(const KktResidual& res,
                                const TangentFrame& frame,
                                const AssembledJacobian& jac,
                                const SolverConfig& config) {
  const Vector g = jac.j.transpose() * res.stacked();
  const int dim = frame.coordinate_dim();
  double mu = std::clamp(res.squared_norm(), config.mu_min, config.mu_max);
  if (g.size() == 0 || g.squaredNorm() == 0.0) {
    return {frame.from_stacked(Vector::Zero(dim)), mu, 0.0};
  }
  for (int attempt = 0; attempt <= 5; ++attempt) {
    Matrix system = jac.gram;
    system.diagonal().array() += mu;
    Eigen::LLT<Matrix> llt(system);
    if (llt.info() == Eigen::Success) {
      Vector v = llt.solve(-g);
      const double err = (system * v + g).norm();
      if (v.allFinite() && err <= 1e-10 * g.norm()) {
        const double slope = g.dot(v);
        return {frame.from_stacked(v), mu, slope};
      }
    }
    mu = std::max(10.0 * mu, 1e-12);
  }
  throw LinearSolveFailure("Levenberg-Marquardt system could not be solved");
}

struct ArmijoResult {
  PrimalDualPoint point;
  double phi = 0.0;
  int j = 0;
};

/**
 * Smallest j ≤ j_max with φ(R_z(ρʲv)) − φ(z) ≤ η ρʲ ½φ′(z; v). The reference
 * slope ½φ′ is the decrease predicted by the Gauss-Newton model. Inertia
 * violations count as failed trials.
 */
inline std::optional<ArmijoResult> armijo_search(const NlsdpProblem& problem,
                                                 const PrimalDualPoint& z,
                                                 double phi_z,
                                                 const TangentFrame& frame,
                                                 const LmDirection& lm,
                                                 const SolverConfig& config) {
  if (!(lm.slope < 0.0)) {
    return std::nullopt;
  }
  double t = 1.0;
  for (int j = 0; j <= config.j_max; ++j, t *= config.rho) {
    TangentVector step = lm.v;
    step.vx *= t;
    step.h *= t;
    const auto candidate = retract_point(problem, z, frame, step);
    if (!candidate) {
      continue;
    }
    const double phi = merit(problem, *candidate, config.zero_tol);
    if (phi - phi_z <= config.eta * t * 0.5 * lm.slope) {
      return ArmijoResult{*candidate, phi, j};
    }
  }
  return std::nullopt;
}

enum class StepKind { kLm, kNormal1, kNormal2, kNone };

/// Everything SLMN and the stationarity measure need at one point.
struct PointAnalysis {
  PrimalDualPoint z;
  KktResidual res;
  TangentFrame frame;
  AssembledJacobian jac;
  NormalDirections dirs;
  std::optional<LmDirection> lm;

  double phi() const { return res.phi(); }

  /// s(z) = max(‖W₁‖, ‖W₂‖, ‖v_LM‖); +inf when the LM system failed.
  double stationarity() const {
    const double v = lm ? lm->v.norm() : std::numeric_limits<double>::infinity();
    return std::max({dirs.w1.norm(), dirs.w2.norm(), v});
  }
};

inline PointAnalysis analyze(const NlsdpProblem& problem, const PrimalDualPoint& z,
                             const SolverConfig& config) {
  KktResidual res = residual(problem, z, config.zero_tol);
  TangentFrame frame(problem, z, res.ied);
  AssembledJacobian jac = assemble_dF(problem, z, frame);
  NormalDirections dirs = normal_dirs(problem, z, res);
  std::optional<LmDirection> lm;
  try {
    lm = lm_direction(res, frame, jac, config);
  } catch (const LinearSolveFailure&) {
    lm.reset();
  }
  return {z, std::move(res), std::move(frame), std::move(jac), std::move(dirs),
          std::move(lm)};
}

inline double stationarity_measure(const NlsdpProblem& problem,
                                   const PrimalDualPoint& z,
                                   const SolverConfig& config = {}) {
  return analyze(problem, z, config).stationarity();
}

struct SlmnResult {
  PrimalDualPoint point;
  double phi = 0.0;
  StepKind kind = StepKind::kNone;
  int j = -1;
  double mu = 0.0;
  bool stalled = false;
};

/**
 * Stratum LM-normal step: the φ-minimizer among the two normal-step points and
 * the Armijo point along the LM direction. Only candidates that strictly
 * decrease φ compete; ties prefer lm, then normal1, then normal2.
 */
inline SlmnResult slmn(const NlsdpProblem& problem, const PointAnalysis& a,
                       const SolverConfig& config) {
  const double phi_z = a.phi();
  SlmnResult best{a.z, phi_z, StepKind::kNone, -1, a.lm ? a.lm->mu : 0.0, true};
  const auto offer = [&](PrimalDualPoint p, double phi, StepKind kind, int j) {
    if (phi < phi_z && (best.stalled || phi < best.phi)) {
      best.point = std::move(p);
      best.phi = phi;
      best.kind = kind;
      best.j = j;
      best.stalled = false;
    }
  };
  if (a.lm) {
    if (auto ls = armijo_search(problem, a.z, phi_z, a.frame, *a.lm, config)) {
      offer(std::move(ls->point), ls->phi, StepKind::kLm, ls->j);
    }
  }
  for (int which = 1; which <= 2; ++which) {
    std::optional<NormalStep> step;
    try {
      step = normal_step(problem, a.z, a.dirs, which);
    } catch (const NumericalInconsistency&) {
      step.reset();
    }
    if (step) {
      const double phi = merit(problem, step->point, config.zero_tol);
      offer(std::move(step->point), phi,
            which == 1 ? StepKind::kNormal1 : StepKind::kNormal2, -1);
    }
  }
  return best;
}

inline SlmnResult slmn(const NlsdpProblem& problem, const PrimalDualPoint& z,
                       const SolverConfig& config = {}) {
  return slmn(problem, analyze(problem, z, config), config);
}

/// ẑ = (x, y − Σ_{|λ_i| ≤ δ} λ_i P_i P_iᵀ) for an IED of G(z).
inline PrimalDualPoint correct(const PrimalDualPoint& z, const Ied& ied,
                               double delta) {
  if (!(delta > 0.0)) {
    throw InputError("delta", "must be > 0");
  }
  const int n = ied.n();
  Vector shift = Vector::Zero(n);
  bool any = false;
  for (int i = 0; i < n; ++i) {
    const double l = ied.eigenvalues(i);
    if (std::abs(l) <= delta && l != 0.0) {
      shift(i) = l;
      any = true;
    }
  }
  if (!any) {
    return z;
  }
  return {z.x, z.y - congruence(ied.basis, shift.asDiagonal().toDenseMatrix())};
}

enum class SolveStatus { kConverged, kMaxIter, kStalled };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kMaxIter:
      return "max-iter";
    case SolveStatus::kStalled:
      return "stalled";
  }
  return "unknown";
}

struct IterationRecord {
  int iter = 0;
  double phi = 0.0;
  double norm_f1 = 0.0;
  double norm_f2 = 0.0;
  double s = 0.0;
  int p = 0;
  int q = 0;
  std::string step_kind = "none";
  int j = -1;
  double mu = 0.0;
  double step_norm = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kMaxIter;
  PrimalDualPoint z;
  double phi = 0.0;
  double s = 0.0;
  int iterations = 0;
  double delta_final = 0.0;
  std::vector<IterationRecord> trace;
  std::vector<PrimalDualPoint> iterates;
};

namespace detail {

/// True when some eigenvalue outside the zero class lies within δ of zero.
inline bool correction_moves(const Ied& ied, double delta) {
  for (int i = 0; i < ied.n(); ++i) {
    const double l = std::abs(ied.eigenvalues(i));
    if (l <= delta && l > ied.zero_tolerance) {
      return true;
    }
  }
  return false;
}

inline const char* kind_name(StepKind kind, bool corrected) {
  switch (kind) {
    case StepKind::kLm:
      return corrected ? "corrected-lm" : "lm";
    case StepKind::kNormal1:
      return corrected ? "corrected-normal1" : "normal1";
    case StepKind::kNormal2:
      return corrected ? "corrected-normal2" : "normal2";
    case StepKind::kNone:
      return corrected ? "correction" : "none";
  }
  return "none";
}

}  // namespace detail

/**
 * Stratified Gauss-Newton method with correction. Each outer step tries
 * SLMN from the corrected point first and falls back to SLMN from the
 * iterate itself when that does not improve φ.
 */
inline SolveResult sgn_solve(const NlsdpProblem& problem,
                             const PrimalDualPoint& z0,
                             const SolverConfig& config = {}) {
  config.validate();
  check_dimensions(problem, z0);
  SolveResult out;
  PointAnalysis a = analyze(problem, z0, config);
  for (int k = 0;; ++k) {
    IterationRecord rec;
    rec.iter = k;
    rec.phi = a.phi();
    rec.norm_f1 = a.res.f1.norm();
    rec.norm_f2 = a.res.f2.norm();
    rec.s = a.stationarity();
    rec.p = a.res.ied.p;
    rec.q = a.res.ied.q;
    rec.mu = a.lm ? a.lm->mu : 0.0;
    out.iterates.push_back(a.z);

    const auto finish = [&](SolveStatus status) {
      out.trace.push_back(rec);
      out.status = status;
      out.z = a.z;
      out.phi = rec.phi;
      out.s = rec.s;
      out.iterations = k;
      out.delta_final = delta_lower_modulus(a.res.ied);
      return out;
    };
    if (rec.s <= config.tol) {
      return finish(SolveStatus::kConverged);
    }
    if (k >= config.max_iter) {
      return finish(SolveStatus::kMaxIter);
    }

    std::optional<PointAnalysis> next;
    bool corrected = false;
    SlmnResult step;
    if (detail::correction_moves(a.res.ied, config.delta)) {
      const PrimalDualPoint z_hat = correct(a.z, a.res.ied, config.delta);
      PointAnalysis a_hat = analyze(problem, z_hat, config);
      SlmnResult r_hat = slmn(problem, a_hat, config);
      if (r_hat.phi <= rec.phi) {
        corrected = true;
        step = std::move(r_hat);
        if (step.stalled) {
          next = std::move(a_hat);
        }
      }
    }
    if (!corrected) {
      step = slmn(problem, a, config);
      if (step.stalled) {
        return finish(SolveStatus::kStalled);
      }
    }
    rec.step_kind = detail::kind_name(step.kind, corrected);
    rec.j = step.j;
    rec.mu = step.mu;
    rec.step_norm = distance(step.point, a.z);
    out.trace.push_back(rec);
    if (!next) {
      next = analyze(problem, step.point, config);
    }
    a = std::move(*next);
  }
}

/// CSV trace with a header row; reals printed with %.17g.
inline void write_trace_csv(std::ostream& os,
                            const std::vector<IterationRecord>& trace) {
  os << "iter,phi,normF1,normF2,s,p,q,step_kind,j,mu,step_norm\n";
  char buf[64];
  const auto real = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : trace) {
    os << r.iter << ',' << real(r.phi) << ',' << real(r.norm_f1) << ','
       << real(r.norm_f2) << ',' << real(r.s) << ',' << r.p << ',' << r.q << ','
       << r.step_kind << ',' << r.j << ',' << real(r.mu) << ','
       << real(r.step_norm) << '\n';
  }
}

}  // namespace stratgn
