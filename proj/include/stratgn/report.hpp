#pragma once

#include <cmath>

#include "stratgn/io.hpp"
#include "stratgn/regularity.hpp"
#include "stratgn/solver.hpp"

namespace stratgn {

/// Non-finite values become null.
inline Json real_json(double v) {
  return std::isfinite(v) ? Json(v) : Json(nullptr);
}

inline Json config_to_json(const SolverConfig& c) {
  return Json{{"tol", c.tol},           {"delta", c.delta},
              {"eta", c.eta},           {"rho", c.rho},
              {"max-iter", c.max_iter}, {"jmax", c.j_max},
              {"mu-min", c.mu_min},     {"mu-max", c.mu_max},
              {"zero-tol", c.zero_tol}, {"seed", c.seed}};
}

inline Json result_to_json(const SolveResult& r, const SolverConfig& config) {
  return Json{{"version", kVersion},
              {"status", to_string(r.status)},
              {"x", detail::vector_json(r.z.x)},
              {"y", detail::packed_json(r.z.y)},
              {"phi", r.phi},
              {"s", real_json(r.s)},
              {"iterations", r.iterations},
              {"delta", config.delta},
              {"delta_final", real_json(r.delta_final)},
              {"config", config_to_json(config)}};
}

inline Json condition_json(const ConditionResult& c) {
  return Json{{"verdict", to_string(c.verdict)}, {"margin", real_json(c.margin)}};
}

inline Json report_to_json(const RegularityReport& r) {
  return Json{{"version", kVersion},
              {"W-SOC", condition_json(r.wsoc)},
              {"W-SRCQ", condition_json(r.wsrcq)},
              {"CN", condition_json(r.cn)},
              {"S-SOSC", condition_json(r.ssosc)},
              {"SONC", condition_json(r.sonc)},
              {"SRCQ", condition_json(r.srcq)},
              {"ied", {{"p", r.ied.p},
                       {"q", r.ied.q},
                       {"eigenvalues", detail::vector_json(r.ied.eigenvalues)}}},
              {"sigma_min_dF", real_json(r.sigma_min_dF)}};
}

}  // namespace stratgn
