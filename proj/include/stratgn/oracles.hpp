#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "stratgn/errors.hpp"
#include "stratgn/kkt.hpp"
#include "stratgn/model.hpp"
#include "stratgn/spectral.hpp"

namespace stratgn {

/// Difference quotients (Π₊(R_M(A, tH)) − Π₊(A)) / t for each t.
inline std::vector<SymMatrix> fd_curve_derivative(const Ied& ied_a,
                                                  const SymMatrix& h,
                                                  const std::vector<double>& ts) {
  const SymMatrix base = project_psd(ied_a);
  std::vector<SymMatrix> out;
  out.reserve(ts.size());
  for (const double t : ts) {
    const auto r = retract_fixed_inertia(ied_a, t * h);
    if (!r) {
      throw Error("retraction left the stratum at t = " + std::to_string(t));
    }
    out.push_back((project_psd(make_ied(*r)) - base) * (1.0 / t));
  }
  return out;
}

/// One-sided quotients (φ(z + tv) − φ(z)) / t for each t.
inline std::vector<double> fd_phi_dir(const NlsdpProblem& problem,
                                      const PrimalDualPoint& z,
                                      const AmbientVector& v,
                                      const std::vector<double>& ts) {
  const double phi0 = merit(problem, z);
  std::vector<double> out;
  out.reserve(ts.size());
  for (const double t : ts) {
    const PrimalDualPoint zt{z.x + t * v.vx, z.y + t * v.vy};
    out.push_back((merit(problem, zt) - phi0) / t);
  }
  return out;
}

namespace detail {

/// Eigenvalues of a symmetric matrix of order ≤ 3 from the characteristic
/// polynomial, nonincreasing.
inline std::vector<double> closed_form_eigenvalues(const Matrix& a) {
  const auto n = a.rows();
  if (n == 1) {
    return {a(0, 0)};
  }
  if (n == 2) {
    const double mean = 0.5 * (a(0, 0) + a(1, 1));
    const double half = 0.5 * (a(0, 0) - a(1, 1));
    const double r = std::hypot(half, a(0, 1));
    return {mean + r, mean - r};
  }
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  const double q = a.trace() / 3.0;
  const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                    (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  if (p == 0.0) {
    return {q, q, q};
  }
  const Matrix b = (a - q * Matrix::Identity(3, 3)) / p;
  const double r = std::clamp(b.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  return {e1, 3.0 * q - e1 - e3, e3};
}

}  // namespace detail

/**
 * PSD projection for n ≤ 3 without the library eigensolver: eigenvalues from
 * the characteristic polynomial, spectral projectors from Sylvester's formula
 * Eₖ = Πⱼ≠ₖ (A − μⱼI)/(μₖ − μⱼ) over distinct eigenvalues μ.
 */
inline SymMatrix brute_projection(const SymMatrix& a) {
  const int n = a.order();
  if (n < 1 || n > 3) {
    throw InputError("A", "brute projection supports orders 1 to 3");
  }
  const Matrix dense = a.dense();
  const std::vector<double> ev = detail::closed_form_eigenvalues(dense);
  const double scale = std::max(1.0, std::abs(ev.front()) + std::abs(ev.back()));
  std::vector<double> mu;
  for (const double e : ev) {
    if (mu.empty() || std::abs(mu.back() - e) > 1e-7 * scale) {
      mu.push_back(e);
    }
  }
  const Matrix id = Matrix::Identity(n, n);
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (mu[k] <= 0.0) {
      continue;
    }
    Matrix e = id;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      if (j != k) {
        e = e * (dense - mu[j] * id) / (mu[k] - mu[j]);
      }
    }
    out += mu[k] * e;
  }
  return SymMatrix::from_dense(out);
}

enum class RateVerdict { kQuadratic, kSuperlinear, kLinear, kInconclusive };

inline const char* to_string(RateVerdict v) {
  switch (v) {
    case RateVerdict::kQuadratic:
      return "quadratic";
    case RateVerdict::kSuperlinear:
      return "superlinear";
    case RateVerdict::kLinear:
      return "linear";
    case RateVerdict::kInconclusive:
      return "inconclusive";
  }
  return "unknown";
}

struct RateEstimate {
  std::vector<double> distances;
  std::vector<double> linear_ratios;
  std::vector<double> quadratic_ratios;
  RateVerdict verdict = RateVerdict::kInconclusive;
};

/**
 * Classifies the tail of d_k = ‖z^k − z*‖. Distances below 1e−14 are dropped;
 * the verdict uses the last three ratios: quadratic when linear ratios are at
 * most 0.3 and decreasing and quadratic ratios stay within 100× their median.
 */
inline RateEstimate estimate_rate(const std::vector<double>& distances) {
  RateEstimate est;
  for (const double d : distances) {
    if (d >= 1e-14) {
      est.distances.push_back(d);
    }
  }
  for (std::size_t k = 0; k + 1 < est.distances.size(); ++k) {
    const double d0 = est.distances[k];
    const double d1 = est.distances[k + 1];
    est.linear_ratios.push_back(d1 / d0);
    est.quadratic_ratios.push_back(d1 / (d0 * d0));
  }
  if (est.linear_ratios.size() < 2) {
    return est;
  }
  const std::size_t count = std::min<std::size_t>(3, est.linear_ratios.size());
  const std::vector<double> lin(est.linear_ratios.end() - static_cast<long>(count),
                                est.linear_ratios.end());
  const std::vector<double> quad(
      est.quadratic_ratios.end() - static_cast<long>(count),
      est.quadratic_ratios.end());
  bool small_and_decreasing = true;
  for (std::size_t k = 0; k < count; ++k) {
    if (lin[k] > 0.3 || (k > 0 && lin[k] > lin[k - 1])) {
      small_and_decreasing = false;
    }
  }
  std::vector<double> sorted = quad;
  std::sort(sorted.begin(), sorted.end());
  const double median = count % 2 ? sorted[count / 2]
                                  : 0.5 * (sorted[count / 2 - 1] + sorted[count / 2]);
  const bool bounded = std::all_of(quad.begin(), quad.end(),
                                   [&](double r) { return r <= 100.0 * median; });
  if (small_and_decreasing) {
    est.verdict = bounded ? RateVerdict::kQuadratic : RateVerdict::kSuperlinear;
  } else if (std::all_of(lin.begin(), lin.end(), [](double r) { return r < 1.0; })) {
    est.verdict = RateVerdict::kLinear;
  }
  return est;
}

}  // namespace stratgn
