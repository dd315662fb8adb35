#include "resid/estimator.hpp"

#include <cmath>
#include <stdexcept>

#include "resid/errors.hpp"

namespace resid {

const char* to_string(EstimateStatus s) {
  switch (s) {
    case EstimateStatus::interior: return "interior";
    case EstimateStatus::boundary_low: return "boundary_low";
    case EstimateStatus::boundary_high: return "boundary_high";
    case EstimateStatus::undefined: return "undefined";
  }
  return "?";
}

void SolverConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw std::invalid_argument("epsilon must be in (0, 0.5)");
  }
  if (!(tolerance > 0.0)) {
    throw std::invalid_argument("tolerance must be positive");
  }
  if (max_iterations <= 0) {
    throw std::invalid_argument("max_iterations must be positive");
  }
}

Estimate maximize_by_score(const std::function<double(double)>& score_fn,
                           const SolverConfig& config) {
  config.validate();
  double lo = config.epsilon;
  double hi = 1.0 - config.epsilon;

  const double s_hi = score_fn(hi);
  if (s_hi >= 0.0) {
    return {hi, EstimateStatus::boundary_high, 0, hi - lo};
  }
  const double s_lo = score_fn(lo);
  if (s_lo <= 0.0) {
    return {lo, EstimateStatus::boundary_low, 0, hi - lo};
  }

  // score(lo) > 0 > score(hi): the unique root is bracketed
  int iterations = 0;
  while (hi - lo > config.tolerance) {
    if (iterations >= config.max_iterations) throw SolverError(lo, hi);
    const double mid = 0.5 * (lo + hi);
    const double s_mid = score_fn(mid);
    ++iterations;
    if (s_mid > 0.0) {
      lo = mid;
    } else if (s_mid < 0.0) {
      hi = mid;
    } else {
      lo = hi = mid;
      break;
    }
  }
  return {0.5 * (lo + hi), EstimateStatus::interior, iterations, hi - lo};
}

Estimate estimate_mle(const SufficientStats& stats, const ModelParams& params,
                      const SolverConfig& config) {
  params.validate();
  if (stats.m == 0) return {std::nullopt, EstimateStatus::undefined, 0, 0.0};
  return maximize_by_score([&](double p) { return score(stats, params, p); }, config);
}

Estimate estimate_mle(const PerLineStats& stats, const ModelParams& params,
                      const SolverConfig& config) {
  params.validate();
  if (stats.m == 0) return {std::nullopt, EstimateStatus::undefined, 0, 0.0};
  return maximize_by_score([&](double p) { return per_line_score(stats, params, p); },
                           config);
}

Estimate estimate_mle(const PerClassStats& stats, const ModelParams& params,
                      const SolverConfig& config) {
  params.validate();
  std::uint64_t m_total = 0;
  for (const auto& [label, class_stats] : stats) m_total += class_stats.m;
  if (m_total == 0) return {std::nullopt, EstimateStatus::undefined, 0, 0.0};
  return maximize_by_score([&](double p) { return per_class_score(stats, params, p); },
                           config);
}

std::map<std::string, double> chunk_unreliability(
    double p_hat, const std::map<std::string, std::uint32_t>& debug_counts,
    const ModelParams& params, const std::map<std::string, std::string>& class_labels) {
  if (!(std::isfinite(p_hat) && p_hat > 0.0 && p_hat < 1.0)) {
    throw std::domain_error("p_hat must be in (0,1)");
  }
  std::map<std::string, double> scores;
  for (const auto& [chunk, d] : debug_counts) {
    double alpha = params.alpha;
    if (params.variant == Variant::per_class) {
      auto it = class_labels.find(chunk);
      alpha = params.alpha_for(it == class_labels.end() ? std::string() : it->second);
    }
    scores[chunk] = p_hat * power_int(alpha, d);
  }
  return scores;
}

}  // namespace resid
