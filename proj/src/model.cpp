#include "resid/model.hpp"

#include <cmath>
#include <stdexcept>

namespace resid {

namespace {

void check_p(double p) {
  if (!std::isfinite(p) || p <= 0.0 || p >= 1.0) {
    throw std::domain_error("p must be a finite value in (0,1), got " + std::to_string(p));
  }
}

void check_alpha(double alpha, const char* what) {
  if (!std::isfinite(alpha) || alpha <= 0.0 || alpha >= 1.0) {
    throw std::invalid_argument(std::string(what) + " must be in (0,1), got " +
                                std::to_string(alpha));
  }
}

}  // namespace

const char* to_string(Variant v) {
  switch (v) {
    case Variant::homogeneous: return "homogeneous";
    case Variant::per_line: return "per-line";
    case Variant::per_class: return "per-class";
  }
  return "?";
}

Variant variant_from_string(std::string_view s) {
  if (s == "homogeneous") return Variant::homogeneous;
  if (s == "per-line" || s == "per_line") return Variant::per_line;
  if (s == "per-class" || s == "per_class") return Variant::per_class;
  throw std::invalid_argument("unknown variant '" + std::string(s) + "'");
}

const char* to_string(MleDiagnosis d) {
  switch (d) {
    case MleDiagnosis::interior_guaranteed: return "interior_guaranteed";
    case MleDiagnosis::boundary_high: return "boundary_high";
    case MleDiagnosis::undefined: return "undefined";
    case MleDiagnosis::undetermined: return "undetermined";
  }
  return "?";
}

double ModelParams::alpha_for(const std::string& class_label) const {
  auto it = class_alphas.find(class_label);
  return it == class_alphas.end() ? alpha : it->second;
}

void ModelParams::validate() const {
  check_alpha(alpha, "alpha");
  for (const auto& [label, a] : class_alphas) {
    check_alpha(a, ("class alpha for '" + label + "'").c_str());
  }
  if (variant == Variant::per_class && class_alphas.empty()) {
    throw std::invalid_argument("per-class variant requires at least one class alpha");
  }
}

void SufficientStats::add_success(std::uint32_t debug_count, std::uint64_t times) {
  if (times > 0) n[debug_count] += times;
}

std::uint32_t SufficientStats::k() const {
  return n.empty() ? 0 : n.rbegin()->first;
}

std::uint64_t SufficientStats::traversals() const {
  std::uint64_t total = 0;
  for (const auto& [i, count] : n) total += count;
  return total;
}

double power_int(double base, std::uint32_t exponent) {
  double r = 1.0;
  for (std::uint32_t j = 0; j < exponent; ++j) r *= base;
  return r;
}

double log_likelihood(const SufficientStats& stats, const ModelParams& params, double p) {
  check_p(p);
  double ll = stats.m == 0 ? 0.0 : static_cast<double>(stats.m) * std::log(p);
  for (const auto& [i, count] : stats.n) {
    if (count == 0) continue;
    // log(1 - p alpha^i) via log1p keeps precision for small p alpha^i
    ll += static_cast<double>(count) * std::log1p(-p * power_int(params.alpha, i));
  }
  return ll;
}

double score(const SufficientStats& stats, const ModelParams& params, double p) {
  check_p(p);
  double s = stats.m == 0 ? 0.0 : static_cast<double>(stats.m) / p;
  for (const auto& [i, count] : stats.n) {
    if (count == 0) continue;
    const double ai = power_int(params.alpha, i);
    s -= static_cast<double>(count) * ai / (1.0 - p * ai);
  }
  return s;
}

double per_line_log_likelihood(const PerLineStats& stats, const ModelParams& params,
                               double p) {
  check_p(p);
  double ll = stats.m == 0 ? 0.0 : static_cast<double>(stats.m) * std::log(p);
  const double log1mp = std::log1p(-p);
  for (const auto& s : stats.successes) {
    // q = 1 - (1-p)^K, the per-line bugginess of a K-line chunk
    const double q = -std::expm1(static_cast<double>(s.line_count) * log1mp);
    ll += std::log1p(-q * power_int(params.alpha, s.debug_count));
  }
  return ll;
}

double per_line_score(const PerLineStats& stats, const ModelParams& params, double p) {
  check_p(p);
  double sc = stats.m == 0 ? 0.0 : static_cast<double>(stats.m) / p;
  const double log1mp = std::log1p(-p);
  for (const auto& s : stats.successes) {
    const double K = static_cast<double>(s.line_count);
    const double ai = power_int(params.alpha, s.debug_count);
    const double q = -std::expm1(K * log1mp);
    // d/dp log(1 - q alpha^i) = -alpha^i K (1-p)^(K-1) / (1 - q alpha^i)
    const double pow_km1 = std::exp((K - 1.0) * log1mp);
    sc -= ai * K * pow_km1 / (1.0 - q * ai);
  }
  return sc;
}

double per_class_log_likelihood(const PerClassStats& stats, const ModelParams& params,
                                double p) {
  check_p(p);
  double ll = 0.0;
  for (const auto& [label, class_stats] : stats) {
    ModelParams single = params;
    single.alpha = params.alpha_for(label);
    ll += log_likelihood(class_stats, single, p);
  }
  return ll;
}

double per_class_score(const PerClassStats& stats, const ModelParams& params, double p) {
  check_p(p);
  double s = 0.0;
  for (const auto& [label, class_stats] : stats) {
    ModelParams single = params;
    single.alpha = params.alpha_for(label);
    s += score(class_stats, single, p);
  }
  return s;
}

MleDiagnosis mle_diagnosis(const SufficientStats& stats, const ModelParams& params,
                           double epsilon) {
  params.validate();
  if (stats.m == 0) return MleDiagnosis::undefined;
  for (const auto& [i, count] : stats.n) {
    // n_i > alpha^-i - 1 rewritten as (n_i + 1) alpha^i > 1 to avoid overflow
    if (count > 0 &&
        (static_cast<double>(count) + 1.0) * power_int(params.alpha, i) > 1.0) {
      return MleDiagnosis::interior_guaranteed;
    }
  }
  if (score(stats, params, 1.0 - epsilon) >= 0.0) return MleDiagnosis::boundary_high;
  return MleDiagnosis::undetermined;
}

}  // namespace resid
