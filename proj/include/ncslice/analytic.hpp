#pragma once

// Closed-form delay/goodput models for both reliability schemes, plus the
// exact Poisson-binomial oracle used to check the Poisson approximation.

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncslice/errors.hpp"
#include "ncslice/protocols.hpp"

namespace ncslice::analytic {

using protocols::ceil_count;

struct DelayPmf {
  std::vector<std::pair<double, double>> support;  // (delay in slots, probability)
  double failure_mass = 0.0;

  double total() const noexcept {
    double s = failure_mass;
    for (const auto& [d, p] : support) s += p;
    return s;
  }

  double mean_delivered() const noexcept {
    double num = 0.0, den = 0.0;
    for (const auto& [d, p] : support) {
      num += d * p;
      den += p;
    }
    return den > 0.0 ? num / den : 0.0;
  }

  void validate(double tol = 1e-9) const {
    double prev = -INFINITY;
    for (const auto& [d, p] : support) {
      if (p < 0.0) throw ContractViolation("negative probability in delay pmf");
      if (!(d > prev)) throw ContractViolation("delay pmf support not strictly increasing");
      prev = d;
    }
    if (failure_mass < 0.0 || std::abs(total() - 1.0) > tol)
      throw ContractViolation("delay pmf does not sum to 1");
  }
};

struct RlncAnalyticInputs {
  std::size_t k = 5;
  double gamma1 = 1.2;
  double gamma2 = 2.0;
  double p_bar = 0.1;
  std::size_t n_links = 1;
  double rtt = 16.0;

  double lambda() const noexcept { return static_cast<double>(k) * gamma1 * p_bar; }
};

inline double poisson_pmf(std::size_t n, double lambda) {
  if (lambda <= 0.0) return n == 0 ? 1.0 : 0.0;
  const auto x = static_cast<double>(n);
  return std::exp(x * std::log(lambda) - lambda - std::lgamma(x + 1.0));
}

// Number of losses the initial block absorbs before any DoF goes missing.
inline std::size_t loss_cutoff(std::size_t k, double gamma1) {
  return ceil_count((gamma1 - 1.0) * static_cast<double>(k));
}

// Poisson approximation of the missing-DoF distribution after the initial
// block; index m in [0, k]. Mass beyond the last index is the Poisson tail.
inline std::vector<double> missing_dof_pmf(const RlncAnalyticInputs& in) {
  if (!(in.p_bar >= 0.0 && in.p_bar <= 1.0)) throw ConfigError("p_bar must lie in [0, 1]");
  if (!(in.gamma1 >= 1.0)) throw ConfigError("gamma1 must be >= 1");
  const double lambda = in.lambda();
  const std::size_t c = loss_cutoff(in.k, in.gamma1);
  std::vector<double> pmf(in.k + 1, 0.0);
  for (std::size_t n = 0; n <= c; ++n) pmf[0] += poisson_pmf(n, lambda);
  for (std::size_t m = 1; m <= in.k; ++m) pmf[m] = poisson_pmf(c + m, lambda);
  return pmf;
}

inline double residual_mass(const std::vector<double>& pmf) {
  double s = 0.0;
  for (double p : pmf) s += p;
  return std::max(0.0, 1.0 - s);
}

// Exact counterpart: ceil(k*gamma1) packets sent round-robin over the links,
// failures counted by a Poisson-binomial recursion and folded with the same cutoff.
inline std::vector<double> missing_dof_exact(std::size_t k, double gamma1,
                                             const std::vector<double>& link_probs) {
  if (link_probs.empty()) throw ConfigError("need at least one link");
  const std::size_t n = ceil_count(static_cast<double>(k) * gamma1);
  std::vector<double> fails(n + 1, 0.0);
  fails[0] = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double p = link_probs[j % link_probs.size()];
    for (std::size_t f = j + 1; f > 0; --f) fails[f] = fails[f] * (1.0 - p) + fails[f - 1] * p;
    fails[0] *= 1.0 - p;
  }
  const std::size_t c = loss_cutoff(k, gamma1);
  std::vector<double> pmf(k + 1, 0.0);
  for (std::size_t f = 0; f <= n; ++f) pmf[f <= c ? 0 : std::min(k, f - c)] += fails[f];
  return pmf;
}

// Total variation between two pmfs on the same index set; any unassigned
// mass of either side counts as a separate outcome.
inline double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::max(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    s += std::abs(x - y);
  }
  s += std::abs(residual_mass(a) - residual_mass(b));
  return 0.5 * s;
}

// Mean delivery delay of a generation. The repair ceiling is averaged term by
// term over m; the Poisson tail past m = k is counted at m = k.
inline double rlnc_expected_delay(const RlncAnalyticInputs& in) {
  if (in.n_links < 1) throw ConfigError("slice needs at least one link");
  const auto P = static_cast<double>(in.n_links);
  auto pmf = missing_dof_pmf(in);
  pmf.back() += residual_mass(pmf);
  const double first = std::ceil(static_cast<double>(ceil_count(static_cast<double>(in.k) * in.gamma1)) / P);
  double d = (in.rtt / 2.0 + first) * pmf[0];
  for (std::size_t m = 1; m <= in.k; ++m) {
    const double repair =
        std::ceil(static_cast<double>(ceil_count(static_cast<double>(m) * in.gamma2)) / P);
    d += (1.5 * in.rtt + first + repair) * pmf[m];
  }
  return d;
}

inline double rlnc_expected_goodput(const RlncAnalyticInputs& in) {
  const auto pmf = missing_dof_pmf(in);
  const auto k = static_cast<double>(in.k);
  double g = 0.0;
  for (std::size_t m = 0; m <= in.k; ++m)
    g += k / (k * in.gamma1 + static_cast<double>(m) * in.gamma2) * pmf[m];
  return g * static_cast<double>(in.n_links);
}

// ---------------------------------------------------------------------------

using AttemptProb = std::function<double(std::size_t)>;  // 1-based attempt -> erasure prob

inline AttemptProb halving_model(double p_bar) {
  return [p_bar](std::size_t i) { return std::ldexp(p_bar, 1 - static_cast<int>(i)); };
}

inline DelayPmf arq_delay_pmf(double p_bar, double rtt, std::size_t max_k = 64) {
  DelayPmf d;
  double pk = 1.0;
  for (std::size_t k = 0; k <= max_k; ++k) {
    d.support.emplace_back(rtt / 2.0 + static_cast<double>(k) * rtt, pk * (1.0 - p_bar));
    pk *= p_bar;
  }
  d.failure_mass = pk;
  return d;
}

inline DelayPmf harq_delay_pmf(const AttemptProb& p_of_attempt, double rtt, std::size_t max_k = 64) {
  DelayPmf d;
  double prod = 1.0;
  for (std::size_t k = 0; k <= max_k; ++k) {
    const double p = p_of_attempt(k + 1);
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("attempt erasure probability outside [0, 1]");
    d.support.emplace_back(rtt / 2.0 + static_cast<double>(k) * rtt, (1.0 - p) * prod);
    prod *= p;
  }
  d.failure_mass = prod;
  return d;
}

// Probability that a whole HARQ round fails.
inline double harq_round_failure(double p_bar, std::size_t max_harq_tx = 4,
                                 protocols::ErasureModel model = protocols::ErasureModel::halving) {
  double pe = 1.0;
  for (std::size_t i = 1; i <= max_harq_tx; ++i)
    pe *= protocols::harq_effective_prob(p_bar, i, max_harq_tx, model);
  return pe;
}

inline DelayPmf baseline_delay_pmf(double p_bar, double rtt, std::size_t max_harq_tx = 4,
                                   std::size_t max_retx_threshold = 8,
                                   protocols::ErasureModel model = protocols::ErasureModel::halving) {
  if (max_harq_tx < 1 || max_retx_threshold < 1) throw ConfigError("HARQ/ARQ limits must be >= 1");
  const double pe = harq_round_failure(p_bar, max_harq_tx, model);
  DelayPmf d;
  for (std::size_t k = 0; k < max_harq_tx * max_retx_threshold; ++k) {
    const std::size_t r = k / max_harq_tx;
    const std::size_t kr = k % max_harq_tx;
    double prod = 1.0;
    for (std::size_t i = 1; i <= kr; ++i) prod *= protocols::harq_effective_prob(p_bar, i, max_harq_tx, model);
    const double succ = 1.0 - protocols::harq_effective_prob(p_bar, kr + 1, max_harq_tx, model);
    d.support.emplace_back(rtt / 2.0 + static_cast<double>(k) * rtt,
                           succ * std::pow(pe, static_cast<double>(r)) * prod);
  }
  d.failure_mass = std::pow(pe, static_cast<double>(max_retx_threshold));
  return d;
}

// Share of transmissions that are HARQ attempt i (0-based), from the expected
// number of times each attempt index is reached per packet.
inline std::vector<double> attempt_mix(double p_bar, std::size_t max_harq_tx = 4,
                                       std::size_t max_retx_threshold = 8,
                                       protocols::ErasureModel model = protocols::ErasureModel::halving) {
  const double pe = harq_round_failure(p_bar, max_harq_tx, model);
  double rounds = 0.0;
  for (std::size_t r = 0; r < max_retx_threshold; ++r) rounds += std::pow(pe, static_cast<double>(r));
  std::vector<double> mix(max_harq_tx, 0.0);
  double reach = 1.0, total = 0.0;
  for (std::size_t i = 0; i < max_harq_tx; ++i) {
    mix[i] = rounds * reach;
    total += mix[i];
    reach *= protocols::harq_effective_prob(p_bar, i + 1, max_harq_tx, model);
  }
  for (auto& m : mix) m /= total;
  return mix;
}

// Expected successes per slot with every link busy.
inline double baseline_expected_goodput(const std::vector<double>& link_probs,
                                        const std::vector<double>& mix,
                                        protocols::ErasureModel model = protocols::ErasureModel::halving) {
  double g = 0.0;
  for (double p : link_probs)
    for (std::size_t i = 0; i < mix.size(); ++i)
      g += mix[i] * (1.0 - protocols::harq_effective_prob(p, i + 1, mix.size(), model));
  return g;
}

// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const DelayPmf& d) {
  nlohmann::json support = nlohmann::json::array();
  for (const auto& [delay, p] : d.support) support.push_back({{"delay", delay}, {"p", p}});
  return {{"support", support}, {"failure_mass", d.failure_mass}};
}

inline nlohmann::json to_json(const RlncAnalyticInputs& in) {
  return {{"k", in.k},           {"gamma1", in.gamma1}, {"gamma2", in.gamma2}, {"p_bar", in.p_bar},
          {"n_links", in.n_links}, {"rtt", in.rtt},     {"lambda", in.lambda()}};
}

inline nlohmann::json formula_record(const std::string& name, nlohmann::json inputs, nlohmann::json value) {
  return {{"formula", name}, {"inputs", std::move(inputs)}, {"value", std::move(value)}};
}

}  // namespace ncslice::analytic
