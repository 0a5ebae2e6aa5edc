#include "bfly/faultsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "bfly/errors.hpp"
#include "bfly/routing.hpp"
#include "bfly/trust.hpp"

namespace bfly {

void validate(const ChannelModel& model) {
  if (model.delta < 1) {
    throw std::invalid_argument("channel count delta must be positive");
  }
  if (model.k < 1 || model.k > model.delta) {
    throw std::invalid_argument("copies sent k must satisfy 1 <= k <= delta");
  }
  if (model.c < 0 || model.c > model.delta) {
    throw std::invalid_argument("compromised count c must satisfy 0 <= c <= delta");
  }
}

double p_failure_exact(const ChannelModel& model) {
  validate(model);
  if (model.k > model.c) return 0.0;
  if (model.c == model.delta) return 1.0;
  if (model.delta <= 20) {
    // Small models: integer falling products keep the ratio exact.
    std::uint64_t num = 1, den = 1;
    for (int i = 0; i < model.k; ++i) {
      num *= static_cast<std::uint64_t>(model.c - i);
      den *= static_cast<std::uint64_t>(model.delta - i);
    }
    return static_cast<double>(num) / static_cast<double>(den);
  }
  // C(c, k) / C(delta, k) in log space; stays finite for delta ~ 1e4.
  const double log_p = std::lgamma(model.c + 1.0) +
                       std::lgamma(model.delta - model.k + 1.0) -
                       std::lgamma(model.delta + 1.0) -
                       std::lgamma(model.c - model.k + 1.0);
  return std::min(1.0, std::exp(log_p));
}

double p_failure_stirling(const StirlingParams& params) {
  const double a = params.alpha;
  const double b = params.beta;
  if (!(a > 0.0) || !(b <= 1.0) || !(a < b)) {
    throw std::domain_error("stirling approximation requires 0 < alpha < beta <= 1");
  }
  if (params.delta < 1) {
    throw std::domain_error("stirling approximation requires delta >= 1");
  }
  const double log_base = a * (std::log(b - a) - std::log1p(-a)) +
                          b * (std::log(b) - std::log(b - a)) + std::log1p(-a);
  const double log_prefactor =
      0.5 * (std::log(b) + std::log1p(-a) - std::log(b - a));
  return std::exp(log_prefactor + params.delta * log_base);
}

namespace {

/// Floyd's uniform k-subset of [0, n) as a bitmask; n <= 64.
std::uint64_t sample_mask(SplitMix64& rng, int n, int k) {
  std::uint64_t mask = 0;
  for (int i = n - k; i < n; ++i) {
    const auto r = static_cast<int>(rng.below(std::uint64_t(i) + 1));
    const std::uint64_t bit = std::uint64_t(1) << r;
    if (mask & bit) {
      mask |= std::uint64_t(1) << i;
    } else {
      mask |= bit;
    }
  }
  return mask;
}

Trial classify_masks(std::uint64_t sender, std::uint64_t adversary) {
  Trial trial;
  trial.compromised_chosen = std::popcount(sender & adversary);
  if ((sender & adversary) == 0) {
    trial.outcome = TrialOutcome::AcceptedClean;
  } else if ((sender & ~adversary) == 0) {
    trial.outcome = TrialOutcome::UndetectedFailure;
  } else {
    trial.outcome = TrialOutcome::DetectedError;
  }
  return trial;
}

}  // namespace

Trial simulate_trial(const ChannelModel& model, SplitMix64& rng) {
  validate(model);
  if (model.delta <= 64) {
    const std::uint64_t sender = sample_mask(rng, model.delta, model.k);
    const std::uint64_t adversary =
        model.c == 0 ? 0 : sample_mask(rng, model.delta, model.c);
    return classify_masks(sender, adversary);
  }
  // Wide variant for delta beyond one machine word.
  std::vector<int> perm(model.delta);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::uint8_t> compromised(model.delta, 0);
  for (int i = 0; i < model.c; ++i) {
    const auto j = i + static_cast<int>(rng.below(std::uint64_t(model.delta - i)));
    std::swap(perm[i], perm[j]);
    compromised[perm[i]] = 1;
  }
  std::iota(perm.begin(), perm.end(), 0);
  int hit = 0;
  for (int i = 0; i < model.k; ++i) {
    const auto j = i + static_cast<int>(rng.below(std::uint64_t(model.delta - i)));
    std::swap(perm[i], perm[j]);
    hit += compromised[perm[i]];
  }
  Trial trial;
  trial.compromised_chosen = hit;
  trial.outcome = hit == 0 ? TrialOutcome::AcceptedClean
                 : hit == model.k ? TrialOutcome::UndetectedFailure
                                  : TrialOutcome::DetectedError;
  return trial;
}

namespace {

struct Tally {
  long long clean = 0;
  long long detected = 0;
  long long failed = 0;
};

/// Runs trials [begin, end), each on its own derived stream, so any
/// partition over workers accumulates the same totals.
template <typename TrialFn>
Tally run_range(long long begin, long long end, std::uint64_t seed,
                const TrialFn& fn) {
  Tally tally;
  for (long long t = begin; t < end; ++t) {
    SplitMix64 rng = derive_stream(seed, static_cast<std::uint64_t>(t));
    switch (fn(rng)) {
      case TrialOutcome::AcceptedClean: ++tally.clean; break;
      case TrialOutcome::DetectedError: ++tally.detected; break;
      case TrialOutcome::UndetectedFailure: ++tally.failed; break;
    }
  }
  return tally;
}

template <typename TrialFn>
FaultReport run_trials(long long trials, std::uint64_t seed, int workers,
                       const TrialFn& fn) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (workers < 1) workers = 1;
  Tally total;
  if (workers == 1) {
    total = run_range(0, trials, seed, fn);
  } else {
    std::vector<Tally> parts(workers);
    std::vector<std::thread> pool;
    const long long chunk = (trials + workers - 1) / workers;
    for (int wi = 0; wi < workers; ++wi) {
      const long long begin = wi * chunk;
      const long long end = std::min(trials, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, wi, begin, end] {
        parts[wi] = run_range(begin, end, seed, fn);
      });
    }
    for (auto& th : pool) th.join();
    for (const Tally& part : parts) {
      total.clean += part.clean;
      total.detected += part.detected;
      total.failed += part.failed;
    }
  }
  FaultReport report;
  report.trials = trials;
  report.accepted_clean = total.clean;
  report.detected_error = total.detected;
  report.undetected_failure = total.failed;
  report.estimate = static_cast<double>(total.failed) / static_cast<double>(trials);
  report.stderr_est =
      std::sqrt(report.estimate * (1.0 - report.estimate) / static_cast<double>(trials));
  report.seed = seed;
  return report;
}

}  // namespace

FaultReport monte_carlo(const ChannelModel& model, long long trials,
                        std::uint64_t seed, int workers) {
  validate(model);
  FaultReport report = run_trials(trials, seed, workers, [&](SplitMix64& rng) {
    return simulate_trial(model, rng).outcome;
  });
  report.exact = p_failure_exact(model);
  return report;
}

DecideResult receive_and_decide(std::span<const MessageCopy> copies,
                                std::span<const int> expected_channels,
                                bool correct_mode) {
  std::unordered_set<int> expected(expected_channels.begin(),
                                   expected_channels.end());
  std::unordered_set<int> seen;
  for (const MessageCopy& copy : copies) {
    if (!seen.insert(copy.channel).second) {
      throw ProtocolError("duplicate copy on channel " +
                          std::to_string(copy.channel));
    }
    if (!expected.contains(copy.channel)) {
      throw ProtocolError("copy on unexpected channel " +
                          std::to_string(copy.channel));
    }
  }
  const bool all_present = seen.size() == expected.size();
  const bool all_agree =
      !copies.empty() &&
      std::all_of(copies.begin(), copies.end(), [&](const MessageCopy& c) {
        return c.payload == copies.front().payload;
      });
  if (all_present && all_agree) {
    return {Decision::Accept, copies.front().payload};
  }
  if (correct_mode) {
    std::map<std::string, std::size_t> votes;
    for (const MessageCopy& copy : copies) ++votes[copy.payload];
    for (const auto& [payload, count] : votes) {
      if (2 * count > expected.size()) return {Decision::Correct, payload};
    }
  }
  return {Decision::Detect, {}};
}

FaultReport network_simulate(const ButterflyGraph& g, NodeId v, NodeId w,
                             int h, int k, int c, long long trials,
                             std::uint64_t seed, int workers) {
  const auto routes = multipath_routes(g, v, w, h);
  const int route_count = static_cast<int>(routes.size());
  if (k < 1 || k > route_count) {
    throw std::invalid_argument("k must satisfy 1 <= k <= 2^h");
  }

  const auto cut =
      min_vertex_cut(g, g.index_of(v), g.index_of(w), TrustRadius{h});
  std::unordered_set<NodeId> cut_nodes;
  for (VertexIndex i : cut) cut_nodes.insert(g.node_at(i));

  // One designated cut crossing per route: compromising it tampers exactly
  // that route, so c compromised nodes remove exactly c channels.
  std::vector<NodeId> pool;
  pool.reserve(route_count);
  std::unordered_set<NodeId> taken;
  for (const Route& route : routes) {
    NodeId designated{-1, 0};
    for (NodeId u : route.nodes) {
      if (cut_nodes.contains(u)) {
        designated = u;
        break;
      }
    }
    if (designated.level < 0) {
      throw std::logic_error("route does not cross the minimum cut");
    }
    if (!taken.insert(designated).second) {
      throw std::logic_error("routes share a cut crossing");
    }
    pool.push_back(designated);
  }
  if (c < 0 || c > static_cast<int>(pool.size())) {
    throw std::invalid_argument("c must satisfy 0 <= c <= |cut pool|");
  }

  // Which adversary picks tamper which routes; with designated crossings the
  // relation is one-to-one, verified against full route membership here.
  std::vector<std::uint64_t> route_hits(route_count, 0);
  for (int r = 0; r < route_count; ++r) {
    std::unordered_set<NodeId> members(routes[r].nodes.begin(),
                                       routes[r].nodes.end());
    for (int p = 0; p < route_count; ++p) {
      if (members.contains(pool[p])) route_hits[r] |= std::uint64_t(1) << p;
    }
    if (route_hits[r] != (std::uint64_t(1) << r)) {
      throw std::logic_error("cut crossings are not one-to-one with routes");
    }
  }

  const std::string clean_payload = "payload";
  const std::string forged_payload = "forged";
  auto trial_fn = [&](SplitMix64& rng) {
    const std::uint64_t adversary =
        c == 0 ? 0 : sample_mask(rng, route_count, c);
    const std::uint64_t chosen = sample_mask(rng, route_count, k);
    std::vector<MessageCopy> copies;
    std::vector<int> expected;
    copies.reserve(k);
    expected.reserve(k);
    for (int r = 0; r < route_count; ++r) {
      if ((chosen >> r) & 1) {
        const bool tampered = (adversary & route_hits[r]) != 0;
        copies.push_back({tampered ? forged_payload : clean_payload, r});
        expected.push_back(r);
      }
    }
    const DecideResult decision = receive_and_decide(copies, expected, false);
    if (decision.decision == Decision::Accept) {
      return decision.payload == clean_payload ? TrialOutcome::AcceptedClean
                                               : TrialOutcome::UndetectedFailure;
    }
    return TrialOutcome::DetectedError;
  };

  FaultReport report = run_trials(trials, seed, workers, trial_fn);
  report.exact = p_failure_exact({route_count, k, c});
  return report;
}

}  // namespace bfly
