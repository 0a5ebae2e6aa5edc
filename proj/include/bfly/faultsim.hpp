#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bfly/rng.hpp"
#include "bfly/topology.hpp"

namespace bfly {

/// Redundant-channel abstraction: delta independent channels, the sender
/// uses a random k-subset, the adversary controls a random c-subset.
struct ChannelModel {
  int delta = 1;
  int k = 1;
  int c = 0;
};

void validate(const ChannelModel& model);

/// Probability that every chosen channel is compromised,
/// C(c, k) / C(delta, k), evaluated in log space. Zero when k > c.
double p_failure_exact(const ChannelModel& model);

/// Asymptotic regime of p_failure_exact with k = alpha*delta and
/// c = beta*delta held at fixed fractions.
struct StirlingParams {
  double alpha = 0.25;
  double beta = 0.5;
  int delta = 16;
};

/// Closed-form large-delta approximation:
/// sqrt(beta(1-alpha))/sqrt(beta-alpha) * [((beta-alpha)/(1-alpha))^alpha *
/// (beta/(beta-alpha))^beta * (1-alpha)]^delta, in log space.
/// Requires 0 < alpha < beta <= 1; anything else throws domain_error.
double p_failure_stirling(const StirlingParams& params);

enum class TrialOutcome : std::uint8_t {
  AcceptedClean,
  DetectedError,
  UndetectedFailure,
};

struct Trial {
  TrialOutcome outcome = TrialOutcome::AcceptedClean;
  int compromised_chosen = 0;  // channels both chosen and compromised
};

/// One random round: sender draws a uniform k-subset, the adversary an
/// independent uniform c-subset. Failure iff the sender's subset is fully
/// contained in the adversary's.
Trial simulate_trial(const ChannelModel& model, SplitMix64& rng);

struct FaultReport {
  long long trials = 0;
  long long accepted_clean = 0;
  long long detected_error = 0;
  long long undetected_failure = 0;
  double estimate = 0.0;   // undetected_failure / trials
  double exact = 0.0;      // channel-model prediction
  double stderr_est = 0.0; // sqrt(estimate*(1-estimate)/trials)
  std::uint64_t seed = 0;
};

/// Aggregates independent trials. Each trial draws its random stream from
/// (seed, trial index), so the report is identical for any worker count.
FaultReport monte_carlo(const ChannelModel& model, long long trials,
                        std::uint64_t seed, int workers = 1);

/// Receiver-side handling of redundant message copies.
struct MessageCopy {
  std::string payload;
  int channel = 0;
};

enum class Decision : std::uint8_t { Accept, Detect, Correct };

struct DecideResult {
  Decision decision = Decision::Detect;
  std::string payload;  // set for Accept and Correct
};

/// Accepts only when every expected channel delivered an identical payload.
/// Otherwise detects, unless `correct_mode` is set and a payload holds a
/// strict majority of the expected count, in which case that payload is
/// returned as a correction. Duplicate channel ids signal misrouting and
/// throw ProtocolError.
DecideResult receive_and_decide(std::span<const MessageCopy> copies,
                                std::span<const int> expected_channels,
                                bool correct_mode = false);

/// Network-level attack rounds on the butterfly: the adversary compromises
/// c nodes of a minimum vertex cut (one designated crossing per constructed
/// route), the sender sends copies along k of the 2^h routes, compromised
/// routes deliver a consistent forged payload, and the receiver applies
/// receive_and_decide. The report carries the matching channel-model
/// prediction with delta = 2^h.
FaultReport network_simulate(const ButterflyGraph& g, NodeId v, NodeId w,
                             int h, int k, int c, long long trials,
                             std::uint64_t seed, int workers = 1);

}  // namespace bfly
