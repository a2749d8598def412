#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "json.hpp"
#include "myopic/channel_model.hpp"
#include "myopic/policy.hpp"

namespace myopic {

/// Seedable 64-bit generator. Independent streams are derived by hashing a
/// master seed with a stream index, so episode k is reproducible on its own.
class Rng
{
public:
  explicit Rng(std::uint64_t seed);

  static Rng stream(std::uint64_t master_seed, std::uint64_t index);

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();

  bool bernoulli(double p) { return uniform() < p; }

private:
  std::mt19937_64 engine_;
};

/// Detector verdict: H0 says the channel is good, H1 says it is bad.
enum class Decision { H0, H1 };

/// The four outcomes of one sensing slot.
enum class AccessEvent
{
  Success,    ///< (i) good, detected good, transmitted
  FalseAlarm, ///< (ii) good, detected bad
  Idle,       ///< (iii) bad, detected bad
  Collision,  ///< (iv) bad, detected good, failed transmission
};

const char* event_label(AccessEvent event);

struct AccessOutcome
{
  Decision decision;
  bool transmitted;
  AccessEvent event;
  Observation observation;
  int reward;
};

/// Advances every channel one slot of its Markov chain.
std::vector<int> step_channels(const std::vector<int>& states, const ChannelModel& model, Rng& rng);

/// Detection, access decision, and acknowledgement for one channel in state
/// `state` (1 good, 0 bad).
AccessOutcome sense_and_access(int state, const ChannelModel& model, Rng& rng);

/*------------------------------------------------------------------------------------------------*/

struct SlotRecord
{
  std::size_t slot;
  std::vector<int> states;
  Channel action;
  AccessOutcome outcome;
};

struct EpisodeTrace
{
  std::vector<SlotRecord> slots;
  int total_reward() const;
};

struct SimConfig
{
  ChannelModel model;
  std::size_t channels = 2;
  std::size_t horizon = 10;
  std::size_t episodes = 1000;
  std::uint64_t seed = 1;
  /// Per-channel probability of starting good. Empty means the stationary
  /// distribution of the chain.
  std::optional<BeliefVector> initial_belief;

  BeliefVector initial_omega() const;
};

/// Closed-loop run of episode `episode`: hidden states evolve, the policy sees
/// only ACK/NAK. Deterministic in (config, policy, episode).
EpisodeTrace run_episode(const SimConfig& config, const Policy& policy, std::size_t episode = 0);

struct ThroughputEstimate
{
  double mean;
  double standard_error;
  std::size_t episodes;
};

/// Sample mean and standard error of the total episode reward.
ThroughputEstimate estimate_throughput(const SimConfig& config, const Policy& policy);

/// Total reward of every episode, in episode order.
std::vector<int> episode_totals(const SimConfig& config, const Policy& policy);

nlohmann::json slot_to_json(std::size_t episode, const SlotRecord& record);

/// One JSON object per slot, one slot per line.
void write_trace_jsonl(std::ostream& os, std::size_t episode, const EpisodeTrace& trace);

/// "episode,total_reward" rows with a header line.
void write_totals_csv(std::ostream& os, const std::vector<int>& totals);

} // namespace myopic
