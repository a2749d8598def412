#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "myopic/channel_model.hpp"

namespace myopic {

/// Thrown by structural_init when the false-alarm rate violates the bound
/// under which the round-robin structure is guaranteed.
class StructureUnavailable : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

/*------------------------------------------------------------------------------------------------*/

/// A cyclic arrangement of the channels 0..N-1. The starting point carries no
/// meaning: equality holds between any two rotations.
class CircularOrder
{
public:
  explicit CircularOrder(std::vector<Channel> channels);

  static CircularOrder identity(std::size_t n);

  std::size_t size() const noexcept { return channels_.size(); }

  /// The channels as stored, starting from an arbitrary representative.
  const std::vector<Channel>& channels() const noexcept { return channels_; }

  bool contains(Channel c) const noexcept { return c < position_.size(); }

  /// Successor of `c` in the cyclic order.
  Channel next(Channel c) const;

  CircularOrder reverse() const;

  /// The order listed from `c` onwards.
  std::vector<Channel> starting_at(Channel c) const;

  friend bool operator==(const CircularOrder& a, const CircularOrder& b);

private:
  std::vector<Channel> channels_;
  std::vector<std::size_t> position_;
};

struct PolicyDecision
{
  Channel action;
};

/// State of the observation-driven round-robin policy. `slot` is the slot in
/// which `current_channel` is sensed.
struct StructuralPolicyState
{
  CircularOrder base_order;
  Channel current_channel;
  std::size_t slot;
  CorrelationSign sign;
  /// Set when some initial belief lies outside the band; the slot-2 action
  /// after a NAK in slot 1 then depends on `transient_rank`.
  bool transient_pending;
  /// One-based rank of the slot-1 NAK posterior among the other initial
  /// beliefs (1 when it is the largest).
  std::size_t transient_rank;

  /// C(slot): the base order, reversed on even slots for negative correlation.
  CircularOrder effective_order() const;
};

/*------------------------------------------------------------------------------------------------*/

/// Index of the largest belief, lowest index on ties.
PolicyDecision myopic_action(const BeliefVector& omega);

/// Channels whose belief is within `tolerance` of the maximum.
std::vector<Channel> argmax_set(const BeliefVector& omega, double tolerance);

/// Channels sorted by descending belief; ties keep ascending index.
std::vector<Channel> descending_order(const BeliefVector& omega);

StructuralPolicyState structural_init(const BeliefVector& omega1, const ChannelModel& model);

std::pair<StructuralPolicyState, PolicyDecision> structural_step(const StructuralPolicyState& state,
                                                                 Observation obs);

struct TransientCorrection
{
  /// Slot-2 action, as a zero-based rank in the descending order of the
  /// initial beliefs.
  Channel action;
  /// Corrected base order in the same rank labels.
  CircularOrder order;
};

/// Slot-2 action and corrected base order after a NAK in slot 1 when the
/// initial belief vector has transient entries. `rank` is one-based.
TransientCorrection transient_slot2_action(std::size_t rank, CorrelationSign sign, std::size_t n);

/*------------------------------------------------------------------------------------------------*/

/// Per-run state of a policy. A run consumes one ACK/NAK per slot together
/// with the channel that was actually sensed; `clone` lets tree walks branch
/// on the observation.
class PolicyState
{
public:
  virtual ~PolicyState() = default;
  virtual Channel action() const = 0;
  virtual void observe(Channel sensed, Observation obs) = 0;
  virtual std::unique_ptr<PolicyState> clone() const = 0;
};

class Policy
{
public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<PolicyState> start(const BeliefVector& omega1,
                                             const ChannelModel& model) const = 0;
};

/// Argmax of the tracked belief vector.
class MyopicArgmaxPolicy final : public Policy
{
public:
  std::string name() const override { return "myopic-argmax"; }
  std::unique_ptr<PolicyState> start(const BeliefVector& omega1,
                                     const ChannelModel& model) const override;
};

/// Round-robin realisation of the myopic policy. Uses only the initial order
/// and the ACK/NAK bits.
class StructuralPolicy final : public Policy
{
public:
  std::string name() const override { return "structural"; }
  std::unique_ptr<PolicyState> start(const BeliefVector& omega1,
                                     const ChannelModel& model) const override;
};

/// Uniformly random channel, drawn from a hash of the seed and the observation
/// history so the policy is a deterministic function of that history.
class RandomPolicy final : public Policy
{
public:
  explicit RandomPolicy(std::uint64_t seed) : seed_{seed} {}
  std::string name() const override { return "random"; }
  std::unique_ptr<PolicyState> start(const BeliefVector& omega1,
                                     const ChannelModel& model) const override;

private:
  std::uint64_t seed_;
};

class FixedPolicy final : public Policy
{
public:
  explicit FixedPolicy(Channel channel) : channel_{channel} {}
  std::string name() const override { return "fixed:" + std::to_string(channel_ + 1); }
  std::unique_ptr<PolicyState> start(const BeliefVector& omega1,
                                     const ChannelModel& model) const override;

private:
  Channel channel_;
};

/// Builds a policy from its CLI name: "myopic-argmax", "structural", "random"
/// or "fixed:<k>" with one-based k.
std::unique_ptr<Policy> make_policy(std::string_view name, std::uint64_t seed = 0);

/*------------------------------------------------------------------------------------------------*/

struct Divergence
{
  /// Observations received in slots 1..slot-1.
  std::vector<Observation> path;
  std::size_t slot;
  BeliefVector belief;
  Channel action_a;
  Channel action_b;
};

struct EquivalenceReport
{
  bool agree = true;
  std::size_t paths = 0;
  std::size_t decisions = 0;
  /// Decisions where the actions differ but the beliefs of both chosen
  /// channels are within the tie tolerance.
  std::size_t ties = 0;
  std::optional<Divergence> first_divergence;
};

struct EquivalenceOptions
{
  double tie_tolerance = 1e-12;
  /// Slots before this one are not compared.
  std::size_t first_checked_slot = 1;
};

/// Walks every observation sequence of length horizon-1 with exact belief
/// tracking and compares the two policies slot by slot. The walk follows the
/// actions of `policy_a`; a path stops at its first divergence.
EquivalenceReport equivalent_actions(const Policy& policy_a, const Policy& policy_b,
                                     const BeliefVector& omega1, const ChannelModel& model,
                                     std::size_t horizon, const EquivalenceOptions& options = {});

} // namespace myopic
