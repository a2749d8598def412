#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "myopic/channel_model.hpp"
#include "myopic/policy.hpp"

namespace myopic {

/// Memoisation identity of a belief node: the slot and every entry rounded to
/// twelve decimal digits.
struct BeliefKey
{
  std::size_t slot;
  std::vector<std::int64_t> entries;

  /// With `canonical` set the entries are sorted, which identifies belief
  /// vectors that differ only by a relabelling of the channels.
  static BeliefKey make(std::size_t slot, const BeliefVector& omega, bool canonical);

  friend bool operator==(const BeliefKey&, const BeliefKey&) = default;
};

struct BeliefKeyHash
{
  std::size_t operator()(const BeliefKey& key) const noexcept;
};

/// Value of one action at a node, split by observation.
struct ActionBranch
{
  double immediate;     ///< omega_a (1 - eps)
  double ack_weight;    ///< probability of ACK
  double ack_value;     ///< optimal continuation after ACK (0 on the last slot)
  double nak_value;     ///< optimal continuation after NAK
  double total;
};

struct ValueEntry
{
  double value;
  std::vector<Channel> optimal_actions;
  std::vector<ActionBranch> branches;
};

struct PlannerOptions
{
  bool memoize = true;
  /// Actions within this distance of the maximum count as optimal.
  double action_tolerance = 1e-12;
};

/// Exact finite-horizon dynamic program over the reachable belief tree.
///
/// The value function is symmetric under channel relabelling, so the memo is
/// keyed on sorted beliefs. Observation branches of zero probability are
/// neither expanded nor counted.
class Planner
{
public:
  Planner(ChannelModel model, std::size_t horizon, PlannerOptions options = {});

  const ChannelModel& model() const noexcept { return model_; }
  std::size_t horizon() const noexcept { return horizon_; }

  /// V_t(omega) with the per-action decomposition.
  ValueEntry optimal_value(const BeliefVector& omega, std::size_t t);

  /// V_t(omega) alone.
  double value(const BeliefVector& omega, std::size_t t);

  /// Expected remaining reward from slot t of the myopic-argmax policy. Memoised.
  double myopic_value(const BeliefVector& omega, std::size_t t);

  /// V^_t(omega) - V^_t(omega; a) for every action a, where V^_t(omega; a)
  /// plays a in slot t and the myopic policy afterwards.
  std::vector<double> myopic_action_gap(const BeliefVector& omega, std::size_t t);

  /// Belief nodes expanded: interior nodes missing from the memo plus every
  /// terminal-slot evaluation.
  std::size_t node_count() const noexcept;

  void clear();

  /// Largest channel count the planner accepts.
  static constexpr std::size_t kMaxChannels = 8;

private:
  using Beliefs = std::array<double, kMaxChannels>;

  struct NodeKey
  {
    std::size_t slot;
    std::array<std::int64_t, kMaxChannels> entries;
    friend bool operator==(const NodeKey&, const NodeKey&) = default;
  };

  struct NodeKeyHash
  {
    std::size_t operator()(const NodeKey& key) const noexcept;
  };

  double value_of(const Beliefs& omega, std::size_t n, std::size_t t);
  double q_of(const Beliefs& omega, std::size_t n, Channel a, std::size_t t);
  void successor(const Beliefs& omega, std::size_t n, Channel a, Observation obs, Beliefs& out) const;
  double q_value(const BeliefVector& omega, Channel a, std::size_t t, bool myopic_continuation);

  ChannelModel model_;
  std::size_t horizon_;
  PlannerOptions options_;
  std::unordered_map<NodeKey, double, NodeKeyHash> memo_;
  std::unordered_map<BeliefKey, double, BeliefKeyHash> myopic_memo_;
  std::size_t evaluations_ = 0;
  std::size_t terminal_evaluations_ = 0;
};

/// Convenience wrapper over a fresh planner.
ValueEntry optimal_value(const BeliefVector& omega, std::size_t t, std::size_t horizon,
                         const ChannelModel& model, PlannerOptions options = {});

struct PolicyValue
{
  double value;
  /// Nodes of the policy's observation tree that were expanded.
  std::size_t nodes;
};

/// Expected total reward over slots 1..horizon of `policy` started at omega1.
PolicyValue policy_value(const Policy& policy, const BeliefVector& omega1, std::size_t horizon,
                         const ChannelModel& model);

/// Expected remaining reward from slot t of a running policy at belief omega.
PolicyValue policy_value_from(const PolicyState& state, const BeliefVector& omega, std::size_t t,
                              std::size_t horizon, const ChannelModel& model);

/*------------------------------------------------------------------------------------------------*/

/// Joint state of two channels in the previous slot.
using JointState2 = std::array<int, 2>;

struct ConditionalValue
{
  std::size_t t;
  Channel prev_action;
  JointState2 prev_state;
  double value;
};

/// Expected myopic reward over slots t..T for two channels, conditioned on the
/// action and joint state of slot t-1. Follows the round-robin rule of the
/// model's correlation sign; the belief vector does not enter.
ConditionalValue conditional_myopic_value(Channel prev_action, JointState2 prev_state, std::size_t t,
                                          std::size_t horizon, const ChannelModel& model);

/// Table of conditional values for t = 1..T+1, indexed [t][prev_action][s1][s2].
class ConditionalValueTable
{
public:
  ConditionalValueTable(const ChannelModel& model, std::size_t horizon);
  double operator()(std::size_t t, Channel prev_action, JointState2 prev_state) const;
  std::size_t horizon() const noexcept { return horizon_; }

private:
  std::size_t horizon_;
  std::vector<std::array<std::array<double, 4>, 2>> table_;
};

/*------------------------------------------------------------------------------------------------*/

/// Exact expected reward over slots t..T of a policy that was at belief
/// omega_prev in slot t-1, conditioned on the joint channel state of slot t-1.
/// Computed by summing over hidden channel states, not over beliefs.
double conditional_policy_value(const Policy& policy, const BeliefVector& omega_prev,
                                const std::vector<int>& prev_state, std::size_t t,
                                std::size_t horizon, const ChannelModel& model);

/// Optimal value found by enumerating every observation-history-contingent
/// policy tree and evaluating each over the hidden channel states. Refuses
/// instances beyond N <= 3, T <= 3 (N <= 2: T <= 4).
double brute_force_optimal(const BeliefVector& omega, std::size_t horizon, const ChannelModel& model);

} // namespace myopic
