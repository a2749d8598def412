#include "myopic/policy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace myopic {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

} // namespace

/*------------------------------------------------------------------------------------------------*/

CircularOrder::CircularOrder(std::vector<Channel> channels)
  : channels_{std::move(channels)}
  , position_(channels_.size(), channels_.size())
{
  for (std::size_t k = 0; k < channels_.size(); ++k)
  {
    const Channel c = channels_[k];
    if (c >= channels_.size() || position_[c] != channels_.size())
      throw std::invalid_argument("circular order must be a permutation of 0..N-1");
    position_[c] = k;
  }
}

CircularOrder CircularOrder::identity(std::size_t n)
{
  std::vector<Channel> channels(n);
  std::iota(channels.begin(), channels.end(), Channel{0});
  return CircularOrder(std::move(channels));
}

Channel CircularOrder::next(Channel c) const
{
  if (!contains(c))
    throw std::out_of_range("channel is not part of the circular order");
  return channels_[(position_[c] + 1) % channels_.size()];
}

CircularOrder CircularOrder::reverse() const
{
  return CircularOrder(std::vector<Channel>(channels_.rbegin(), channels_.rend()));
}

std::vector<Channel> CircularOrder::starting_at(Channel c) const
{
  if (!contains(c))
    throw std::out_of_range("channel is not part of the circular order");
  std::vector<Channel> out;
  out.reserve(channels_.size());
  for (std::size_t k = 0; k < channels_.size(); ++k)
    out.push_back(channels_[(position_[c] + k) % channels_.size()]);
  return out;
}

bool operator==(const CircularOrder& a, const CircularOrder& b)
{
  if (a.size() != b.size())
    return false;
  if (a.size() == 0)
    return true;
  return a.starting_at(0) == b.starting_at(0);
}

CircularOrder StructuralPolicyState::effective_order() const
{
  if (sign == CorrelationSign::Negative && slot % 2 == 0)
    return base_order.reverse();
  return base_order;
}

/*------------------------------------------------------------------------------------------------*/

PolicyDecision myopic_action(const BeliefVector& omega)
{
  if (omega.empty())
    throw std::domain_error("myopic action of an empty belief vector");
  Channel best = 0;
  for (Channel i = 1; i < omega.size(); ++i)
    if (omega[i] > omega[best])
      best = i;
  return {best};
}

std::vector<Channel> argmax_set(const BeliefVector& omega, double tolerance)
{
  const double top = omega[myopic_action(omega).action];
  std::vector<Channel> out;
  for (Channel i = 0; i < omega.size(); ++i)
    if (omega[i] >= top - tolerance)
      out.push_back(i);
  return out;
}

std::vector<Channel> descending_order(const BeliefVector& omega)
{
  std::vector<Channel> order(omega.size());
  std::iota(order.begin(), order.end(), Channel{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Channel a, Channel b) { return omega[a] > omega[b]; });
  return order;
}

StructuralPolicyState structural_init(const BeliefVector& omega1, const ChannelModel& model)
{
  if (omega1.empty())
    throw std::domain_error("structural policy needs at least one channel");
  const auto bound = epsilon_bound(model);
  if (!bound.satisfied)
    throw StructureUnavailable("false-alarm rate " + std::to_string(model.epsilon()) +
                               " is not below the structure bound " +
                               std::to_string(bound.bound));

  auto ranking = descending_order(omega1);
  const Channel head = ranking.front();

  const bool transient = std::any_of(omega1.begin(), omega1.end(),
                                     [&](double w) { return is_transient(w, model); });
  std::size_t rank = 1;
  if (transient)
  {
    // Posterior of the first sensed channel after a NAK, before propagation.
    const double w = omega1[head];
    const double nak = model.epsilon() * w + (1.0 - w);
    if (nak > 0.0)
    {
      const double x = model.epsilon() * w / nak;
      for (std::size_t k = 1; k < ranking.size(); ++k)
        if (omega1[ranking[k]] > x)
          ++rank;
    }
  }

  return StructuralPolicyState{CircularOrder(std::move(ranking)), head, 1, model.sign(),
                               transient, rank};
}

TransientCorrection transient_slot2_action(std::size_t rank, CorrelationSign sign, std::size_t n)
{
  if (n == 0 || rank < 1 || rank > n)
    throw std::domain_error("transient rank must lie in 1..N");

  // (2, 3, ..., r, 1, r+1, ..., N) in one-based labels; identity when r = 1.
  std::vector<Channel> order;
  order.reserve(n);
  for (std::size_t k = 1; k < rank; ++k)
    order.push_back(k);
  order.push_back(0);
  for (std::size_t k = rank; k < n; ++k)
    order.push_back(k);

  Channel action = 0;
  if (sign == CorrelationSign::Positive)
    action = rank == 1 ? 0 : 1;
  else
    action = rank == n ? 0 : n - 1;

  return {action, CircularOrder(std::move(order))};
}

std::pair<StructuralPolicyState, PolicyDecision> structural_step(const StructuralPolicyState& state,
                                                                 Observation obs)
{
  StructuralPolicyState next = state;
  next.slot = state.slot + 1;

  if (state.transient_pending && state.slot == 1 && obs == Observation::Nak)
  {
    const auto& ranking = state.base_order.channels();
    const auto fix = transient_slot2_action(state.transient_rank, state.sign, ranking.size());
    std::vector<Channel> relabelled;
    relabelled.reserve(ranking.size());
    for (Channel k : fix.order.channels())
      relabelled.push_back(ranking[k]);
    next.base_order = CircularOrder(std::move(relabelled));
    next.current_channel = ranking[fix.action];
    next.transient_pending = false;
    return {next, {next.current_channel}};
  }
  next.transient_pending = false;

  const bool stay = state.sign == CorrelationSign::Positive ? obs == Observation::Ack
                                                            : obs == Observation::Nak;
  if (!stay)
    next.current_channel = next.effective_order().next(state.current_channel);
  return {next, {next.current_channel}};
}

/*------------------------------------------------------------------------------------------------*/

namespace {

class ArgmaxState final : public PolicyState
{
public:
  ArgmaxState(BeliefVector omega, ChannelModel model)
    : omega_{std::move(omega)}
    , model_{model}
  {}

  Channel action() const override { return myopic_action(omega_).action; }

  void observe(Channel sensed, Observation obs) override
  {
    omega_ = belief_update(omega_, sensed, obs, model_);
  }

  std::unique_ptr<PolicyState> clone() const override
  {
    return std::make_unique<ArgmaxState>(*this);
  }

private:
  BeliefVector omega_;
  ChannelModel model_;
};

class StructuralRun final : public PolicyState
{
public:
  explicit StructuralRun(StructuralPolicyState state) : state_{std::move(state)} {}

  Channel action() const override { return state_.current_channel; }

  void observe(Channel, Observation obs) override { state_ = structural_step(state_, obs).first; }

  std::unique_ptr<PolicyState> clone() const override
  {
    return std::make_unique<StructuralRun>(*this);
  }

private:
  StructuralPolicyState state_;
};

class RandomRun final : public PolicyState
{
public:
  RandomRun(std::uint64_t key, std::size_t n) : key_{key}, n_{n} {}

  Channel action() const override { return splitmix64(key_) % n_; }

  void observe(Channel, Observation obs) override
  {
    key_ = splitmix64(key_ ^ (obs == Observation::Ack ? 0xa5a5a5a5a5a5a5a5ULL : 0x5a5a5a5a5a5a5a5aULL));
  }

  std::unique_ptr<PolicyState> clone() const override { return std::make_unique<RandomRun>(*this); }

private:
  std::uint64_t key_;
  std::size_t n_;
};

class FixedRun final : public PolicyState
{
public:
  explicit FixedRun(Channel channel) : channel_{channel} {}
  Channel action() const override { return channel_; }
  void observe(Channel, Observation) override {}
  std::unique_ptr<PolicyState> clone() const override { return std::make_unique<FixedRun>(*this); }

private:
  Channel channel_;
};

} // namespace

std::unique_ptr<PolicyState> MyopicArgmaxPolicy::start(const BeliefVector& omega1,
                                                       const ChannelModel& model) const
{
  if (omega1.empty())
    throw std::domain_error("policy needs at least one channel");
  return std::make_unique<ArgmaxState>(omega1, model);
}

std::unique_ptr<PolicyState> StructuralPolicy::start(const BeliefVector& omega1,
                                                     const ChannelModel& model) const
{
  return std::make_unique<StructuralRun>(structural_init(omega1, model));
}

std::unique_ptr<PolicyState> RandomPolicy::start(const BeliefVector& omega1, const ChannelModel&) const
{
  if (omega1.empty())
    throw std::domain_error("policy needs at least one channel");
  return std::make_unique<RandomRun>(splitmix64(seed_), omega1.size());
}

std::unique_ptr<PolicyState> FixedPolicy::start(const BeliefVector& omega1, const ChannelModel&) const
{
  if (channel_ >= omega1.size())
    throw std::domain_error("fixed channel " + std::to_string(channel_ + 1) +
                            " exceeds the number of channels");
  return std::make_unique<FixedRun>(channel_);
}

std::unique_ptr<Policy> make_policy(std::string_view name, std::uint64_t seed)
{
  if (name == "myopic-argmax" || name == "myopic")
    return std::make_unique<MyopicArgmaxPolicy>();
  if (name == "structural")
    return std::make_unique<StructuralPolicy>();
  if (name == "random")
    return std::make_unique<RandomPolicy>(seed);
  if (name.starts_with("fixed:"))
  {
    const auto digits = name.substr(6);
    std::size_t k = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || k == 0)
      throw std::invalid_argument("fixed policy needs a one-based channel, got '" +
                                  std::string(name) + "'");
    return std::make_unique<FixedPolicy>(k - 1);
  }
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

/*------------------------------------------------------------------------------------------------*/

namespace {

struct EquivalenceWalk
{
  const ChannelModel& model;
  std::size_t horizon;
  const EquivalenceOptions& options;
  EquivalenceReport report;
  std::vector<Observation> path;

  void walk(const PolicyState& a, const PolicyState& b, const BeliefVector& omega, std::size_t slot)
  {
    if (!report.agree)
      return;

    const Channel act_a = a.action();
    const Channel act_b = b.action();
    if (slot >= options.first_checked_slot)
    {
      ++report.decisions;
      if (act_a != act_b)
      {
        if (std::abs(omega[act_a] - omega[act_b]) <= options.tie_tolerance)
          ++report.ties;
        else
        {
          report.agree = false;
          report.first_divergence = Divergence{path, slot, omega, act_a, act_b};
          return;
        }
      }
    }

    if (slot == horizon)
    {
      ++report.paths;
      return;
    }

    const double p_ack = ack_probability(omega[act_a], model);
    for (Observation obs : {Observation::Nak, Observation::Ack})
    {
      const double weight = obs == Observation::Ack ? p_ack : 1.0 - p_ack;
      if (weight <= 0.0)
        continue;
      auto next_a = a.clone();
      auto next_b = b.clone();
      next_a->observe(act_a, obs);
      next_b->observe(act_a, obs);
      path.push_back(obs);
      walk(*next_a, *next_b, belief_update(omega, act_a, obs, model), slot + 1);
      path.pop_back();
    }
  }
};

} // namespace

EquivalenceReport equivalent_actions(const Policy& policy_a, const Policy& policy_b,
                                     const BeliefVector& omega1, const ChannelModel& model,
                                     std::size_t horizon, const EquivalenceOptions& options)
{
  if (horizon < 1)
    throw std::domain_error("horizon must be at least 1");
  EquivalenceWalk w{model, horizon, options, {}, {}};
  auto a = policy_a.start(omega1, model);
  auto b = policy_b.start(omega1, model);
  w.walk(*a, *b, omega1, 1);
  return w.report;
}

} // namespace myopic
