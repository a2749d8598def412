#include "myopic/planner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>

namespace myopic {

namespace {

constexpr double kQuantum = 1e12;

void check_slot(std::size_t t, std::size_t horizon)
{
  if (horizon < 1)
    throw std::domain_error("horizon must be at least 1");
  if (t < 1 || t > horizon)
    throw std::domain_error("slot must lie in 1..horizon");
}

} // namespace

BeliefKey BeliefKey::make(std::size_t slot, const BeliefVector& omega, bool canonical)
{
  BeliefKey key{slot, {}};
  key.entries.reserve(omega.size());
  for (double w : omega)
    key.entries.push_back(std::llround(w * kQuantum));
  if (canonical)
    std::sort(key.entries.begin(), key.entries.end());
  return key;
}

std::size_t BeliefKeyHash::operator()(const BeliefKey& key) const noexcept
{
  std::size_t h = std::hash<std::size_t>{}(key.slot);
  for (std::int64_t e : key.entries)
    h ^= std::hash<std::int64_t>{}(e) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

/*------------------------------------------------------------------------------------------------*/

Planner::Planner(ChannelModel model, std::size_t horizon, PlannerOptions options)
  : model_{model}
  , horizon_{horizon}
  , options_{options}
{
  if (horizon_ < 1)
    throw std::domain_error("horizon must be at least 1");
}

double Planner::q_value(const BeliefVector& omega, Channel a, std::size_t t, bool myopic_continuation)
{
  const double p_ack = ack_probability(omega[a], model_);
  double q = p_ack;
  if (t == horizon_)
    return q;
  auto next = [&](Observation obs) {
    const auto b = belief_update(omega, a, obs, model_);
    return myopic_continuation ? myopic_value(b, t + 1) : value(b, t + 1);
  };
  if (p_ack > 0.0)
    q += p_ack * next(Observation::Ack);
  if (p_ack < 1.0)
    q += (1.0 - p_ack) * next(Observation::Nak);
  return q;
}

std::size_t Planner::NodeKeyHash::operator()(const NodeKey& key) const noexcept
{
  std::uint64_t h = key.slot * 0x9e3779b97f4a7c15ULL;
  for (std::int64_t e : key.entries)
  {
    h ^= static_cast<std::uint64_t>(e) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xbf58476d1ce4e5b9ULL;
  }
  return static_cast<std::size_t>(h ^ (h >> 31));
}

void Planner::successor(const Beliefs& omega, std::size_t n, Channel a, Observation obs,
                        Beliefs& out) const
{
  for (Channel i = 0; i < n; ++i)
  {
    if (i != a)
      out[i] = gamma(omega[i], model_);
    else if (obs == Observation::Ack)
      out[i] = model_.p11();
    else
      out[i] = nak_posterior(omega[i], model_);
  }
}

double Planner::q_of(const Beliefs& omega, std::size_t n, Channel a, std::size_t t)
{
  const double p_ack = ack_probability(omega[a], model_);
  double q = p_ack;
  if (t == horizon_)
    return q;
  Beliefs next{};
  if (p_ack > 0.0)
  {
    successor(omega, n, a, Observation::Ack, next);
    q += p_ack * value_of(next, n, t + 1);
  }
  if (p_ack < 1.0)
  {
    successor(omega, n, a, Observation::Nak, next);
    q += (1.0 - p_ack) * value_of(next, n, t + 1);
  }
  return q;
}

double Planner::value_of(const Beliefs& omega, std::size_t n, std::size_t t)
{
  if (t == horizon_)
  {
    ++terminal_evaluations_;
    double top = 0.0;
    for (Channel i = 0; i < n; ++i)
      top = std::max(top, omega[i]);
    return top * (1.0 - model_.epsilon());
  }

  NodeKey key{};
  if (options_.memoize)
  {
    key.slot = t;
    for (Channel i = 0; i < n; ++i)
      key.entries[i] = std::llround(omega[i] * kQuantum);
    std::sort(key.entries.begin(), key.entries.begin() + static_cast<std::ptrdiff_t>(n));
    if (auto it = memo_.find(key); it != memo_.end())
      return it->second;
  }
  ++evaluations_;

  // Channels with equal beliefs are interchangeable; evaluate one of each.
  double best = 0.0;
  for (Channel a = 0; a < n; ++a)
  {
    bool duplicate = false;
    for (Channel b = 0; b < a && !duplicate; ++b)
      duplicate = omega[b] == omega[a];
    if (!duplicate)
      best = std::max(best, q_of(omega, n, a, t));
  }

  if (options_.memoize)
    memo_.emplace(key, best);
  return best;
}

double Planner::value(const BeliefVector& omega, std::size_t t)
{
  check_slot(t, horizon_);
  if (omega.empty())
    throw std::domain_error("belief vector is empty");
  if (omega.size() > kMaxChannels)
    throw std::domain_error("planner supports at most 8 channels");
  Beliefs b{};
  std::copy(omega.begin(), omega.end(), b.begin());
  return value_of(b, omega.size(), t);
}

ValueEntry Planner::optimal_value(const BeliefVector& omega, std::size_t t)
{
  check_slot(t, horizon_);
  if (omega.empty())
    throw std::domain_error("belief vector is empty");

  ValueEntry entry{0.0, {}, {}};
  entry.branches.reserve(omega.size());
  for (Channel a = 0; a < omega.size(); ++a)
  {
    ActionBranch br{};
    br.ack_weight = ack_probability(omega[a], model_);
    br.immediate = br.ack_weight;
    if (t < horizon_)
    {
      if (br.ack_weight > 0.0)
        br.ack_value = value(belief_update(omega, a, Observation::Ack, model_), t + 1);
      if (br.ack_weight < 1.0)
        br.nak_value = value(belief_update(omega, a, Observation::Nak, model_), t + 1);
    }
    br.total = br.immediate + br.ack_weight * br.ack_value + (1.0 - br.ack_weight) * br.nak_value;
    entry.value = std::max(entry.value, br.total);
    entry.branches.push_back(br);
  }
  for (Channel a = 0; a < omega.size(); ++a)
    if (entry.branches[a].total >= entry.value - options_.action_tolerance)
      entry.optimal_actions.push_back(a);
  return entry;
}

double Planner::myopic_value(const BeliefVector& omega, std::size_t t)
{
  check_slot(t, horizon_);
  auto key = BeliefKey::make(t, omega, false);
  if (auto it = myopic_memo_.find(key); it != myopic_memo_.end())
    return it->second;
  const double v = q_value(omega, myopic_action(omega).action, t, true);
  myopic_memo_.emplace(std::move(key), v);
  return v;
}

std::vector<double> Planner::myopic_action_gap(const BeliefVector& omega, std::size_t t)
{
  const double base = myopic_value(omega, t);
  std::vector<double> gaps;
  gaps.reserve(omega.size());
  for (Channel a = 0; a < omega.size(); ++a)
    gaps.push_back(base - q_value(omega, a, t, true));
  return gaps;
}

std::size_t Planner::node_count() const noexcept
{
  return evaluations_ + terminal_evaluations_;
}

void Planner::clear()
{
  memo_.clear();
  myopic_memo_.clear();
  evaluations_ = 0;
  terminal_evaluations_ = 0;
}

ValueEntry optimal_value(const BeliefVector& omega, std::size_t t, std::size_t horizon,
                         const ChannelModel& model, PlannerOptions options)
{
  Planner planner(model, horizon, options);
  return planner.optimal_value(omega, t);
}

/*------------------------------------------------------------------------------------------------*/

PolicyValue policy_value_from(const PolicyState& state, const BeliefVector& omega, std::size_t t,
                              std::size_t horizon, const ChannelModel& model)
{
  check_slot(t, horizon);
  const Channel a = state.action();
  if (a >= omega.size())
    throw std::domain_error("policy chose a channel outside the belief vector");

  const double p_ack = ack_probability(omega[a], model);
  PolicyValue out{p_ack, 1};
  if (t == horizon)
    return out;

  for (Observation obs : {Observation::Ack, Observation::Nak})
  {
    const double weight = obs == Observation::Ack ? p_ack : 1.0 - p_ack;
    if (weight <= 0.0)
      continue;
    auto next = state.clone();
    next->observe(a, obs);
    const auto sub = policy_value_from(*next, belief_update(omega, a, obs, model), t + 1, horizon, model);
    out.value += weight * sub.value;
    out.nodes += sub.nodes;
  }
  return out;
}

PolicyValue policy_value(const Policy& policy, const BeliefVector& omega1, std::size_t horizon,
                         const ChannelModel& model)
{
  auto state = policy.start(omega1, model);
  return policy_value_from(*state, omega1, 1, horizon, model);
}

/*------------------------------------------------------------------------------------------------*/

namespace {

std::size_t state_index(JointState2 s)
{
  if ((s[0] != 0 && s[0] != 1) || (s[1] != 0 && s[1] != 1))
    throw std::domain_error("channel states must be 0 or 1");
  return static_cast<std::size_t>(s[0] * 2 + s[1]);
}

double transition(int from, int to, const ChannelModel& model)
{
  if (from == 1)
    return to == 1 ? model.p11() : model.p10();
  return to == 1 ? model.p01() : model.p00();
}

} // namespace

ConditionalValueTable::ConditionalValueTable(const ChannelModel& model, std::size_t horizon)
  : horizon_{horizon}
  , table_(horizon + 2)
{
  if (horizon < 1)
    throw std::domain_error("horizon must be at least 1");
  const double eps = model.epsilon();
  const bool positive = model.sign() == CorrelationSign::Positive;

  for (auto& slot : table_)
    for (auto& row : slot)
      row.fill(0.0);

  for (std::size_t t = horizon; t >= 1; --t)
  {
    for (Channel a = 0; a < 2; ++a)
      for (int s1 = 0; s1 < 2; ++s1)
        for (int s2 = 0; s2 < 2; ++s2)
        {
          const JointState2 prev{s1, s2};
          const double p_ack = prev[a] == 1 ? 1.0 - eps : 0.0;
          double v = 0.0;
          for (Observation obs : {Observation::Ack, Observation::Nak})
          {
            const double w = obs == Observation::Ack ? p_ack : 1.0 - p_ack;
            if (w <= 0.0)
              continue;
            const bool stay = positive ? obs == Observation::Ack : obs == Observation::Nak;
            const Channel b = stay ? a : 1 - a;
            double branch = 0.0;
            for (int n1 = 0; n1 < 2; ++n1)
              for (int n2 = 0; n2 < 2; ++n2)
              {
                const JointState2 next{n1, n2};
                const double pt = transition(s1, n1, model) * transition(s2, n2, model);
                branch += pt * (next[b] * (1.0 - eps) + table_[t + 1][b][state_index(next)]);
              }
            v += w * branch;
          }
          table_[t][a][state_index(prev)] = v;
        }
  }
}

double ConditionalValueTable::operator()(std::size_t t, Channel prev_action, JointState2 prev_state) const
{
  if (t < 1 || t > horizon_ + 1)
    throw std::domain_error("conditional value slot must lie in 1..T+1");
  if (prev_action > 1)
    throw std::domain_error("conditional values are defined for two channels");
  return table_[t][prev_action][state_index(prev_state)];
}

ConditionalValue conditional_myopic_value(Channel prev_action, JointState2 prev_state, std::size_t t,
                                          std::size_t horizon, const ChannelModel& model)
{
  if (prev_action > 1)
    throw std::domain_error("conditional values are only supported for two channels");
  const ConditionalValueTable table(model, horizon);
  return {t, prev_action, prev_state, table(t, prev_action, prev_state)};
}

/*------------------------------------------------------------------------------------------------*/

namespace {

/// Joint distribution over the 2^N hidden channel states, unnormalised: the
/// mass carries the probability of the observation history that led here.
class HiddenStateEngine
{
public:
  HiddenStateEngine(const ChannelModel& model, std::size_t n)
    : model_{model}
    , n_{n}
    , states_{std::size_t{1} << n}
    , transition_(states_ * states_)
  {
    for (std::size_t from = 0; from < states_; ++from)
      for (std::size_t to = 0; to < states_; ++to)
      {
        double p = 1.0;
        for (std::size_t i = 0; i < n_; ++i)
          p *= transition(bit(from, i), bit(to, i), model_);
        transition_[from * states_ + to] = p;
      }
  }

  static int bit(std::size_t s, std::size_t i) { return static_cast<int>((s >> i) & 1U); }

  std::vector<double> product_prior(const BeliefVector& omega) const
  {
    std::vector<double> p(states_);
    for (std::size_t s = 0; s < states_; ++s)
    {
      double w = 1.0;
      for (std::size_t i = 0; i < n_; ++i)
        w *= bit(s, i) ? omega[i] : 1.0 - omega[i];
      p[s] = w;
    }
    return p;
  }

  /// Expected reward of sensing channel a under mass p.
  double reward(const std::vector<double>& p, Channel a) const
  {
    double r = 0.0;
    for (std::size_t s = 0; s < states_; ++s)
      if (bit(s, a))
        r += p[s] * (1.0 - model_.epsilon());
    return r;
  }

  /// Mass conditioned on the observation for channel a, propagated one slot.
  std::vector<double> branch(const std::vector<double>& p, Channel a, Observation obs) const
  {
    std::vector<double> cond(states_);
    for (std::size_t s = 0; s < states_; ++s)
    {
      const double ack = bit(s, a) ? 1.0 - model_.epsilon() : 0.0;
      cond[s] = p[s] * (obs == Observation::Ack ? ack : 1.0 - ack);
    }
    std::vector<double> next(states_, 0.0);
    for (std::size_t from = 0; from < states_; ++from)
    {
      if (cond[from] == 0.0)
        continue;
      for (std::size_t to = 0; to < states_; ++to)
        next[to] += cond[from] * transition_[from * states_ + to];
    }
    return next;
  }

  static double mass(const std::vector<double>& p)
  {
    double m = 0.0;
    for (double x : p)
      m += x;
    return m;
  }

  double policy_reward(const PolicyState& state, const std::vector<double>& p, std::size_t t,
                       std::size_t horizon) const
  {
    const Channel a = state.action();
    double total = reward(p, a);
    if (t == horizon)
      return total;
    for (Observation obs : {Observation::Ack, Observation::Nak})
    {
      auto next = branch(p, a, obs);
      if (mass(next) <= 0.0)
        continue;
      auto s = state.clone();
      s->observe(a, obs);
      total += policy_reward(*s, next, t + 1, horizon);
    }
    return total;
  }

  /// Reward of a policy tree stored in heap order: node k has NAK child 2k+1
  /// and ACK child 2k+2.
  double tree_reward(const std::vector<Channel>& tree, std::size_t node, const std::vector<double>& p,
                     std::size_t depth_left) const
  {
    const Channel a = tree[node];
    double total = reward(p, a);
    if (depth_left == 1)
      return total;
    for (Observation obs : {Observation::Nak, Observation::Ack})
    {
      auto next = branch(p, a, obs);
      if (mass(next) <= 0.0)
        continue;
      const std::size_t child = 2 * node + (obs == Observation::Nak ? 1 : 2);
      total += tree_reward(tree, child, next, depth_left - 1);
    }
    return total;
  }

  std::size_t states() const noexcept { return states_; }

private:
  ChannelModel model_;
  std::size_t n_;
  std::size_t states_;
  std::vector<double> transition_;
};

} // namespace

double conditional_policy_value(const Policy& policy, const BeliefVector& omega_prev,
                                const std::vector<int>& prev_state, std::size_t t,
                                std::size_t horizon, const ChannelModel& model)
{
  const std::size_t n = omega_prev.size();
  if (prev_state.size() != n)
    throw std::domain_error("joint state and belief vector differ in length");
  if (t < 2 || t > horizon + 1)
    throw std::domain_error("conditional slot must lie in 2..T+1");
  if (n > 12)
    throw std::domain_error("hidden-state enumeration limited to 12 channels");

  HiddenStateEngine engine(model, n);
  std::vector<double> p(engine.states(), 0.0);
  std::size_t index = 0;
  for (std::size_t i = 0; i < n; ++i)
  {
    if (prev_state[i] != 0 && prev_state[i] != 1)
      throw std::domain_error("channel states must be 0 or 1");
    index |= static_cast<std::size_t>(prev_state[i]) << i;
  }
  p[index] = 1.0;

  if (t == horizon + 1)
    return 0.0;

  auto state = policy.start(omega_prev, model);
  const Channel a = state->action();
  double total = 0.0;
  for (Observation obs : {Observation::Ack, Observation::Nak})
  {
    auto next = engine.branch(p, a, obs);
    if (HiddenStateEngine::mass(next) <= 0.0)
      continue;
    auto s = state->clone();
    s->observe(a, obs);
    total += engine.policy_reward(*s, next, t, horizon);
  }
  return total;
}

double brute_force_optimal(const BeliefVector& omega, std::size_t horizon, const ChannelModel& model)
{
  const std::size_t n = omega.size();
  if (n == 0)
    throw std::domain_error("belief vector is empty");
  if (horizon < 1)
    throw std::domain_error("horizon must be at least 1");
  const std::size_t max_horizon = n <= 2 ? 4 : 3;
  if (n > 3 || horizon > max_horizon)
  {
    std::ostringstream os;
    os << "brute-force enumeration refused for N=" << n << ", T=" << horizon
       << ": limits are N <= 3 with T <= 3, or N <= 2 with T <= 4";
    throw std::length_error(os.str());
  }

  HiddenStateEngine engine(model, n);
  const auto prior = engine.product_prior(omega);
  const std::size_t nodes = (std::size_t{1} << horizon) - 1;

  // Odometer over all N^(2^T - 1) trees.
  std::vector<Channel> tree(nodes, 0);
  double best = -1.0;
  while (true)
  {
    best = std::max(best, engine.tree_reward(tree, 0, prior, horizon));
    std::size_t k = 0;
    while (k < nodes && ++tree[k] == n)
      tree[k++] = 0;
    if (k == nodes)
      break;
  }
  return best;
}

} // namespace myopic
