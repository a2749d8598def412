#include "myopic/simulator.hpp"

#include <cmath>
#include <ostream>

namespace myopic {

namespace {

std::uint64_t mix(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

} // namespace

Rng::Rng(std::uint64_t seed)
  : engine_{mix(seed)}
{}

Rng Rng::stream(std::uint64_t master_seed, std::uint64_t index)
{
  return Rng(mix(master_seed) ^ mix(index + 0x632be59bd9b4e019ULL));
}

double Rng::uniform()
{
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

const char* event_label(AccessEvent event)
{
  switch (event)
  {
    case AccessEvent::Success: return "i";
    case AccessEvent::FalseAlarm: return "ii";
    case AccessEvent::Idle: return "iii";
    case AccessEvent::Collision: return "iv";
  }
  return "?";
}

std::vector<int> step_channels(const std::vector<int>& states, const ChannelModel& model, Rng& rng)
{
  std::vector<int> next(states.size());
  for (std::size_t i = 0; i < states.size(); ++i)
  {
    if (states[i] != 0 && states[i] != 1)
      throw std::domain_error("channel state must be 0 or 1");
    const double p_good = states[i] == 1 ? model.p11() : model.p01();
    next[i] = rng.bernoulli(p_good) ? 1 : 0;
  }
  return next;
}

AccessOutcome sense_and_access(int state, const ChannelModel& model, Rng& rng)
{
  if (state != 0 && state != 1)
    throw std::domain_error("channel state must be 0 or 1");
  const double u = rng.uniform();
  if (state == 1)
  {
    if (u < 1.0 - model.epsilon())
      return {Decision::H0, true, AccessEvent::Success, Observation::Ack, 1};
    return {Decision::H1, false, AccessEvent::FalseAlarm, Observation::Nak, 0};
  }
  if (u < model.delta())
    return {Decision::H0, true, AccessEvent::Collision, Observation::Nak, 0};
  return {Decision::H1, false, AccessEvent::Idle, Observation::Nak, 0};
}

/*------------------------------------------------------------------------------------------------*/

int EpisodeTrace::total_reward() const
{
  int total = 0;
  for (const auto& s : slots)
    total += s.outcome.reward;
  return total;
}

BeliefVector SimConfig::initial_omega() const
{
  if (initial_belief)
  {
    if (initial_belief->size() != channels)
      throw std::domain_error("initial belief length differs from the channel count");
    return *initial_belief;
  }
  return BeliefVector(std::vector<double>(channels, stationary_belief(model)));
}

namespace {

template <typename OnSlot>
int simulate(const SimConfig& config, const Policy& policy, std::size_t episode, OnSlot&& on_slot)
{
  if (config.horizon < 1)
    throw std::domain_error("horizon must be at least 1");
  const auto omega = config.initial_omega();
  Rng rng = Rng::stream(config.seed, episode);

  std::vector<int> states(config.channels);
  for (std::size_t i = 0; i < config.channels; ++i)
    states[i] = rng.bernoulli(omega[i]) ? 1 : 0;

  auto run = policy.start(omega, config.model);
  int total = 0;
  for (std::size_t t = 1; t <= config.horizon; ++t)
  {
    const Channel a = run->action();
    const auto outcome = sense_and_access(states[a], config.model, rng);
    total += outcome.reward;
    on_slot(SlotRecord{t, states, a, outcome});
    run->observe(a, outcome.observation);
    states = step_channels(states, config.model, rng);
  }
  return total;
}

} // namespace

EpisodeTrace run_episode(const SimConfig& config, const Policy& policy, std::size_t episode)
{
  EpisodeTrace trace;
  trace.slots.reserve(config.horizon);
  simulate(config, policy, episode, [&](SlotRecord r) { trace.slots.push_back(std::move(r)); });
  return trace;
}

std::vector<int> episode_totals(const SimConfig& config, const Policy& policy)
{
  std::vector<int> totals(config.episodes);
  for (std::size_t e = 0; e < config.episodes; ++e)
    totals[e] = simulate(config, policy, e, [](const SlotRecord&) {});
  return totals;
}

ThroughputEstimate estimate_throughput(const SimConfig& config, const Policy& policy)
{
  if (config.episodes < 2)
    throw std::domain_error("throughput estimate needs at least two episodes");
  const auto totals = episode_totals(config, policy);
  const double n = static_cast<double>(totals.size());
  double sum = 0.0;
  for (int x : totals)
    sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (int x : totals)
    ss += (x - mean) * (x - mean);
  const double variance = ss / (n - 1.0);
  return {mean, std::sqrt(variance / n), totals.size()};
}

/*------------------------------------------------------------------------------------------------*/

nlohmann::json slot_to_json(std::size_t episode, const SlotRecord& record)
{
  return nlohmann::json{{"episode", episode},
                        {"slot", record.slot},
                        {"states", record.states},
                        {"action", record.action + 1},
                        {"decision", record.outcome.decision == Decision::H0 ? "H0" : "H1"},
                        {"transmitted", record.outcome.transmitted},
                        {"event", event_label(record.outcome.event)},
                        {"ack", record.outcome.observation == Observation::Ack ? 1 : 0},
                        {"reward", record.outcome.reward}};
}

void write_trace_jsonl(std::ostream& os, std::size_t episode, const EpisodeTrace& trace)
{
  for (const auto& r : trace.slots)
    os << slot_to_json(episode, r).dump() << '\n';
}

void write_totals_csv(std::ostream& os, const std::vector<int>& totals)
{
  os << "episode,total_reward\n";
  for (std::size_t e = 0; e < totals.size(); ++e)
    os << e << ',' << totals[e] << '\n';
}

} // namespace myopic
