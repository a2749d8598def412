#include "myopic/lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <unordered_set>

#include "myopic/planner.hpp"
#include "myopic/policy.hpp"
#include "myopic/simulator.hpp"

namespace myopic::lab {

using nlohmann::json;

namespace {

std::uint64_t mix(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string path_string(const std::vector<Observation>& path)
{
  std::string s;
  for (Observation o : path)
    s += o == Observation::Ack ? 'A' : 'N';
  return s;
}

json channels_json(const std::vector<Channel>& channels)
{
  json j = json::array();
  for (Channel c : channels)
    j.push_back(c + 1);
  return j;
}

bool any_transient(const BeliefVector& omega, const ChannelModel& model)
{
  return std::any_of(omega.begin(), omega.end(), [&](double w) { return is_transient(w, model); });
}

InstanceResult skipped(const Instance& inst, std::string reason)
{
  return {inst, Verdict::Skipped, json{{"reason", std::move(reason)}}, std::nullopt};
}

} // namespace

/*------------------------------------------------------------------------------------------------*/

std::string to_string(InitMode mode)
{
  switch (mode)
  {
    case InitMode::Explicit: return "explicit";
    case InitMode::Stationary: return "stationary";
    case InitMode::RandomInBand: return "random-in-band";
    case InitMode::RandomWithTransients: return "random-with-transients";
  }
  return "?";
}

std::string to_string(SignFilter sign)
{
  switch (sign)
  {
    case SignFilter::Any: return "any";
    case SignFilter::Positive: return "positive";
    case SignFilter::Negative: return "negative";
  }
  return "?";
}

InitMode parse_init_mode(std::string_view text)
{
  for (InitMode m : {InitMode::Explicit, InitMode::Stationary, InitMode::RandomInBand,
                     InitMode::RandomWithTransients})
    if (text == to_string(m))
      return m;
  throw std::invalid_argument("unknown initial belief mode '" + std::string(text) + "'");
}

SignFilter parse_sign_filter(std::string_view text)
{
  for (SignFilter s : {SignFilter::Any, SignFilter::Positive, SignFilter::Negative})
    if (text == to_string(s))
      return s;
  throw std::invalid_argument("unknown correlation sign '" + std::string(text) + "'");
}

std::string to_string(Verdict verdict)
{
  switch (verdict)
  {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Skipped: return "skipped";
  }
  return "?";
}

void InstanceSpec::validate() const
{
  if (channels < 1 || channels_max < channels)
    throw std::invalid_argument("channel range must satisfy 1 <= n <= n-max");
  if (channels_max > Planner::kMaxChannels)
    throw std::invalid_argument("at most 8 channels are supported");
  if (horizon < 1)
    throw std::invalid_argument("horizon must be at least 1");
  if (!(p_low > 0.0 && p_high < 1.0 && p_low < p_high))
    throw std::invalid_argument("sampling range for p01, p11 must lie inside (0, 1)");
  if (!(epsilon_fraction > 0.0 && epsilon_fraction < 1.0))
    throw std::invalid_argument("epsilon fraction must lie in (0, 1)");
  if (init == InitMode::Explicit && omega.size() != channels)
    throw std::invalid_argument("explicit initial belief needs one entry per channel");
  if (init == InitMode::Explicit && channels != channels_max)
    throw std::invalid_argument("explicit initial belief needs a fixed channel count");
  if (p_high - p_low <= min_separation)
    throw std::invalid_argument("sampling range is too narrow for the separation requirement");
}

void to_json(json& j, const InstanceSpec& spec)
{
  j = json{{"n", spec.channels},
           {"n_max", spec.channels_max},
           {"horizon", spec.horizon},
           {"instances", spec.instances},
           {"seed", spec.seed},
           {"p_range", {spec.p_low, spec.p_high}},
           {"min_separation", spec.min_separation},
           {"sign", to_string(spec.sign)},
           {"epsilon_fraction", spec.epsilon_fraction},
           {"delta", spec.delta},
           {"init", to_string(spec.init)},
           {"episodes", spec.episodes}};
  j["model"] = spec.model ? json(*spec.model) : json(nullptr);
  j["epsilon"] = spec.epsilon ? json(*spec.epsilon) : json(nullptr);
  j["omega"] = spec.omega;
}

void from_json(const json& j, InstanceSpec& spec)
{
  InstanceSpec s;
  s.channels = j.value("n", s.channels);
  s.channels_max = j.value("n_max", s.channels);
  s.horizon = j.value("horizon", s.horizon);
  s.instances = j.value("instances", s.instances);
  s.seed = j.value("seed", s.seed);
  if (j.contains("p_range"))
  {
    s.p_low = j.at("p_range").at(0).get<double>();
    s.p_high = j.at("p_range").at(1).get<double>();
  }
  s.min_separation = j.value("min_separation", s.min_separation);
  if (j.contains("sign"))
    s.sign = parse_sign_filter(j.at("sign").get<std::string>());
  s.epsilon_fraction = j.value("epsilon_fraction", s.epsilon_fraction);
  s.delta = j.value("delta", s.delta);
  if (j.contains("init"))
    s.init = parse_init_mode(j.at("init").get<std::string>());
  s.episodes = j.value("episodes", s.episodes);
  if (j.contains("model") && !j.at("model").is_null())
    s.model = j.at("model").get<ChannelModel>();
  if (j.contains("epsilon") && !j.at("epsilon").is_null())
    s.epsilon = j.at("epsilon").get<double>();
  if (j.contains("omega"))
    s.omega = j.at("omega").get<std::vector<double>>();
  if (!s.omega.empty() && !j.contains("init"))
    s.init = InitMode::Explicit;
  spec = std::move(s);
}

InstanceSpec default_spec(std::string_view experiment)
{
  InstanceSpec spec;
  if (experiment == "structure")
  {
    spec.channels = 2;
    spec.channels_max = 6;
    spec.horizon = 12;
    spec.instances = 500;
  }
  else if (experiment == "optimality")
  {
    spec.horizon = 10;
    spec.instances = 200;
  }
  else if (experiment == "conjecture")
  {
    spec.channels = 3;
    spec.channels_max = 5;
    spec.horizon = 8;
    spec.instances = 100;
  }
  else if (experiment == "lemma4")
  {
    spec.horizon = 15;
    spec.instances = 200;
  }
  else if (experiment == "gap")
  {
    spec.horizon = 10;
    spec.instances = 100;
  }
  else if (experiment == "montecarlo")
  {
    spec.horizon = 10;
    spec.instances = 10;
    spec.init = InitMode::Stationary;
  }
  else
    throw std::invalid_argument("unknown experiment '" + std::string(experiment) + "'");
  return spec;
}

/*------------------------------------------------------------------------------------------------*/

void to_json(json& j, const Instance& inst)
{
  j = json{{"index", inst.index},
           {"seed", inst.seed},
           {"n", inst.omega.size()},
           {"horizon", inst.horizon},
           {"model", inst.model},
           {"omega", inst.omega.values()},
           {"sign", to_string(inst.model.sign())},
           {"epsilon_bound", epsilon_bound(inst.model).bound}};
}

Instance instance_from_json(const json& j)
{
  return Instance{j.at("index").get<std::size_t>(), j.at("seed").get<std::uint64_t>(),
                  j.at("horizon").get<std::size_t>(), j.at("model").get<ChannelModel>(),
                  BeliefVector(j.at("omega").get<std::vector<double>>())};
}

Instance sample_instance(const InstanceSpec& spec, std::size_t index)
{
  spec.validate();
  Rng rng = Rng::stream(spec.seed, index);

  const std::size_t span = spec.channels_max - spec.channels + 1;
  const std::size_t n =
    spec.channels + std::min(span - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(span)));

  ChannelModel model = spec.model.value_or(ChannelModel(0.5, 0.5, 0.0));
  if (!spec.model)
  {
    double p01 = 0.0;
    double p11 = 0.0;
    while (true)
    {
      p01 = spec.p_low + (spec.p_high - spec.p_low) * rng.uniform();
      p11 = spec.p_low + (spec.p_high - spec.p_low) * rng.uniform();
      if (std::abs(p11 - p01) <= spec.min_separation)
        continue;
      if (spec.sign == SignFilter::Positive && p11 < p01)
        continue;
      if (spec.sign == SignFilter::Negative && p11 >= p01)
        continue;
      break;
    }
    const ChannelModel shape(p01, p11, 0.0, spec.delta);
    const double eps = spec.epsilon.value_or(spec.epsilon_fraction * epsilon_bound(shape).bound);
    model = shape.with_epsilon(eps);
  }

  std::vector<double> omega(n);
  const double lo = model.band_low();
  const double hi = model.band_high();
  switch (spec.init)
  {
    case InitMode::Explicit:
      omega = spec.omega;
      break;
    case InitMode::Stationary:
      std::fill(omega.begin(), omega.end(), stationary_belief(model));
      break;
    case InitMode::RandomInBand:
      for (auto& w : omega)
        w = lo + (hi - lo) * rng.uniform();
      break;
    case InitMode::RandomWithTransients:
    {
      for (auto& w : omega)
        w = rng.uniform();
      // Force at least one entry into [0, lo) or (hi, 1).
      const std::size_t j = std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
      const double outside = lo + (1.0 - hi);
      const double u = rng.uniform() * outside;
      omega[j] = u < lo ? u : std::min(hi + (u - lo), std::nextafter(1.0, 0.0));
      if (!is_transient(omega[j], model))
        omega[j] = lo / 2.0;
      break;
    }
  }

  return Instance{index, spec.seed, spec.horizon, model, BeliefVector(std::move(omega))};
}

/*------------------------------------------------------------------------------------------------*/

std::size_t ExperimentReport::count(Verdict v) const
{
  return static_cast<std::size_t>(
    std::count_if(results.begin(), results.end(), [v](const auto& r) { return r.verdict == v; }));
}

double ExperimentReport::pass_rate() const
{
  const std::size_t judged = count(Verdict::Pass) + count(Verdict::Fail);
  return judged == 0 ? 1.0 : static_cast<double>(count(Verdict::Pass)) / static_cast<double>(judged);
}

json report_to_json(const ExperimentReport& report, bool include_timing)
{
  json results = json::array();
  for (const auto& r : report.results)
  {
    json item{{"instance", r.instance}, {"verdict", to_string(r.verdict)}, {"details", r.details}};
    if (r.witness)
      item["witness"] = *r.witness;
    results.push_back(std::move(item));
  }

  json metadata{
    {"spec", report.spec},
    {"declared_choices",
     {{"model_sampling", "p01, p11 uniform on p_range, redrawn until |p11 - p01| > min_separation"},
      {"epsilon", "epsilon_fraction times the structure bound unless given explicitly"},
      {"initial_belief", to_string(report.spec.init)},
      {"initial_state_distribution", "Bernoulli(omega) per channel; stationary omega when init is stationary"},
      {"tie_break", "lowest channel index; ties within 1e-12 accepted as agreement"}}},
    {"tolerances", {{"value", kValueTolerance}, {"exact", kExactTolerance}}}};

  json j{{"experiment", report.experiment},
         {"metadata", std::move(metadata)},
         {"summary",
          {{"instances", report.results.size()},
           {"pass", report.count(Verdict::Pass)},
           {"fail", report.count(Verdict::Fail)},
           {"skipped", report.count(Verdict::Skipped)},
           {"pass_rate", report.pass_rate()}}},
         {"results", std::move(results)}};
  if (include_timing)
    j["wall_seconds"] = report.wall_seconds;
  return j;
}

void write_report_csv(std::ostream& os, const ExperimentReport& report)
{
  os << "index,n,horizon,p01,p11,epsilon,delta,sign,verdict\n";
  os << std::setprecision(17);
  for (const auto& r : report.results)
  {
    const auto& m = r.instance.model;
    os << r.instance.index << ',' << r.instance.omega.size() << ',' << r.instance.horizon << ','
       << m.p01() << ',' << m.p11() << ',' << m.epsilon() << ',' << m.delta() << ','
       << to_string(m.sign()) << ',' << to_string(r.verdict) << '\n';
  }
}

void write_summary(std::ostream& os, const ExperimentReport& report)
{
  os << std::left << std::setw(12) << "experiment" << std::setw(10) << "instances" << std::setw(8)
     << "pass" << std::setw(8) << "fail" << std::setw(9) << "skipped" << std::setw(11) << "pass rate"
     << "wall (s)\n";
  os << std::setw(12) << report.experiment << std::setw(10) << report.results.size() << std::setw(8)
     << report.count(Verdict::Pass) << std::setw(8) << report.count(Verdict::Fail) << std::setw(9)
     << report.count(Verdict::Skipped) << std::setw(11) << std::fixed << std::setprecision(4)
     << report.pass_rate() << std::setprecision(2) << report.wall_seconds << '\n';
  os.unsetf(std::ios::fixed);
  for (const auto& r : report.results)
    if (r.verdict == Verdict::Fail)
      os << "  FAIL instance " << r.instance.index << " (seed " << r.instance.seed
         << "): " << (r.witness ? r.witness->dump() : std::string("{}")) << '\n';
}

/*------------------------------------------------------------------------------------------------*/

namespace {

InstanceResult run_structure(const Instance& inst)
{
  if (!epsilon_bound(inst.model).satisfied)
    return skipped(inst, "epsilon not below the structure bound");

  const auto eq = equivalent_actions(StructuralPolicy{}, MyopicArgmaxPolicy{}, inst.omega, inst.model,
                                     inst.horizon, {kExactTolerance, 1});
  const bool transient = any_transient(inst.omega, inst.model);
  json details{{"paths", eq.paths}, {"decisions", eq.decisions}, {"ties", eq.ties},
               {"transient", transient}};
  if (transient)
    details["transient_rank"] = structural_init(inst.omega, inst.model).transient_rank;

  if (eq.agree)
    return {inst, Verdict::Pass, std::move(details), std::nullopt};

  const auto& d = *eq.first_divergence;
  json witness{{"path", path_string(d.path)},
               {"slot", d.slot},
               {"belief", d.belief.values()},
               {"structural_action", d.action_a + 1},
               {"argmax_action", d.action_b + 1},
               {"argmax_set", channels_json(argmax_set(d.belief, kExactTolerance))}};
  if (transient && d.slot == 2)
    witness["note"] = "slot-2 divergence under transient initial beliefs";
  return {inst, Verdict::Fail, std::move(details), std::move(witness)};
}

/// Myopic action must be optimal at every node the myopic policy reaches.
InstanceResult run_myopic_optimality(const Instance& inst)
{
  if (!epsilon_bound(inst.model).satisfied)
    return skipped(inst, "epsilon not below the structure bound");

  const bool transient = any_transient(inst.omega, inst.model);
  const std::size_t first_slot = transient ? 2 : 1;

  Planner planner(inst.model, inst.horizon);
  const double optimal = planner.value(inst.omega, 1);
  const double myopic = policy_value(MyopicArgmaxPolicy{}, inst.omega, inst.horizon, inst.model).value;

  std::size_t nodes = 0;
  std::size_t near_ties = 0;
  double max_deficit = 0.0;
  std::optional<json> witness;
  std::vector<Observation> path;

  auto walk = [&](auto&& self, const BeliefVector& omega, std::size_t t) -> void {
    if (witness)
      return;
    const Channel a = myopic_action(omega).action;
    if (t >= first_slot)
    {
      ++nodes;
      const auto entry = planner.optimal_value(omega, t);
      const double deficit = entry.value - entry.branches[a].total;
      max_deficit = std::max(max_deficit, deficit);
      if (deficit > kValueTolerance)
      {
        json values = json::array();
        for (const auto& b : entry.branches)
          values.push_back(b.total);
        witness = json{{"path", path_string(path)},
                       {"slot", t},
                       {"belief", omega.values()},
                       {"myopic_action", a + 1},
                       {"optimal_actions", channels_json(entry.optimal_actions)},
                       {"action_values", values},
                       {"optimal_value", entry.value}};
        return;
      }
      if (deficit > kExactTolerance)
        ++near_ties;
    }
    if (t == inst.horizon)
      return;
    const double p_ack = ack_probability(omega[a], inst.model);
    for (Observation obs : {Observation::Nak, Observation::Ack})
    {
      if ((obs == Observation::Ack ? p_ack : 1.0 - p_ack) <= 0.0)
        continue;
      path.push_back(obs);
      self(self, belief_update(omega, a, obs, inst.model), t + 1);
      path.pop_back();
    }
  };
  walk(walk, inst.omega, 1);

  const double gap = std::abs(optimal - myopic);
  json details{{"optimal_value", optimal},
               {"myopic_value", myopic},
               {"value_gap", gap},
               {"nodes_checked", nodes},
               {"max_deficit", max_deficit},
               {"near_ties", near_ties},
               {"planner_nodes", planner.node_count()},
               {"transient", transient},
               {"first_checked_slot", first_slot}};

  if (!witness && !transient && gap > kValueTolerance)
    witness = json{{"reason", "myopic value differs from optimal value"},
                   {"optimal_value", optimal},
                   {"myopic_value", myopic}};

  if (witness)
    return {inst, Verdict::Fail, std::move(details), std::move(witness)};
  return {inst, Verdict::Pass, std::move(details), std::nullopt};
}

InstanceResult run_lemma4(const Instance& inst)
{
  if (inst.omega.size() != 2)
    return skipped(inst, "conditional values are defined for two channels");
  if (!epsilon_bound(inst.model).satisfied)
    return skipped(inst, "epsilon not below the structure bound");

  const ConditionalValueTable table(inst.model, inst.horizon);
  const double limit = 1.0 - inst.model.epsilon();
  double max_symmetry = 0.0;
  double max_difference = 0.0;
  std::optional<json> witness;

  for (std::size_t t = 1; t <= inst.horizon && !witness; ++t)
  {
    for (Channel a = 0; a < 2 && !witness; ++a)
    {
      for (int s1 = 0; s1 < 2; ++s1)
        for (int s2 = 0; s2 < 2; ++s2)
        {
          const double lhs = table(t, 0, {s1, s2});
          const double rhs = table(t, 1, {s2, s1});
          max_symmetry = std::max(max_symmetry, std::abs(lhs - rhs));
          if (std::abs(lhs - rhs) > kExactTolerance && !witness)
            witness = json{{"check", "symmetry"}, {"t", t}, {"state", {s1, s2}},
                           {"value_action1", lhs}, {"value_action2_swapped", rhs}};
        }
      const double diff = std::abs(table(t, a, {1, 0}) - table(t, a, {0, 1}));
      max_difference = std::max(max_difference, diff);
      if (diff > limit + kExactTolerance && !witness)
        witness = json{{"check", "bound"}, {"t", t}, {"prev_action", a + 1},
                       {"value_10", table(t, a, {1, 0})}, {"value_01", table(t, a, {0, 1})},
                       {"limit", limit}};
    }
  }

  json details{{"max_symmetry_error", max_symmetry},
               {"max_difference", max_difference},
               {"limit", limit},
               {"slack", limit - max_difference}};
  if (witness)
    return {inst, Verdict::Fail, std::move(details), std::move(witness)};
  return {inst, Verdict::Pass, std::move(details), std::nullopt};
}

InstanceResult run_gap(const Instance& inst)
{
  if (!epsilon_bound(inst.model).satisfied)
    return skipped(inst, "epsilon not below the structure bound");

  Planner planner(inst.model, inst.horizon);
  std::optional<ConditionalValueTable> table;
  if (inst.omega.size() == 2)
    table.emplace(inst.model, inst.horizon);

  std::vector<BeliefVector> frontier{inst.omega};
  std::size_t nodes = 0;
  double min_gap = 0.0;
  double closed_form_error = 0.0;
  std::optional<json> witness;

  for (std::size_t t = 1; t <= inst.horizon && !witness; ++t)
  {
    std::vector<BeliefVector> next;
    std::unordered_set<BeliefKey, BeliefKeyHash> seen;
    for (const auto& omega : frontier)
    {
      ++nodes;
      const auto gaps = planner.myopic_action_gap(omega, t);
      for (Channel a = 0; a < gaps.size(); ++a)
      {
        min_gap = std::min(min_gap, gaps[a]);
        if (gaps[a] < -kExactTolerance && !witness)
        {
          witness = json{{"slot", t}, {"belief", omega.values()}, {"action", a + 1},
                         {"gap", gaps[a]}};
        }
      }
      if (table)
      {
        // Closed form of the deviation gap for two channels.
        const Channel m = myopic_action(omega).action;
        const Channel other = 1 - m;
        const double cont = t < inst.horizon ? (*table)(t + 1, 0, {1, 0}) - (*table)(t + 1, 0, {0, 1}) : 0.0;
        const double expected = (omega[m] - omega[other]) * (1.0 - inst.model.epsilon() + cont);
        closed_form_error = std::max(closed_form_error, std::abs(expected - gaps[other]));
      }
      if (t == inst.horizon)
        continue;
      for (Channel a = 0; a < omega.size(); ++a)
      {
        const double p_ack = ack_probability(omega[a], inst.model);
        for (Observation obs : {Observation::Nak, Observation::Ack})
        {
          if ((obs == Observation::Ack ? p_ack : 1.0 - p_ack) <= 0.0)
            continue;
          auto b = belief_update(omega, a, obs, inst.model);
          if (seen.insert(BeliefKey::make(t + 1, b, false)).second)
            next.push_back(std::move(b));
        }
      }
    }
    frontier = std::move(next);
  }

  json details{{"nodes", nodes}, {"min_gap", min_gap}};
  if (table)
    details["closed_form_error"] = closed_form_error;
  if (witness)
    return {inst, Verdict::Fail, std::move(details), std::move(witness)};
  return {inst, Verdict::Pass, std::move(details), std::nullopt};
}

InstanceResult run_montecarlo(const Instance& inst, const InstanceSpec& spec)
{
  SimConfig config{inst.model, inst.omega.size(), inst.horizon, spec.episodes,
                   mix(inst.seed ^ mix(inst.index)), inst.omega};

  std::vector<std::unique_ptr<Policy>> policies;
  policies.push_back(std::make_unique<MyopicArgmaxPolicy>());
  policies.push_back(std::make_unique<FixedPolicy>(0));

  json checks = json::array();
  std::optional<json> witness;
  for (const auto& policy : policies)
  {
    const auto est = estimate_throughput(config, *policy);
    const double exact = policy_value(*policy, inst.omega, inst.horizon, inst.model).value;
    const double err = std::abs(est.mean - exact);
    const bool ok = err <= 3.0 * est.standard_error + kValueTolerance;
    json c{{"policy", policy->name()},
           {"simulated_mean", est.mean},
           {"standard_error", est.standard_error},
           {"policy_value", exact},
           {"z", est.standard_error > 0.0 ? err / est.standard_error : 0.0},
           {"within_3se", ok}};
    if (!ok && !witness)
      witness = c;
    checks.push_back(std::move(c));
  }

  json details{{"episodes", spec.episodes}, {"checks", std::move(checks)}};

  if (spec.init == InitMode::Stationary)
  {
    const double closed = stationary_belief(inst.model) * (1.0 - inst.model.epsilon()) *
                          static_cast<double>(inst.horizon);
    const double fixed = policy_value(FixedPolicy(0), inst.omega, inst.horizon, inst.model).value;
    details["fixed_closed_form"] = closed;
    details["fixed_closed_form_error"] = std::abs(closed - fixed);
    if (std::abs(closed - fixed) > kValueTolerance && !witness)
      witness = json{{"reason", "fixed-channel value differs from the stationary closed form"},
                     {"closed_form", closed}, {"policy_value", fixed}};
  }

  if (epsilon_bound(inst.model).satisfied)
  {
    // Action equivalence implies identical closed-loop traces per seed.
    const std::size_t compared = std::min<std::size_t>(spec.episodes, 1000);
    std::size_t mismatches = 0;
    for (std::size_t e = 0; e < compared; ++e)
    {
      const auto a = run_episode(config, MyopicArgmaxPolicy{}, e);
      const auto b = run_episode(config, StructuralPolicy{}, e);
      bool same = a.slots.size() == b.slots.size();
      for (std::size_t k = 0; same && k < a.slots.size(); ++k)
        same = a.slots[k].action == b.slots[k].action &&
               a.slots[k].outcome.observation == b.slots[k].outcome.observation;
      if (!same)
        ++mismatches;
    }
    details["trace_episodes_compared"] = compared;
    details["trace_mismatches"] = mismatches;
    if (mismatches > 0 && !witness)
      witness = json{{"reason", "structural and argmax traces differ"}, {"mismatches", mismatches}};
  }

  if (witness)
    return {inst, Verdict::Fail, std::move(details), std::move(witness)};
  return {inst, Verdict::Pass, std::move(details), std::nullopt};
}

} // namespace

InstanceResult run_instance(std::string_view experiment, const InstanceSpec& spec, const Instance& inst)
{
  if (experiment == "structure")
    return run_structure(inst);
  if (experiment == "optimality")
  {
    if (inst.omega.size() != 2)
      return skipped(inst, "optimality experiment covers two channels");
    return run_myopic_optimality(inst);
  }
  if (experiment == "conjecture")
  {
    if (inst.omega.size() < 3 || inst.omega.size() > 5)
      return skipped(inst, "conjecture experiment covers three to five channels");
    return run_myopic_optimality(inst);
  }
  if (experiment == "lemma4")
    return run_lemma4(inst);
  if (experiment == "gap")
    return run_gap(inst);
  if (experiment == "montecarlo")
    return run_montecarlo(inst, spec);
  throw std::invalid_argument("unknown experiment '" + std::string(experiment) + "'");
}

ExperimentReport run_experiment(std::string_view experiment, const InstanceSpec& spec)
{
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report{std::string(experiment), spec, {}, 0.0};
  report.results.reserve(spec.instances);
  for (std::size_t i = 0; i < spec.instances; ++i)
    report.results.push_back(run_instance(experiment, spec, sample_instance(spec, i)));
  report.wall_seconds =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ExperimentReport experiment_structure(const InstanceSpec& spec) { return run_experiment("structure", spec); }
ExperimentReport experiment_optimality(const InstanceSpec& spec) { return run_experiment("optimality", spec); }
ExperimentReport experiment_conjecture(const InstanceSpec& spec) { return run_experiment("conjecture", spec); }
ExperimentReport experiment_lemma4(const InstanceSpec& spec) { return run_experiment("lemma4", spec); }
ExperimentReport experiment_gap(const InstanceSpec& spec) { return run_experiment("gap", spec); }
ExperimentReport experiment_montecarlo(const InstanceSpec& spec) { return run_experiment("montecarlo", spec); }

ReplayResult replay(const json& report, std::size_t index)
{
  const auto experiment = report.at("experiment").get<std::string>();
  const auto spec = report.at("metadata").at("spec").get<InstanceSpec>();
  const auto& results = report.at("results");
  if (index >= results.size())
    throw std::out_of_range("report has no instance " + std::to_string(index));
  const auto& stored = results.at(index);
  auto result = run_instance(experiment, spec, instance_from_json(stored.at("instance")));

  // Compare through a dump/parse round trip so number types line up.
  const json fresh_details = json::parse(result.details.dump());
  bool same = stored.at("verdict").get<std::string>() == to_string(result.verdict) &&
              stored.at("details") == fresh_details;
  const bool stored_witness = stored.contains("witness");
  if (stored_witness != result.witness.has_value())
    same = false;
  else if (stored_witness && stored.at("witness") != json::parse(result.witness->dump()))
    same = false;
  return {std::move(result), same};
}

} // namespace myopic::lab
