#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "myopic/lab.hpp"
#include "myopic/planner.hpp"
#include "myopic/simulator.hpp"

using nlohmann::json;
using namespace myopic;

namespace {

std::vector<double> parse_list(const std::string& text)
{
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    std::size_t used = 0;
    values.push_back(std::stod(item, &used));
    if (used != item.size())
      throw std::invalid_argument("not a number: '" + item + "'");
  }
  return values;
}

ChannelModel parse_model(const std::string& text)
{
  const auto v = parse_list(text);
  if (v.size() != 3 && v.size() != 4)
    throw std::invalid_argument("--model expects p01,p11,eps[,delta]");
  return ChannelModel(v[0], v[1], v[2], v.size() == 4 ? v[3] : 0.0);
}

struct Options
{
  std::string config;
  std::optional<std::size_t> n;
  std::optional<std::size_t> n_max;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> instances;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon_frac;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::string model;
  std::string omega;
  std::string init;
  std::string sign;
  std::optional<std::size_t> episodes;
  std::string out;
  std::string format = "json";
  bool timing = false;
  std::string policy = "myopic-argmax";
  std::string report;
  std::size_t index = 0;
};

void add_common(CLI::App& cmd, Options& o)
{
  cmd.add_option("--config", o.config, "JSON file mirroring the instance spec");
  cmd.add_option("--n", o.n, "Number of channels (lower end of the range)");
  cmd.add_option("--n-max", o.n_max, "Upper end of the channel-count range");
  cmd.add_option("--horizon", o.horizon, "Horizon T");
  cmd.add_option("--instances", o.instances, "Number of random instances");
  cmd.add_option("--seed", o.seed, "Master seed");
  cmd.add_option("--epsilon-frac", o.epsilon_frac, "epsilon as a fraction of the structure bound");
  cmd.add_option("--epsilon", o.epsilon, "Explicit epsilon for sampled models");
  cmd.add_option("--delta", o.delta, "Miss-detection probability");
  cmd.add_option("--model", o.model, "Fixed model p01,p11,eps[,delta]");
  cmd.add_option("--omega", o.omega, "Explicit initial belief v1,...,vN");
  cmd.add_option("--init", o.init, "stationary | random-in-band | random-with-transients | explicit");
  cmd.add_option("--sign", o.sign, "any | positive | negative");
  cmd.add_option("--episodes", o.episodes, "Monte Carlo episodes");
  cmd.add_option("--out", o.out, "Output path (default stdout)");
  cmd.add_option("--format", o.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
}

lab::InstanceSpec build_spec(const std::string& experiment, const Options& o)
{
  lab::InstanceSpec spec = experiment.empty() ? lab::InstanceSpec{} : lab::default_spec(experiment);
  if (!o.config.empty())
  {
    std::ifstream in(o.config);
    if (!in)
      throw std::runtime_error("cannot open config " + o.config);
    json j = lab::default_spec(experiment.empty() ? "optimality" : experiment);
    j.update(json::parse(in));
    spec = j.get<lab::InstanceSpec>();
  }
  if (o.n)
  {
    spec.channels = *o.n;
    spec.channels_max = o.n_max.value_or(*o.n);
  }
  else if (o.n_max)
    spec.channels_max = *o.n_max;
  if (o.horizon)
    spec.horizon = *o.horizon;
  if (o.instances)
    spec.instances = *o.instances;
  if (o.seed)
    spec.seed = *o.seed;
  if (o.epsilon_frac)
    spec.epsilon_fraction = *o.epsilon_frac;
  if (o.epsilon)
    spec.epsilon = *o.epsilon;
  if (o.delta)
    spec.delta = *o.delta;
  if (!o.model.empty())
    spec.model = parse_model(o.model);
  if (!o.omega.empty())
  {
    spec.omega = parse_list(o.omega);
    spec.init = lab::InitMode::Explicit;
    if (!o.n)
      spec.channels = spec.channels_max = spec.omega.size();
  }
  if (!o.init.empty())
    spec.init = lab::parse_init_mode(o.init);
  if (!o.sign.empty())
    spec.sign = lab::parse_sign_filter(o.sign);
  if (o.episodes)
    spec.episodes = *o.episodes;
  spec.validate();
  return spec;
}

template <typename Write>
void emit(const std::string& path, Write&& write)
{
  if (path.empty() || path == "-")
  {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  write(out);
}

int run_experiment(const std::string& name, const Options& o)
{
  const auto spec = build_spec(name, o);
  const auto report = lab::run_experiment(name, spec);
  if (o.format == "csv")
    emit(o.out, [&](std::ostream& os) { lab::write_report_csv(os, report); });
  else
    emit(o.out, [&](std::ostream& os) { os << lab::report_to_json(report, o.timing).dump(2) << '\n'; });
  if (!o.out.empty() && o.out != "-")
    lab::write_summary(std::cout, report);
  else
    lab::write_summary(std::cerr, report);
  return report.all_passed() ? 0 : 1;
}

int run_solve(const Options& o)
{
  auto spec = build_spec("", o);
  spec.instances = 1;
  const auto inst = lab::sample_instance(spec, 0);
  const auto start = std::chrono::steady_clock::now();
  Planner planner(inst.model, inst.horizon);
  const auto entry = planner.optimal_value(inst.omega, 1);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json actions = json::array();
  for (Channel a : entry.optimal_actions)
    actions.push_back(a + 1);
  json result{{"instance", inst},
              {"horizon", inst.horizon},
              {"value", entry.value},
              {"optimal_action", entry.optimal_actions.front() + 1},
              {"optimal_actions", actions},
              {"myopic_value", planner.myopic_value(inst.omega, 1)},
              {"node_count", planner.node_count()}};
  if (o.timing)
    result["wall_seconds"] = wall;
  emit(o.out, [&](std::ostream& os) { os << result.dump(2) << '\n'; });
  return 0;
}

int run_simulate(const Options& o)
{
  auto spec = build_spec("", o);
  if (!o.episodes)
    spec.episodes = 1000;
  if (o.omega.empty() && o.init.empty() && o.config.empty())
    spec.init = lab::InitMode::Stationary;
  const auto inst = lab::sample_instance(spec, 0);
  SimConfig config{inst.model, inst.omega.size(), inst.horizon, spec.episodes, spec.seed, std::nullopt};
  if (spec.init != lab::InitMode::Stationary)
    config.initial_belief = inst.omega;
  const auto policy = make_policy(o.policy, spec.seed);

  if (o.format == "csv")
    emit(o.out, [&](std::ostream& os) { write_totals_csv(os, episode_totals(config, *policy)); });
  else
    emit(o.out, [&](std::ostream& os) {
      for (std::size_t e = 0; e < config.episodes; ++e)
        write_trace_jsonl(os, e, run_episode(config, *policy, e));
    });
  if (config.episodes >= 2)
  {
    const auto est = estimate_throughput(config, *policy);
    std::cerr << policy->name() << ": mean " << est.mean << " +/- " << est.standard_error << " over "
              << est.episodes << " episodes\n";
  }
  return 0;
}

int run_replay(const Options& o)
{
  std::ifstream in(o.report);
  if (!in)
    throw std::runtime_error("cannot open report " + o.report);
  const auto report = json::parse(in);
  const auto r = lab::replay(report, o.index);
  json out{{"experiment", report.at("experiment")},
           {"instance", r.result.instance},
           {"verdict", lab::to_string(r.result.verdict)},
           {"details", r.result.details},
           {"reproduced", r.reproduced}};
  if (r.result.witness)
    out["witness"] = *r.result.witness;
  emit(o.out, [&](std::ostream& os) { os << out.dump(2) << '\n'; });
  return r.reproduced ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Myopic sensing lab: structure, optimality and simulation checks"};
  app.require_subcommand(1);
  Options o;

  const std::vector<std::pair<std::string, std::string>> experiments{
    {"structure", "Round-robin structure versus belief argmax over all observation paths"},
    {"optimality", "Myopic versus optimal for two channels"},
    {"conjecture", "Myopic versus optimal for three to five channels"},
    {"lemma4", "Conditional value bound and symmetry for two channels"},
    {"gap", "One-step deviation gap at every reachable node"},
    {"montecarlo", "Simulated mean reward versus exact policy value"}};
  for (const auto& [name, help] : experiments)
  {
    auto* cmd = app.add_subcommand(name, help);
    add_common(*cmd, o);
    cmd->add_flag("--timing", o.timing, "Include wall time in the JSON report");
  }

  auto* solve = app.add_subcommand("solve", "Exact optimal value of one instance");
  add_common(*solve, o);
  solve->add_flag("--timing", o.timing, "Include wall time in the output");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo traces of one policy");
  add_common(*simulate, o);
  simulate->add_option("--policy", o.policy, "myopic-argmax | structural | random | fixed:<k>");

  auto* replay = app.add_subcommand("replay", "Re-run one instance of a stored report");
  replay->add_option("--report", o.report, "Report JSON file")->required();
  replay->add_option("--index", o.index, "Instance index within the report")->required();
  replay->add_option("--out", o.out, "Output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try
  {
    const auto* cmd = app.get_subcommands().front();
    const auto name = cmd->get_name();
    if (name == "solve")
      return run_solve(o);
    if (name == "simulate")
      return run_simulate(o);
    if (name == "replay")
      return run_replay(o);
    return run_experiment(name, o);
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
