// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and runtime
// limits are fixed here; reports are archived under acceptance_reports/.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "myopic/lab.hpp"
#include "myopic/planner.hpp"

using namespace myopic;
using lab::InstanceSpec;
using nlohmann::json;

namespace {

constexpr double kPropertyTol = 1e-12;
constexpr double kOracleTol = 1e-12;

const std::filesystem::path kArchive = "acceptance_reports";

struct Outcome
{
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, double limit_seconds, const std::function<Outcome()>& body)
{
  const auto start = std::chrono::steady_clock::now();
  Outcome out{false, ""};
  try
  {
    out = body();
  }
  catch (const std::exception& e)
  {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = limit_seconds <= 0.0 || secs < limit_seconds;
  const bool pass = out.pass && in_time;
  if (!pass)
    ++failures;
  std::printf("criterion %2d: %s  %s (%s; %.2f s", id, pass ? "PASS" : "FAIL", title.c_str(),
              out.detail.c_str(), secs);
  if (limit_seconds > 0.0)
    std::printf(" of %.0f s%s", limit_seconds, in_time ? "" : ", too slow");
  std::printf(")\n");
  std::fflush(stdout);
}

void archive(const std::string& name, const lab::ExperimentReport& report)
{
  std::filesystem::create_directories(kArchive);
  std::ofstream(kArchive / (name + ".json")) << lab::report_to_json(report, true).dump(2) << '\n';
}

std::string counts(const lab::ExperimentReport& r)
{
  return std::to_string(r.count(lab::Verdict::Pass)) + " pass, " +
         std::to_string(r.count(lab::Verdict::Fail)) + " fail, " +
         std::to_string(r.count(lab::Verdict::Skipped)) + " skipped";
}

bool clean(const lab::ExperimentReport& r, std::size_t expected)
{
  return r.count(lab::Verdict::Pass) == expected && r.count(lab::Verdict::Fail) == 0;
}

std::size_t sum_detail(const lab::ExperimentReport& r, const char* key)
{
  std::size_t total = 0;
  for (const auto& x : r.results)
    if (x.details.contains(key))
      total += x.details.at(key).get<std::size_t>();
  return total;
}

double max_detail(const lab::ExperimentReport& r, const char* key)
{
  double m = -1e300;
  for (const auto& x : r.results)
    if (x.details.contains(key))
      m = std::max(m, x.details.at(key).get<double>());
  return m;
}

std::string fmt(double x)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

ChannelModel draw_model(std::mt19937_64& rng, bool positive)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (true)
  {
    const double p01 = 0.01 + 0.98 * u(rng);
    const double p11 = 0.01 + 0.98 * u(rng);
    if (p11 == p01 || (p11 > p01) != positive)
      continue;
    const ChannelModel shape(p01, p11, 0.0);
    return shape.with_epsilon(u(rng) * epsilon_bound(shape).bound);
  }
}

// Specs for the experiment criteria; criterion 10 re-runs each of them.
struct Run
{
  std::string name;
  std::string experiment;
  InstanceSpec spec;
};

std::vector<Run> runs()
{
  std::vector<Run> r;
  for (auto sign : {lab::SignFilter::Positive, lab::SignFilter::Negative})
  {
    auto s = lab::default_spec("structure");
    s.sign = sign;
    s.seed = sign == lab::SignFilter::Positive ? 101 : 102;
    r.push_back({"structure-" + lab::to_string(sign), "structure", s});
  }
  {
    auto s = lab::default_spec("structure");
    s.instances = 200;
    s.horizon = 10;
    s.init = lab::InitMode::RandomWithTransients;
    s.seed = 103;
    r.push_back({"structure-transient", "structure", s});
  }
  {
    auto s = lab::default_spec("optimality");
    s.seed = 104;
    r.push_back({"optimality", "optimality", s});
  }
  for (std::size_t n : {3, 4, 5})
  {
    auto s = lab::default_spec("conjecture");
    s.channels = s.channels_max = n;
    s.seed = 200 + n;
    r.push_back({"conjecture-n" + std::to_string(n), "conjecture", s});
  }
  for (auto sign : {lab::SignFilter::Positive, lab::SignFilter::Negative})
  {
    auto s = lab::default_spec("lemma4");
    s.sign = sign;
    s.seed = sign == lab::SignFilter::Positive ? 105 : 106;
    r.push_back({"lemma4-" + lab::to_string(sign), "lemma4", s});
  }
  {
    auto s = lab::default_spec("gap");
    s.seed = 107;
    r.push_back({"gap", "gap", s});
  }
  {
    auto s = lab::default_spec("montecarlo");
    s.seed = 108;
    r.push_back({"montecarlo", "montecarlo", s});
  }
  return r;
}

std::vector<lab::ExperimentReport> run_all(const std::vector<Run>& selected)
{
  std::vector<lab::ExperimentReport> out;
  for (const auto& r : selected)
  {
    out.push_back(lab::run_experiment(r.experiment, r.spec));
    archive(r.name, out.back());
  }
  return out;
}

std::vector<Run> pick(const std::vector<Run>& all, const std::string& prefix)
{
  std::vector<Run> out;
  for (const auto& r : all)
    if (r.name.rfind(prefix, 0) == 0)
      out.push_back(r);
  return out;
}

} // namespace

int main()
{
  const auto all = runs();
  std::vector<std::pair<Run, std::string>> first_dumps;
  auto remember = [&](const std::vector<Run>& rs, const std::vector<lab::ExperimentReport>& reps) {
    for (std::size_t i = 0; i < rs.size(); ++i)
      first_dumps.emplace_back(rs[i], lab::report_to_json(reps[i]).dump());
  };

  criterion(1, "gamma properties P1-P3, 1000 samples per sign", 1.0, [] {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t checks = 0;
    double worst = 0.0;
    for (bool positive : {true, false})
      for (int i = 0; i < 1000; ++i)
      {
        const auto m = draw_model(rng, positive);
        double x = u(rng), y = u(rng);
        if (x > y)
          std::swap(x, y);
        const double gx = gamma(x, m), gy = gamma(y, m);
        // P1: strictly monotone in the direction of the correlation.
        if (x < y && (positive ? !(gx < gy) : !(gx > gy)))
          return Outcome{false, "P1 violated"};
        // P2: image inside the band.
        for (double g : {gx, gy})
        {
          worst = std::max({worst, m.band_low() - g, g - m.band_high()});
          if (g < m.band_low() - kPropertyTol || g > m.band_high() + kPropertyTol)
            return Outcome{false, "P2 violated"};
        }
        // P3: NAK posterior against any in-band prediction.
        const double w = m.band_low() + (m.band_high() - m.band_low()) * u(rng);
        const double w2 = m.band_low() + (m.band_high() - m.band_low()) * u(rng);
        const double nak = nak_posterior(w, m), g2 = gamma(w2, m);
        const double violation = positive ? nak - g2 : g2 - nak;
        worst = std::max(worst, violation);
        if (violation > kPropertyTol)
          return Outcome{false, "P3 violated"};
        checks += 4;
      }
    return Outcome{true, std::to_string(checks) + " checks, worst excess " + fmt(worst)};
  });

  criterion(2, "round-robin structure, 500 instances per sign, N 2..6, T=12", 60.0, [&] {
    const auto rs = pick(all, "structure-positive");
    auto rs2 = pick(all, "structure-negative");
    auto selected = rs;
    selected.insert(selected.end(), rs2.begin(), rs2.end());
    const auto reps = run_all(selected);
    remember(selected, reps);
    const bool ok = clean(reps[0], 500) && clean(reps[1], 500);
    const std::size_t decisions = sum_detail(reps[0], "decisions") + sum_detail(reps[1], "decisions");
    const std::size_t ties = sum_detail(reps[0], "ties") + sum_detail(reps[1], "ties");
    return Outcome{ok, "positive " + counts(reps[0]) + "; negative " + counts(reps[1]) + "; " +
                         std::to_string(decisions) + " decisions, " + std::to_string(ties) + " ties"};
  });

  criterion(3, "transient initial beliefs, 200 instances, T=10", 30.0, [&] {
    const auto selected = pick(all, "structure-transient");
    const auto reps = run_all(selected);
    remember(selected, reps);
    std::size_t with_rank = 0;
    for (const auto& r : reps[0].results)
      with_rank += r.details.value("transient", false);
    std::string witnesses;
    for (const auto& r : reps[0].results)
      if (r.witness)
        witnesses += " witness " + r.witness->dump();
    return Outcome{clean(reps[0], 200),
                   counts(reps[0]) + "; " + std::to_string(with_rank) + " with transient entries" + witnesses};
  });

  criterion(4, "myopic optimal for N=2, 200 instances, T=10", 60.0, [&] {
    const auto selected = pick(all, "optimality");
    const auto reps = run_all(selected);
    remember(selected, reps);
    return Outcome{clean(reps[0], 200), counts(reps[0]) + "; max value gap " +
                                          fmt(max_detail(reps[0], "value_gap")) + ", " +
                                          std::to_string(sum_detail(reps[0], "nodes_checked")) + " nodes"};
  });

  criterion(5, "myopic optimal for N=3,4,5, 100 instances each, T=8", 300.0, [&] {
    const auto selected = pick(all, "conjecture");
    const auto reps = run_all(selected);
    remember(selected, reps);
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < reps.size(); ++i)
    {
      ok = ok && clean(reps[i], 100);
      detail += (i ? "; N=" : "N=") + std::to_string(3 + i) + " " + counts(reps[i]) + ", max gap " +
                fmt(max_detail(reps[i], "value_gap"));
    }
    return Outcome{ok, detail};
  });

  criterion(6, "planner equals brute force, 50 instances each for N=2 T<=4 and N=3 T<=3", 60.0, [] {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    std::size_t count = 0;
    for (std::size_t n : {2, 3})
      for (int i = 0; i < 50; ++i)
      {
        const std::size_t T = (n == 2 ? 4 : 3) - static_cast<std::size_t>(i % 3 == 2);
        const ChannelModel m(0.01 + 0.98 * u(rng), 0.01 + 0.98 * u(rng), 0.5 * u(rng), u(rng) * 0.9);
        std::vector<double> w(n);
        for (auto& x : w)
          x = 0.999 * u(rng);
        const BeliefVector omega(w);
        const double a = optimal_value(omega, 1, T, m).value;
        const double b = brute_force_optimal(omega, T, m);
        worst = std::max(worst, std::abs(a - b));
        ++count;
      }
    return Outcome{worst <= kOracleTol, std::to_string(count) + " instances, max difference " + fmt(worst)};
  });

  criterion(7, "conditional value bound and symmetry, 200 instances per sign, T=15", 30.0, [&] {
    const auto selected = pick(all, "lemma4");
    const auto reps = run_all(selected);
    remember(selected, reps);
    return Outcome{clean(reps[0], 200) && clean(reps[1], 200),
                   "positive " + counts(reps[0]) + "; negative " + counts(reps[1]) + "; max symmetry error " +
                     fmt(std::max(max_detail(reps[0], "max_symmetry_error"),
                                  max_detail(reps[1], "max_symmetry_error")))};
  });

  criterion(8, "deviation gap non-negative, N=2, T=10, 100 instances", 60.0, [&] {
    const auto selected = pick(all, "gap");
    const auto reps = run_all(selected);
    remember(selected, reps);
    double min_gap = 0.0;
    for (const auto& r : reps[0].results)
      min_gap = std::min(min_gap, r.details.at("min_gap").get<double>());
    return Outcome{clean(reps[0], 100), counts(reps[0]) + "; " + std::to_string(sum_detail(reps[0], "nodes")) +
                                          " nodes, min gap " + fmt(min_gap)};
  });

  criterion(9, "simulator within 3 SE of exact values; delta invariance", 120.0, [&] {
    const auto selected = pick(all, "montecarlo");
    const auto reps = run_all(selected);
    remember(selected, reps);
    double worst_z = 0.0;
    for (const auto& r : reps[0].results)
      for (const auto& c : r.details.at("checks"))
        worst_z = std::max(worst_z, c.at("z").get<double>());

    // Belief updates and planner values must not move with delta.
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool identical = true;
    for (int i = 0; i < 50 && identical; ++i)
    {
      const auto m = draw_model(rng, i % 2 == 0);
      const BeliefVector omega{0.999 * u(rng), 0.999 * u(rng), 0.999 * u(rng)};
      const double v0 = optimal_value(omega, 1, 6, m.with_delta(0.0)).value;
      const double p0 = policy_value(MyopicArgmaxPolicy{}, omega, 6, m.with_delta(0.0)).value;
      for (double d : {0.3, 0.9})
      {
        const auto md = m.with_delta(d);
        identical = identical && optimal_value(omega, 1, 6, md).value == v0 &&
                    policy_value(MyopicArgmaxPolicy{}, omega, 6, md).value == p0;
        for (Channel a = 0; a < 3; ++a)
          for (Observation obs : {Observation::Ack, Observation::Nak})
            identical = identical && belief_update(omega, a, obs, md) ==
                                       belief_update(omega, a, obs, m.with_delta(0.0));
      }
    }
    return Outcome{clean(reps[0], 10) && identical,
                   counts(reps[0]) + "; worst z " + fmt(worst_z) +
                     (identical ? "; delta-invariant" : "; delta changed a value")};
  });

  criterion(10, "identical seeds give byte-identical reports", 0.0, [&] {
    std::size_t same = 0;
    std::string differing;
    for (const auto& [run, dump] : first_dumps)
    {
      if (lab::report_to_json(lab::run_experiment(run.experiment, run.spec)).dump() == dump)
        ++same;
      else
        differing += " " + run.name;
    }
    return Outcome{same == first_dumps.size() && !first_dumps.empty(),
                   std::to_string(same) + "/" + std::to_string(first_dumps.size()) + " reports identical" +
                     differing};
  });

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
