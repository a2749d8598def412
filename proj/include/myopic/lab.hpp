#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "myopic/channel_model.hpp"

namespace myopic::lab {

enum class InitMode { Explicit, Stationary, RandomInBand, RandomWithTransients };
enum class SignFilter { Any, Positive, Negative };

std::string to_string(InitMode mode);
std::string to_string(SignFilter sign);
InitMode parse_init_mode(std::string_view text);
SignFilter parse_sign_filter(std::string_view text);

/// How instances of an experiment are drawn. Every field is recorded in the
/// report so any instance can be regenerated.
struct InstanceSpec
{
  std::size_t channels = 2;
  /// Channel counts are drawn uniformly from [channels, channels_max].
  std::size_t channels_max = 2;
  std::size_t horizon = 10;
  std::size_t instances = 100;
  std::uint64_t seed = 1;

  /// Fixed model; when absent p01 and p11 are sampled.
  std::optional<ChannelModel> model;
  double p_low = 0.05;
  double p_high = 0.95;
  /// Sampled models are redrawn until |p11 - p01| exceeds this.
  double min_separation = 0.01;
  SignFilter sign = SignFilter::Any;
  /// Explicit false-alarm rate for sampled models.
  std::optional<double> epsilon;
  /// Otherwise epsilon = fraction * epsilon_bound, 0 < fraction < 1.
  double epsilon_fraction = 0.5;
  double delta = 0.0;

  InitMode init = InitMode::RandomInBand;
  std::vector<double> omega;

  /// Monte Carlo episodes per policy.
  std::size_t episodes = 100000;

  void validate() const;
};

void to_json(nlohmann::json& j, const InstanceSpec& spec);
void from_json(const nlohmann::json& j, InstanceSpec& spec);

/// The declared defaults of an experiment.
InstanceSpec default_spec(std::string_view experiment);

struct Instance
{
  std::size_t index;
  std::uint64_t seed;
  std::size_t horizon;
  ChannelModel model;
  BeliefVector omega;
};

void to_json(nlohmann::json& j, const Instance& instance);
Instance instance_from_json(const nlohmann::json& j);

/// Instance `index` drawn from `spec`; depends only on (spec, index).
Instance sample_instance(const InstanceSpec& spec, std::size_t index);

/*------------------------------------------------------------------------------------------------*/

enum class Verdict { Pass, Fail, Skipped };

std::string to_string(Verdict verdict);

struct InstanceResult
{
  Instance instance;
  Verdict verdict;
  nlohmann::json details;
  /// Present on failures: enough to re-execute the failing check.
  std::optional<nlohmann::json> witness;
};

struct ExperimentReport
{
  std::string experiment;
  InstanceSpec spec;
  std::vector<InstanceResult> results;
  double wall_seconds = 0.0;

  std::size_t count(Verdict v) const;
  /// Passes over non-skipped instances; 1 when everything was skipped.
  double pass_rate() const;
  bool all_passed() const { return count(Verdict::Fail) == 0; }
};

/// Report as JSON. Wall time is left out unless requested so that reruns are
/// byte-identical.
nlohmann::json report_to_json(const ExperimentReport& report, bool include_timing = false);

/// One row per instance.
void write_report_csv(std::ostream& os, const ExperimentReport& report);

/// Human-readable summary table.
void write_summary(std::ostream& os, const ExperimentReport& report);

/*------------------------------------------------------------------------------------------------*/

/// Round-robin policy versus belief-tracking argmax over every observation path.
ExperimentReport experiment_structure(const InstanceSpec& spec);

/// Myopic versus optimal for two channels.
ExperimentReport experiment_optimality(const InstanceSpec& spec);

/// Myopic versus optimal for three to five channels.
ExperimentReport experiment_conjecture(const InstanceSpec& spec);

/// Bound on the conditional value difference and its channel symmetry.
ExperimentReport experiment_lemma4(const InstanceSpec& spec);

/// Non-negativity of the one-step deviation gap at every reachable node.
ExperimentReport experiment_gap(const InstanceSpec& spec);

/// Simulated mean reward versus exact policy value.
ExperimentReport experiment_montecarlo(const InstanceSpec& spec);

/// Dispatches on the experiment name.
ExperimentReport run_experiment(std::string_view experiment, const InstanceSpec& spec);

/// Re-executes one instance of `experiment` under `spec`.
InstanceResult run_instance(std::string_view experiment, const InstanceSpec& spec,
                            const Instance& instance);

struct ReplayResult
{
  InstanceResult result;
  /// True iff verdict, details and witness match the stored ones.
  bool reproduced;
};

/// Re-runs instance `index` of a stored report.
ReplayResult replay(const nlohmann::json& report, std::size_t index);

/// Value-comparison tolerance used by the optimality checks.
inline constexpr double kValueTolerance = 1e-9;
/// Tolerance for exact identities (symmetry, bounds, gaps, ties).
inline constexpr double kExactTolerance = 1e-12;

} // namespace myopic::lab
