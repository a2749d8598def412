#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace myopic {

/// Channels are addressed by zero-based index internally. Reports and the
/// CLI print them one-based.
using Channel = std::size_t;

/// Raised when a belief update is conditioned on an observation that has
/// probability zero under the current belief (NAK on a surely-good channel
/// with a perfect detector).
class ZeroProbabilityObservation : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

enum class Observation : int { Nak = 0, Ack = 1 };

enum class CorrelationSign { Positive, Negative };

std::string to_string(CorrelationSign sign);

/*------------------------------------------------------------------------------------------------*/

/// Two-state Gilbert-Elliot channel together with the detector error rates.
///
/// State 1 is good, state 0 is bad. `epsilon` is the false-alarm probability
/// (good sensed as bad), `delta` the miss-detection probability (bad sensed
/// as good). All channels share one model.
class ChannelModel
{
public:
  /// Validates the open-interval restriction on the transition probabilities.
  ChannelModel(double p01, double p11, double epsilon, double delta = 0.0);

  /// Same as the constructor but admits p01, p11 in the closed interval [0, 1].
  /// Only the simulator accepts such models.
  static ChannelModel relaxed(double p01, double p11, double epsilon, double delta = 0.0);

  double p01() const noexcept { return p01_; }
  double p11() const noexcept { return p11_; }
  double p00() const noexcept { return 1.0 - p01_; }
  double p10() const noexcept { return 1.0 - p11_; }
  double epsilon() const noexcept { return epsilon_; }
  double delta() const noexcept { return delta_; }

  /// Lower and upper end of the band every belief enters after one update.
  double band_low() const noexcept { return p01_ < p11_ ? p01_ : p11_; }
  double band_high() const noexcept { return p01_ < p11_ ? p11_ : p01_; }

  CorrelationSign sign() const noexcept
  {
    return p11_ >= p01_ ? CorrelationSign::Positive : CorrelationSign::Negative;
  }

  /// True iff both transition probabilities lie in the open interval (0, 1).
  bool is_strict() const noexcept;

  ChannelModel with_epsilon(double epsilon) const;
  ChannelModel with_delta(double delta) const;

  friend bool operator==(const ChannelModel&, const ChannelModel&) = default;

private:
  struct relaxed_tag {};
  ChannelModel(relaxed_tag, double p01, double p11, double epsilon, double delta);

  double p01_;
  double p11_;
  double epsilon_;
  double delta_;
};

void to_json(nlohmann::json& j, const ChannelModel& model);
ChannelModel model_from_json(const nlohmann::json& j);

/*------------------------------------------------------------------------------------------------*/

/// Per-channel probability of being in the good state.
class BeliefVector
{
public:
  BeliefVector() = default;
  explicit BeliefVector(std::vector<double> omega);
  BeliefVector(std::initializer_list<double> omega);

  std::size_t size() const noexcept { return omega_.size(); }
  bool empty() const noexcept { return omega_.empty(); }
  double operator[](Channel i) const { return omega_[i]; }
  double at(Channel i) const { return omega_.at(i); }
  const std::vector<double>& values() const noexcept { return omega_; }

  auto begin() const noexcept { return omega_.begin(); }
  auto end() const noexcept { return omega_.end(); }

  friend bool operator==(const BeliefVector&, const BeliefVector&) = default;

private:
  std::vector<double> omega_;
};

/*------------------------------------------------------------------------------------------------*/

/// The one-step prediction x p11 + (1 - x) p01.
double gamma(double x, const ChannelModel& model);

/// Belief of a sensed channel after a NAK, propagated to the next slot.
/// The miss-detection rate does not enter.
double nak_posterior(double omega, const ChannelModel& model);

/// Next-slot belief vector after sensing `action` and observing `obs`.
BeliefVector belief_update(const BeliefVector& omega, Channel action, Observation obs,
                           const ChannelModel& model);

/// Probability of an ACK, which equals the expected one-slot reward.
double ack_probability(double omega, const ChannelModel& model);

struct EpsilonBound
{
  double bound;
  bool satisfied;
};

/// Largest false-alarm rate (exclusive) under which the round-robin structure
/// of the myopic policy holds.
EpsilonBound epsilon_bound(const ChannelModel& model);

/// True iff the belief lies outside [min(p01, p11), max(p01, p11)].
bool is_transient(double omega, const ChannelModel& model);

/// Stationary probability of the good state, p01 / (p01 + p10).
double stationary_belief(const ChannelModel& model);

} // namespace myopic

template <>
struct nlohmann::adl_serializer<myopic::ChannelModel>
{
  static myopic::ChannelModel from_json(const json& j) { return myopic::model_from_json(j); }
  static void to_json(json& j, const myopic::ChannelModel& m) { myopic::to_json(j, m); }
};
