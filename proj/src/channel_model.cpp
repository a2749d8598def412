#include "myopic/channel_model.hpp"

#include <cmath>
#include <sstream>

namespace myopic {

namespace {

bool is_probability(double x)
{
  return x >= 0.0 && x <= 1.0;
}

void require_probability(double x, const char* what)
{
  if (!is_probability(x))
  {
    std::ostringstream os;
    os << what << " must lie in [0, 1], got " << x;
    throw std::domain_error(os.str());
  }
}

void check_detector(double epsilon, double delta)
{
  if (!(epsilon >= 0.0 && epsilon < 1.0))
    throw std::domain_error("epsilon must lie in [0, 1)");
  if (!(delta >= 0.0 && delta < 1.0))
    throw std::domain_error("delta must lie in [0, 1)");
}

} // namespace

std::string to_string(CorrelationSign sign)
{
  return sign == CorrelationSign::Positive ? "positive" : "negative";
}

/*------------------------------------------------------------------------------------------------*/

ChannelModel::ChannelModel(double p01, double p11, double epsilon, double delta)
  : ChannelModel(relaxed_tag{}, p01, p11, epsilon, delta)
{
  if (!is_strict())
    throw std::domain_error("p01 and p11 must lie in the open interval (0, 1)");
}

ChannelModel::ChannelModel(relaxed_tag, double p01, double p11, double epsilon, double delta)
  : p01_{p01}
  , p11_{p11}
  , epsilon_{epsilon}
  , delta_{delta}
{
  require_probability(p01, "p01");
  require_probability(p11, "p11");
  check_detector(epsilon, delta);
}

ChannelModel ChannelModel::relaxed(double p01, double p11, double epsilon, double delta)
{
  return ChannelModel(relaxed_tag{}, p01, p11, epsilon, delta);
}

bool ChannelModel::is_strict() const noexcept
{
  return p01_ > 0.0 && p01_ < 1.0 && p11_ > 0.0 && p11_ < 1.0;
}

ChannelModel ChannelModel::with_epsilon(double epsilon) const
{
  return ChannelModel(relaxed_tag{}, p01_, p11_, epsilon, delta_);
}

ChannelModel ChannelModel::with_delta(double delta) const
{
  return ChannelModel(relaxed_tag{}, p01_, p11_, epsilon_, delta);
}

void to_json(nlohmann::json& j, const ChannelModel& model)
{
  j = nlohmann::json{{"p01", model.p01()},
                     {"p11", model.p11()},
                     {"epsilon", model.epsilon()},
                     {"delta", model.delta()}};
}

ChannelModel model_from_json(const nlohmann::json& j)
{
  return ChannelModel(j.at("p01").get<double>(), j.at("p11").get<double>(),
                       j.at("epsilon").get<double>(), j.value("delta", 0.0));
}

/*------------------------------------------------------------------------------------------------*/

BeliefVector::BeliefVector(std::vector<double> omega)
  : omega_{std::move(omega)}
{
  for (double w : omega_)
    require_probability(w, "belief entry");
}

BeliefVector::BeliefVector(std::initializer_list<double> omega)
  : BeliefVector(std::vector<double>(omega))
{}

/*------------------------------------------------------------------------------------------------*/

double gamma(double x, const ChannelModel& model)
{
  require_probability(x, "gamma argument");
  return x * model.p11() + (1.0 - x) * model.p01();
}

double nak_posterior(double omega, const ChannelModel& model)
{
  require_probability(omega, "belief");
  const double eps = model.epsilon();
  const double nak = eps * omega + (1.0 - omega);
  if (nak <= 0.0)
    throw ZeroProbabilityObservation("NAK has zero probability: belief is 1 and epsilon is 0");
  return gamma(eps * omega / nak, model);
}

BeliefVector belief_update(const BeliefVector& omega, Channel action, Observation obs,
                           const ChannelModel& model)
{
  if (action >= omega.size())
    throw std::out_of_range("action is not a channel of the belief vector");

  std::vector<double> next(omega.size());
  for (Channel i = 0; i < omega.size(); ++i)
  {
    if (i != action)
      next[i] = gamma(omega[i], model);
    else if (obs == Observation::Ack)
      next[i] = model.p11();
    else
      next[i] = nak_posterior(omega[i], model);
  }
  return BeliefVector(std::move(next));
}

double ack_probability(double omega, const ChannelModel& model)
{
  require_probability(omega, "belief");
  return omega * (1.0 - model.epsilon());
}

EpsilonBound epsilon_bound(const ChannelModel& model)
{
  const double bound = model.sign() == CorrelationSign::Positive
                         ? model.p10() * model.p01() / (model.p11() * model.p00())
                         : model.p00() * model.p11() / (model.p01() * model.p10());
  return {bound, model.epsilon() < bound};
}

bool is_transient(double omega, const ChannelModel& model)
{
  require_probability(omega, "belief");
  return omega < model.band_low() || omega > model.band_high();
}

double stationary_belief(const ChannelModel& model)
{
  const double denom = model.p01() + model.p10();
  if (denom <= 0.0)
    throw std::domain_error("chain with p01 = 0 and p11 = 1 has no unique stationary distribution");
  return model.p01() / denom;
}

} // namespace myopic
