#include "doctest.h"

#include <random>

#include "myopic/channel_model.hpp"

using namespace myopic;

namespace {

ChannelModel random_model(std::mt19937_64& rng, bool positive)
{
  std::uniform_real_distribution<double> u(0.05, 0.95);
  while (true)
  {
    double p01 = u(rng);
    double p11 = u(rng);
    if (std::abs(p11 - p01) < 0.01 || (p11 >= p01) != positive)
      continue;
    const ChannelModel shape(p01, p11, 0.0);
    return shape.with_epsilon(0.9 * epsilon_bound(shape).bound);
  }
}

} // namespace

TEST_CASE("model parameters are validated")
{
  CHECK_THROWS_AS(ChannelModel(0.0, 0.5, 0.1), std::domain_error);
  CHECK_THROWS_AS(ChannelModel(0.5, 1.0, 0.1), std::domain_error);
  CHECK_THROWS_AS(ChannelModel(0.5, 0.5, 1.0), std::domain_error);
  CHECK_THROWS_AS(ChannelModel(0.5, 0.5, 0.1, -0.1), std::domain_error);
  CHECK_NOTHROW(ChannelModel::relaxed(0.0, 1.0, 0.0));

  const ChannelModel m(0.3, 0.9, 0.05, 0.2);
  CHECK(m.p00() + m.p01() == 1.0);
  CHECK(m.p10() + m.p11() == 1.0);
  CHECK(m.sign() == CorrelationSign::Positive);
  CHECK(ChannelModel(0.9, 0.3, 0.0).sign() == CorrelationSign::Negative);
  CHECK(ChannelModel(0.4, 0.4, 0.0).sign() == CorrelationSign::Positive);
}

TEST_CASE("model json round trip")
{
  const ChannelModel m(0.25, 0.75, 0.01, 0.3);
  const nlohmann::json j = m;
  CHECK(j.at("p01") == 0.25);
  CHECK(j.at("delta") == 0.3);
  CHECK(j.get<ChannelModel>() == m);
}

TEST_CASE("gamma")
{
  const ChannelModel m(0.2, 0.8, 0.0);
  CHECK(gamma(0.0, m) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(gamma(1.0, m) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(gamma(0.5, m) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(gamma(1.5, m), std::domain_error);
  CHECK_THROWS_AS(gamma(-0.1, m), std::domain_error);
}

TEST_CASE("nak posterior")
{
  const ChannelModel perfect(0.2, 0.8, 0.0);
  CHECK(nak_posterior(0.5, perfect) == doctest::Approx(0.2));
  CHECK(nak_posterior(0.0, ChannelModel(0.2, 0.8, 0.3)) == doctest::Approx(0.2));
  CHECK_THROWS_AS(nak_posterior(1.0, perfect), ZeroProbabilityObservation);

  const ChannelModel noisy(0.2, 0.8, 0.1);
  CHECK(std::abs(nak_posterior(0.5, noisy) - (0.8 / 11.0 + 0.2 * 10.0 / 11.0)) < 1e-12);
  CHECK(std::abs(nak_posterior(0.5, noisy) - 0.2545454545454545) < 1e-12);
}

TEST_CASE("nak posterior matches Bayes over the four access events")
{
  // P(good | NAK) from the joint law of (state, event); delta enters both
  // bad-state events and cancels.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i)
  {
    const ChannelModel m(0.05 + 0.9 * u(rng), 0.05 + 0.9 * u(rng), 0.99 * u(rng), 0.99 * u(rng));
    const double w = 0.999 * u(rng);
    const double nak_good = w * m.epsilon();
    const double nak_bad = (1.0 - w) * (m.delta() + (1.0 - m.delta()));
    const double post = nak_good / (nak_good + nak_bad);
    const double expected = post * m.p11() + (1.0 - post) * m.p01();
    CHECK(std::abs(nak_posterior(w, m) - expected) < 1e-12);
  }
}

TEST_CASE("belief update")
{
  const ChannelModel m(0.2, 0.8, 0.1);
  const BeliefVector omega{0.5, 0.3};

  const auto ack = belief_update(omega, 0, Observation::Ack, m);
  CHECK(ack[0] == 0.8);
  CHECK(ack[1] == doctest::Approx(gamma(0.3, m)));

  const auto nak = belief_update(omega, 1, Observation::Nak, m.with_epsilon(0.0));
  CHECK(nak[0] == doctest::Approx(gamma(0.5, m)));
  CHECK(nak[1] == doctest::Approx(0.2));

  const auto det = belief_update(BeliefVector{1.0, 0.0}, 0, Observation::Ack, m);
  CHECK(det[0] == doctest::Approx(0.8));
  CHECK(det[1] == doctest::Approx(0.2));

  CHECK_THROWS_AS(belief_update(BeliefVector{1.0, 0.2}, 0, Observation::Nak, m.with_epsilon(0.0)),
                  ZeroProbabilityObservation);
  CHECK_THROWS(belief_update(omega, 2, Observation::Ack, m));
  CHECK_THROWS(BeliefVector{0.5, 1.2});
}

TEST_CASE("ack probability")
{
  const ChannelModel m(0.2, 0.8, 0.1);
  CHECK(ack_probability(0.0, m) == 0.0);
  CHECK(ack_probability(1.0, m.with_epsilon(0.0)) == 1.0);
  CHECK(ack_probability(0.5, m) == doctest::Approx(0.45));
}

TEST_CASE("epsilon bound")
{
  CHECK(std::abs(epsilon_bound(ChannelModel(0.2, 0.8, 0.0)).bound - 0.0625) < 1e-15);
  CHECK(std::abs(epsilon_bound(ChannelModel(0.8, 0.2, 0.0)).bound - 0.0625) < 1e-15);
  CHECK(epsilon_bound(ChannelModel(0.5, 0.5, 0.0)).bound == doctest::Approx(1.0));
  CHECK(epsilon_bound(ChannelModel(0.5, 0.5, 0.99)).satisfied);

  const ChannelModel m(0.2, 0.8, 0.0);
  const double b = epsilon_bound(m).bound;
  CHECK(epsilon_bound(m.with_epsilon(b * 0.999)).satisfied);
  CHECK_FALSE(epsilon_bound(m.with_epsilon(b)).satisfied);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i)
  {
    const auto pos = random_model(rng, true);
    const auto neg = random_model(rng, false);
    CHECK(epsilon_bound(pos).bound <= 1.0);
    CHECK(epsilon_bound(neg).bound <= 1.0);
  }
}

TEST_CASE("transient beliefs")
{
  const ChannelModel m(0.2, 0.8, 0.0);
  CHECK_FALSE(is_transient(0.5, m));
  CHECK(is_transient(0.9, m));
  CHECK(is_transient(0.1, m));
  CHECK_FALSE(is_transient(0.8, m));
  CHECK_FALSE(is_transient(0.2, m));
  CHECK_FALSE(is_transient(0.5, ChannelModel(0.8, 0.2, 0.0)));
}

TEST_CASE("stationary belief")
{
  CHECK(stationary_belief(ChannelModel(0.2, 0.8, 0.0)) == doctest::Approx(0.5));
  CHECK(stationary_belief(ChannelModel(0.1, 0.6, 0.0)) == doctest::Approx(0.1 / 0.5));
  CHECK_THROWS(stationary_belief(ChannelModel::relaxed(0.0, 1.0, 0.0)));
}

TEST_CASE("updated beliefs stay in the band")
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (bool positive : {true, false})
    for (int i = 0; i < 200; ++i)
    {
      const auto m = random_model(rng, positive);
      BeliefVector omega{u(rng), u(rng), u(rng)};
      for (int t = 0; t < 10; ++t)
      {
        const Channel a = static_cast<Channel>(u(rng) * 3.0);
        const Observation obs = u(rng) < 0.5 ? Observation::Ack : Observation::Nak;
        omega = belief_update(omega, a, obs, m);
        for (double w : omega)
        {
          CHECK(w >= m.band_low() - 1e-12);
          CHECK(w <= m.band_high() + 1e-12);
        }
      }
    }
}

TEST_CASE("delta never enters the belief update")
{
  const ChannelModel m(0.3, 0.7, 0.05);
  const BeliefVector omega{0.45, 0.6, 0.33};
  for (Observation obs : {Observation::Ack, Observation::Nak})
  {
    const auto ref = belief_update(omega, 1, obs, m);
    for (double d : {0.3, 0.9})
      CHECK(belief_update(omega, 1, obs, m.with_delta(d)) == ref);
  }
  CHECK(nak_posterior(0.45, m) == nak_posterior(0.45, m.with_delta(0.9)));
}
