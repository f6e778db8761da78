#pragma once

#include <string>

#include "scynet/chain.hpp"
#include "scynet/config.hpp"
#include "scynet/crypto.hpp"
#include "scynet/toy_domain.hpp"
#include "scynet/transactions.hpp"

namespace scynet::testing {

inline Digest seed_of(const std::string& label) {
  return sha256(std::span(reinterpret_cast<const std::uint8_t*>(label.data()), label.size()));
}

inline KeyPair key(const std::string& label) { return keygen(seed_of("key/" + label)); }
inline AccountId acct(const std::string& label) { return key(label).account(); }
inline Uuid uuid(const std::string& label) { return Uuid::from_digest(seed_of("uuid/" + label)); }

/// Hour-long tournaments with one-minute ticks.
inline DomainConfig realtime_domain() {
  DomainConfig c;
  c.problem_type = ProblemType::RealTime;
  c.tournament_start_frequency = 3'600'000;
  c.real_time_frequency = 60'000;
  c.proposer_deadline = 600'000;
  c.time_tolerance = 5'000;
  c.agent_submission_fee = TokenAmount(100);
  c.data_publish_fee = TokenAmount(10);
  c.price_publish_fee = TokenAmount(5);
  c.rent_fee = TokenAmount(2);
  return c;
}

inline DomainConfig dataset_domain() {
  DomainConfig c = realtime_domain();
  c.problem_type = ProblemType::Dataset;
  c.real_time_frequency.reset();
  c.dataset_submission_deadline = 900'000;
  c.min_agent_challengers = 3;
  c.min_agent_challenger_voting_power = Rational{1, 5};
  return c;
}

}  // namespace scynet::testing
