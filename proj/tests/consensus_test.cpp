#include <gtest/gtest.h>

#include <cmath>

#include "scynet/consensus.hpp"
#include "support.hpp"

namespace scynet {
namespace {

using testing::acct;
using testing::dataset_domain;
using testing::key;

SelectionSeed seed_n(std::uint64_t i) { return make_seed(Digest{}, i, SelectionPurpose::Proposer); }

TEST(SelectProposer, SingleStakerAlwaysWins) {
  const PowerMap p{{acct("A"), 10}};
  for (std::uint64_t i = 0; i < 50; ++i) EXPECT_EQ(select_proposer(p, seed_n(i)), acct("A"));
}

TEST(SelectProposer, ZeroPowerIgnored) {
  const PowerMap p{{acct("A"), 0}, {acct("B"), 5}};
  for (std::uint64_t i = 0; i < 50; ++i) EXPECT_EQ(select_proposer(p, seed_n(i)), acct("B"));
}

TEST(SelectProposer, AllZeroRejected) {
  try {
    select_proposer({{acct("A"), 0}}, seed_n(0));
    FAIL();
  } catch (const ConsensusError& e) {
    EXPECT_EQ(e.code(), ConsensusErrc::NoEligibleProposer);
  }
  EXPECT_THROW(select_proposer({}, seed_n(0)), ConsensusError);
}

TEST(SelectProposer, ProportionalToPower) {
  const PowerMap p{{acct("A"), 300}, {acct("B"), 100}};
  int a_wins = 0;
  for (std::uint64_t i = 0; i < 10'000; ++i) a_wins += select_proposer(p, seed_n(i)) == acct("A");
  // Binomial(10000, 3/4): sigma = sqrt(10000 * 3/4 * 1/4) ~ 43.3, 3 sigma = 130.
  const double sigma = std::sqrt(10'000 * 0.75 * 0.25);
  EXPECT_LE(std::abs(a_wins - 7'500), 3 * sigma) << a_wins;
}

TEST(SelectProposer, SeedDeterminesOutcome) {
  const PowerMap p{{acct("A"), 1}, {acct("B"), 1}, {acct("C"), 1}};
  for (std::uint64_t i = 0; i < 20; ++i) EXPECT_EQ(select_proposer(p, seed_n(i)), select_proposer(p, seed_n(i)));
}

TEST(MakeSeed, InputsSeparated) {
  const Digest prev{};
  const SelectionSeed base = make_seed(prev, 5, SelectionPurpose::Proposer, 0);
  EXPECT_NE(base, make_seed(prev, 6, SelectionPurpose::Proposer, 0));
  EXPECT_NE(base, make_seed(prev, 5, SelectionPurpose::Challenger, 0));
  EXPECT_NE(base, make_seed(prev, 5, SelectionPurpose::Proposer, 1));
  Digest other{};
  other[0] = 1;
  EXPECT_NE(base, make_seed(other, 5, SelectionPurpose::Proposer, 0));
}

TEST(NetworkPowers, CoinAgeOfEveryStaker) {
  const LedgerState l = genesis({{acct("A"), TokenAmount(500)}, {acct("B"), TokenAmount(500)}, {acct("C"), TokenAmount(5)}},
                                {{acct("A"), {TokenAmount(100), 0}}, {acct("B"), {TokenAmount(50), kMillisPerDay}}});
  const PowerMap p = network_powers(l, 3 * kMillisPerDay);
  EXPECT_EQ(p.at(acct("A")), 300u);
  EXPECT_EQ(p.at(acct("B")), 100u);
  EXPECT_EQ(p.count(acct("C")), 0u);
}

PowerMap equal_powers(int n, std::uint64_t each = 10) {
  PowerMap p;
  for (int i = 0; i < n; ++i) p[acct("n" + std::to_string(i))] = each;
  return p;
}

void expect_invariants(const ChallengerSet& s, const PowerMap& p, const ValidatedConfig& cfg,
                       const std::set<AccountId>& miners) {
  std::uint64_t network = 0;
  for (const auto& [_, w] : p) network += w;
  EXPECT_GE(s.members.size(), *cfg->min_agent_challengers);
  const Rational share = *cfg->min_agent_challenger_voting_power;
  EXPECT_GE(static_cast<unsigned __int128>(s.total_power()) * share.den,
            static_cast<unsigned __int128>(network) * share.num);
  for (const auto& [a, w] : s.powers) {
    EXPECT_LE(w * 10, s.total_power());
    EXPECT_EQ(miners.count(a), 0u);
    EXPECT_EQ(w, p.at(a));
  }
  EXPECT_TRUE(std::is_sorted(s.members.begin(), s.members.end()));
}

TEST(SelectChallengers, TenEqualNodesAllSelected) {
  const ValidatedConfig cfg = validate_config(dataset_domain());
  const PowerMap p = equal_powers(10);
  // Brute force: the smallest subset satisfying the cap has 10 equal members.
  std::size_t smallest = 0;
  for (std::uint32_t mask = 1; mask < (1u << 10); ++mask) {
    const auto n = static_cast<std::size_t>(__builtin_popcount(mask));
    if (n >= 3 && 10 * 10 <= n * 10 && (smallest == 0 || n < smallest)) smallest = n;
  }
  EXPECT_EQ(smallest, 10u);
  for (std::uint64_t i = 0; i < 10; ++i) {
    const ChallengerSet s = select_challengers(p, make_seed(Digest{}, i, SelectionPurpose::Challenger), cfg, {});
    EXPECT_EQ(s.members.size(), 10u);
    expect_invariants(s, p, cfg, {});
  }
}

TEST(SelectChallengers, UnequalPowersMeetEveryConstraint) {
  const ValidatedConfig cfg = validate_config(dataset_domain());
  PowerMap p;
  for (int i = 0; i < 40; ++i) p[acct("u" + std::to_string(i))] = 5 + static_cast<std::uint64_t>(i % 7) * 3;
  std::set<AccountId> miners{acct("u1"), acct("u2"), acct("u3")};
  for (std::uint64_t i = 0; i < 25; ++i) {
    const ChallengerSet s = select_challengers(p, make_seed(Digest{}, i, SelectionPurpose::Challenger), cfg, miners);
    expect_invariants(s, p, cfg, miners);
  }
}

TEST(SelectChallengers, ImpossibleWithOneNode) {
  DomainConfig c = dataset_domain();
  c.min_agent_challengers = 2;
  const ValidatedConfig cfg = validate_config(c);
  try {
    select_challengers({{acct("solo"), 10}}, make_seed(Digest{}, 1, SelectionPurpose::Challenger), cfg, {});
    FAIL();
  } catch (const ConsensusError& e) {
    EXPECT_EQ(e.code(), ConsensusErrc::SelectionImpossible);
  }
}

TEST(SelectChallengers, ImpossibleWhenEveryoneMines) {
  const ValidatedConfig cfg = validate_config(dataset_domain());
  const PowerMap p = equal_powers(12);
  std::set<AccountId> miners;
  for (const auto& [a, _] : p) miners.insert(a);
  EXPECT_THROW(select_challengers(p, make_seed(Digest{}, 1, SelectionPurpose::Challenger), cfg, miners),
               ConsensusError);
}

TEST(SelectChallengers, RealtimeDomainRejected) {
  const ValidatedConfig cfg = validate_config(testing::realtime_domain());
  EXPECT_THROW(select_challengers(equal_powers(10), make_seed(Digest{}, 1, SelectionPurpose::Challenger), cfg, {}),
               ScheduleError);
}

struct Voters {
  PowerMap powers;
  std::map<AccountId, PublicKey> keys;
  std::map<AccountId, KeyPair> pairs;
  explicit Voters(std::vector<std::uint64_t> ws) {
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const KeyPair k = key("voter" + std::to_string(i));
      powers[k.account()] = ws[i];
      keys[k.account()] = k.public_key();
      pairs.emplace(k.account(), k);
    }
  }
  std::map<AccountId, Signature> sign(const Digest& d, std::size_t count) const {
    std::map<AccountId, Signature> out;
    for (const auto& [a, k] : pairs) {
      if (out.size() == count) break;
      out[a] = k.sign(d);
    }
    return out;
  }
};

TEST(BlockAccepted, ExactlyTwoThirdsIsNotEnough) {
  const Voters v({1, 1, 1});
  const Digest d = testing::seed_of("block");
  EXPECT_FALSE(block_accepted(v.sign(d, 2), v.powers, d, v.keys));
  EXPECT_TRUE(block_accepted(v.sign(d, 3), v.powers, d, v.keys));
  EXPECT_FALSE(block_accepted({}, v.powers, d, v.keys));
}

TEST(BlockAccepted, SignaturesOverOtherDigestsIgnored) {
  const Voters v({1, 1, 1});
  const Digest d = testing::seed_of("block");
  auto votes = v.sign(d, 3);
  votes.begin()->second = v.pairs.begin()->second.sign(testing::seed_of("other"));
  EXPECT_FALSE(block_accepted(votes, v.powers, d, v.keys));
}

TEST(Supermajority, IntegerInequalityOracle) {
  for (std::uint64_t total = 1; total <= 60; ++total) {
    for (std::uint64_t voted = 0; voted <= total; ++voted) {
      // voted / total > 2/3 without floating point.
      EXPECT_EQ(supermajority(voted, total), voted * 3 > total * 2) << voted << "/" << total;
    }
  }
}

}  // namespace
}  // namespace scynet
