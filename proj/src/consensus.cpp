#include "scynet/consensus.hpp"

#include "scynet/codec.hpp"
#include "scynet/rng.hpp"

namespace scynet {

const char* to_string(ConsensusErrc c) {
  switch (c) {
    case ConsensusErrc::NoEligibleProposer: return "NoEligibleProposer";
    case ConsensusErrc::SelectionImpossible: return "SelectionImpossible";
  }
  return "ConsensusError";
}

namespace {

std::uint64_t checked_sum(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw ArithmeticError(ArithmeticErrc::Overflow, "power sum");
  return r;
}

/// Index into `weights` picked proportionally to weight. Total must be > 0.
std::size_t weighted_pick(const std::vector<std::uint64_t>& weights, std::uint64_t total, DigestRng& rng) {
  std::uint64_t target = rng.uniform_below(total);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (target < weights[i]) return i;
    target -= weights[i];
  }
  return weights.size() - 1;  // unreachable when total == sum(weights)
}

}  // namespace

PowerMap network_powers(const LedgerState& ledger, Timestamp now) {
  PowerMap out;
  for (const auto& [account, _] : ledger.stakes) out[account] = consensus_power(ledger, account, now);
  return out;
}

SelectionSeed make_seed(const Digest& prev_block, std::uint64_t height, SelectionPurpose purpose,
                        std::uint64_t round) {
  ByteWriter w;
  w.str(purpose == SelectionPurpose::Proposer ? "proposer" : "challenger").raw(prev_block).u64(height).u64(round);
  return SelectionSeed{canonical_digest(w.data())};
}

AccountId select_proposer(const PowerMap& powers, const SelectionSeed& seed) {
  std::vector<AccountId> accounts;
  std::vector<std::uint64_t> weights;
  std::uint64_t total = 0;
  for (const auto& [account, power] : powers) {
    if (power == 0) continue;
    accounts.push_back(account);
    weights.push_back(power);
    total = checked_sum(total, power);
  }
  if (total == 0) throw ConsensusError(ConsensusErrc::NoEligibleProposer);
  DigestRng rng(seed.bytes);
  return accounts[weighted_pick(weights, total, rng)];
}

std::uint64_t ChallengerSet::total_power() const {
  std::uint64_t sum = 0;
  for (const auto& [_, p] : powers) sum = checked_sum(sum, p);
  return sum;
}

ChallengerSet select_challengers(const PowerMap& powers, const SelectionSeed& seed, const ValidatedConfig& cfg,
                                 const std::set<AccountId>& participating_miners) {
  if (!cfg.is_dataset()) throw ScheduleError(ScheduleErrc::WrongDomainType);
  const std::uint64_t min_members = *cfg->min_agent_challengers;
  const Rational share = *cfg->min_agent_challenger_voting_power;

  std::uint64_t network_total = 0;
  std::vector<AccountId> pool;
  std::vector<std::uint64_t> weights;
  for (const auto& [account, power] : powers) {
    network_total = checked_sum(network_total, power);
    if (power == 0 || participating_miners.count(account)) continue;
    pool.push_back(account);
    weights.push_back(power);
  }

  auto satisfied = [&](std::uint64_t count, std::uint64_t sum, std::uint64_t max_member) {
    if (count < min_members) return false;
    // sum / network_total >= share.num / share.den
    const unsigned __int128 lhs = static_cast<unsigned __int128>(sum) * share.den;
    const unsigned __int128 rhs = static_cast<unsigned __int128>(network_total) * share.num;
    if (lhs < rhs) return false;
    // no member above 10% of the selected power
    return static_cast<unsigned __int128>(max_member) * 10 <= sum;
  };

  DigestRng rng(seed.bytes);
  ChallengerSet set;
  std::uint64_t sum = 0;
  std::uint64_t max_member = 0;
  std::uint64_t remaining = 0;
  for (auto w : weights) remaining = checked_sum(remaining, w);

  while (remaining > 0) {
    const std::size_t i = weighted_pick(weights, remaining, rng);
    set.powers[pool[i]] = weights[i];
    sum += weights[i];
    max_member = std::max(max_member, weights[i]);
    remaining -= weights[i];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(i));
    weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(i));
    if (satisfied(set.powers.size(), sum, max_member)) {
      for (const auto& [account, _] : set.powers) set.members.push_back(account);
      return set;
    }
  }
  throw ConsensusError(ConsensusErrc::SelectionImpossible);
}

bool supermajority(std::uint64_t voted_power, std::uint64_t total_power) {
  return static_cast<unsigned __int128>(voted_power) * 3 > static_cast<unsigned __int128>(total_power) * 2;
}

bool block_accepted(const std::map<AccountId, Signature>& votes, const PowerMap& powers,
                    const Digest& block_digest, const std::map<AccountId, PublicKey>& keys) {
  std::uint64_t total = 0;
  for (const auto& [_, p] : powers) total = checked_sum(total, p);
  std::uint64_t voted = 0;
  for (const auto& [voter, sig] : votes) {
    const auto key = keys.find(voter);
    const auto power = powers.find(voter);
    if (key == keys.end() || power == powers.end()) continue;
    if (!verify_cached(block_digest, sig, key->second)) continue;
    voted = checked_sum(voted, power->second);
  }
  return supermajority(voted, total);
}

}  // namespace scynet
