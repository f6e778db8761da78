#pragma once

#include <map>
#include <set>
#include <vector>

#include "scynet/config.hpp"
#include "scynet/crypto.hpp"
#include "scynet/ledger.hpp"

namespace scynet {

using PowerMap = std::map<AccountId, std::uint64_t>;

enum class ConsensusErrc { NoEligibleProposer, SelectionImpossible };
const char* to_string(ConsensusErrc c);
using ConsensusError = CodedError<ConsensusErrc>;

/// Coin-age power of every staked account at `now`.
PowerMap network_powers(const LedgerState& ledger, Timestamp now);

enum class SelectionPurpose { Proposer, Challenger };

struct SelectionSeed {
  Digest bytes{};
  bool operator==(const SelectionSeed&) const = default;
};

/// Mixes the previous block digest, the height being decided, the purpose,
/// and a retry counter (bumped when a proposed block is rejected).
SelectionSeed make_seed(const Digest& prev_block, std::uint64_t height, SelectionPurpose purpose,
                        std::uint64_t round = 0);

/// Draws one account with probability proportional to power.
AccountId select_proposer(const PowerMap& powers, const SelectionSeed& seed);

struct ChallengerSet {
  std::vector<AccountId> members;  ///< ascending
  std::map<AccountId, std::uint64_t> powers;  ///< selection-time snapshot

  std::uint64_t total_power() const;
  bool contains(const AccountId& a) const { return powers.count(a) != 0; }
  bool operator==(const ChallengerSet&) const = default;
};

/// Weighted sampling without replacement over non-miners until the set has
/// at least minAgentChallengers members, holds at least the configured share
/// of network power, and no member exceeds 10% of the set's power.
ChallengerSet select_challengers(const PowerMap& powers, const SelectionSeed& seed, const ValidatedConfig& cfg,
                                 const std::set<AccountId>& participating_miners);

/// voters' power * 3 > total power * 2. Votes whose signature does not verify
/// against `block_digest` are ignored.
bool block_accepted(const std::map<AccountId, Signature>& votes, const PowerMap& powers,
                    const Digest& block_digest, const std::map<AccountId, PublicKey>& keys);

/// Threshold arithmetic alone, for callers that already verified votes.
bool supermajority(std::uint64_t voted_power, std::uint64_t total_power);

}  // namespace scynet
