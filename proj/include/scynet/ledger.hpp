#pragma once

#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "scynet/types.hpp"

namespace scynet {

enum class LedgerErrc { InsufficientAllocation, InsufficientBalance, NoStake, InsufficientPool, InvalidStake };
const char* to_string(LedgerErrc c);
using LedgerError = CodedError<LedgerErrc>;

struct StakeRecord {
  AccountId account;
  TokenAmount amount;
  Timestamp since = 0;  ///< coin-age epoch
  bool operator==(const StakeRecord&) const = default;
};

/// One contribution to a reward pool. A missing payer marks tokens carried
/// over from an earlier tournament (remainders, zero-agent rollovers).
struct FeeReceipt {
  std::optional<AccountId> payer;
  TokenAmount amount;
  bool operator==(const FeeReceipt&) const = default;
};

/// Fixed-supply token ledger. `current_reward_pool` escrows the pools of all
/// started, unresolved tournaments; `next_reward_pool` accrues fees for the
/// tournament that starts next.
struct LedgerState {
  std::map<AccountId, TokenAmount> balances;
  std::map<AccountId, StakeRecord> stakes;
  TokenAmount current_reward_pool;
  TokenAmount next_reward_pool;
  TokenAmount total_supply;
  std::vector<FeeReceipt> next_pool_receipts;

  bool operator==(const LedgerState&) const = default;

  TokenAmount balance(const AccountId& a) const {
    const auto it = balances.find(a);
    return it == balances.end() ? TokenAmount{} : it->second;
  }
};

struct GenesisStake {
  TokenAmount amount;
  Timestamp since = 0;
};

LedgerState genesis(const std::map<AccountId, TokenAmount>& allocations,
                    const std::map<AccountId, GenesisStake>& stakes);

/// stake * max(1, whole days since staking); 0 when unstaked.
std::uint64_t consensus_power(const LedgerState& ledger, const AccountId& account, Timestamp now);

LedgerState reset_coin_age(const LedgerState& ledger, const AccountId& account, Timestamp now);

/// Moves tokens between balance and stake. Any change resets coin-age.
LedgerState change_stake(const LedgerState& ledger, const AccountId& account, TokenAmount new_stake,
                         Timestamp now);

enum class FeeDestination { NextPool };

LedgerState charge_fee(const LedgerState& ledger, const AccountId& account, TokenAmount amount,
                       FeeDestination destination = FeeDestination::NextPool);

LedgerState transfer(const LedgerState& ledger, const AccountId& from, const AccountId& to, TokenAmount amount);

/// What a rotation moved from the next pool into escrow.
struct PoolRotation {
  TokenAmount amount;
  std::vector<FeeReceipt> receipts;
};

/// Called once at every tournament start.
std::pair<LedgerState, PoolRotation> rotate_pools(const LedgerState& ledger);

/// Escrow → account.
LedgerState pay_from_current(const LedgerState& ledger, const AccountId& to, TokenAmount amount);

/// Escrow → next pool, recorded as a payer-less receipt.
LedgerState carry_to_next(const LedgerState& ledger, TokenAmount amount);

/// Escrow → original payers; payer-less receipts roll into the next pool.
LedgerState refund_receipts(const LedgerState& ledger, const std::vector<FeeReceipt>& receipts);

/// sum(balances) + sum(stakes) + pools, checked.
TokenAmount accounted_supply(const LedgerState& ledger);
bool is_conserved(const LedgerState& ledger);

nlohmann::json ledger_to_json(const LedgerState& ledger);

}  // namespace scynet
