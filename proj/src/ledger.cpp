#include "scynet/ledger.hpp"

namespace scynet {

const char* to_string(LedgerErrc c) {
  switch (c) {
    case LedgerErrc::InsufficientAllocation: return "InsufficientAllocation";
    case LedgerErrc::InsufficientBalance: return "InsufficientBalance";
    case LedgerErrc::NoStake: return "NoStake";
    case LedgerErrc::InsufficientPool: return "InsufficientPool";
    case LedgerErrc::InvalidStake: return "InvalidStake";
  }
  return "LedgerError";
}

namespace {

void debit(LedgerState& s, const AccountId& account, TokenAmount amount) {
  const TokenAmount have = s.balance(account);
  if (have < amount) throw LedgerError(LedgerErrc::InsufficientBalance, account.hex());
  s.balances[account] = have - amount;
}

void credit(LedgerState& s, const AccountId& account, TokenAmount amount) {
  s.balances[account] = s.balance(account) + amount;
}

void debit_escrow(LedgerState& s, TokenAmount amount) {
  if (s.current_reward_pool < amount) throw LedgerError(LedgerErrc::InsufficientPool);
  s.current_reward_pool -= amount;
}

}  // namespace

LedgerState genesis(const std::map<AccountId, TokenAmount>& allocations,
                    const std::map<AccountId, GenesisStake>& stakes) {
  LedgerState s;
  for (const auto& [account, amount] : allocations) {
    s.balances[account] = amount;
    s.total_supply += amount;
  }
  for (const auto& [account, stake] : stakes) {
    const auto it = s.balances.find(account);
    if (it == s.balances.end() || it->second < stake.amount) {
      throw LedgerError(LedgerErrc::InsufficientAllocation, account.hex());
    }
    if (stake.amount.is_zero()) throw LedgerError(LedgerErrc::InvalidStake, "stake must be positive");
    it->second -= stake.amount;
    s.stakes[account] = StakeRecord{account, stake.amount, stake.since};
  }
  return s;
}

std::uint64_t consensus_power(const LedgerState& ledger, const AccountId& account, Timestamp now) {
  const auto it = ledger.stakes.find(account);
  if (it == ledger.stakes.end()) return 0;
  const StakeRecord& stake = it->second;
  const Duration age = now > stake.since ? now - stake.since : 0;
  const auto days = static_cast<std::uint64_t>(age / kMillisPerDay);
  return (stake.amount * std::max<std::uint64_t>(1, days)).value();
}

LedgerState reset_coin_age(const LedgerState& ledger, const AccountId& account, Timestamp now) {
  const auto it = ledger.stakes.find(account);
  if (it == ledger.stakes.end()) throw LedgerError(LedgerErrc::NoStake, account.hex());
  LedgerState s = ledger;
  s.stakes[account].since = now;
  return s;
}

LedgerState change_stake(const LedgerState& ledger, const AccountId& account, TokenAmount new_stake,
                         Timestamp now) {
  LedgerState s = ledger;
  const auto it = s.stakes.find(account);
  const TokenAmount old_stake = it == s.stakes.end() ? TokenAmount{} : it->second.amount;
  if (new_stake > old_stake) {
    debit(s, account, new_stake - old_stake);
  } else {
    credit(s, account, old_stake - new_stake);
  }
  if (new_stake.is_zero()) {
    s.stakes.erase(account);
  } else {
    s.stakes[account] = StakeRecord{account, new_stake, now};
  }
  return s;
}

LedgerState charge_fee(const LedgerState& ledger, const AccountId& account, TokenAmount amount,
                       FeeDestination) {
  if (amount.is_zero()) return ledger;
  LedgerState s = ledger;
  debit(s, account, amount);
  s.next_reward_pool += amount;
  s.next_pool_receipts.push_back(FeeReceipt{account, amount});
  return s;
}

LedgerState transfer(const LedgerState& ledger, const AccountId& from, const AccountId& to, TokenAmount amount) {
  LedgerState s = ledger;
  debit(s, from, amount);
  credit(s, to, amount);
  return s;
}

std::pair<LedgerState, PoolRotation> rotate_pools(const LedgerState& ledger) {
  LedgerState s = ledger;
  PoolRotation moved{s.next_reward_pool, std::move(s.next_pool_receipts)};
  s.current_reward_pool += s.next_reward_pool;
  s.next_reward_pool = TokenAmount{};
  s.next_pool_receipts.clear();
  return {std::move(s), std::move(moved)};
}

LedgerState pay_from_current(const LedgerState& ledger, const AccountId& to, TokenAmount amount) {
  LedgerState s = ledger;
  debit_escrow(s, amount);
  credit(s, to, amount);
  return s;
}

LedgerState carry_to_next(const LedgerState& ledger, TokenAmount amount) {
  if (amount.is_zero()) return ledger;
  LedgerState s = ledger;
  debit_escrow(s, amount);
  s.next_reward_pool += amount;
  s.next_pool_receipts.push_back(FeeReceipt{std::nullopt, amount});
  return s;
}

LedgerState refund_receipts(const LedgerState& ledger, const std::vector<FeeReceipt>& receipts) {
  LedgerState s = ledger;
  for (const FeeReceipt& r : receipts) {
    if (r.payer) {
      debit_escrow(s, r.amount);
      credit(s, *r.payer, r.amount);
    } else {
      s = carry_to_next(s, r.amount);
    }
  }
  return s;
}

TokenAmount accounted_supply(const LedgerState& ledger) {
  TokenAmount sum = ledger.current_reward_pool + ledger.next_reward_pool;
  for (const auto& [_, amount] : ledger.balances) sum += amount;
  for (const auto& [_, stake] : ledger.stakes) sum += stake.amount;
  return sum;
}

bool is_conserved(const LedgerState& ledger) {
  try {
    return accounted_supply(ledger) == ledger.total_supply;
  } catch (const ArithmeticError&) {
    return false;
  }
}

nlohmann::json ledger_to_json(const LedgerState& ledger) {
  nlohmann::json j;
  nlohmann::json balances = nlohmann::json::object();
  for (const auto& [account, amount] : ledger.balances) balances[account.hex()] = amount.value();
  nlohmann::json stakes = nlohmann::json::object();
  for (const auto& [account, stake] : ledger.stakes) {
    stakes[account.hex()] = {{"amount", stake.amount.value()}, {"since", stake.since}};
  }
  nlohmann::json receipts = nlohmann::json::array();
  for (const FeeReceipt& r : ledger.next_pool_receipts) {
    receipts.push_back({{"payer", r.payer ? r.payer->hex() : ""}, {"amount", r.amount.value()}});
  }
  j["balances"] = std::move(balances);
  j["stakes"] = std::move(stakes);
  j["currentRewardPool"] = ledger.current_reward_pool.value();
  j["nextRewardPool"] = ledger.next_reward_pool.value();
  j["totalSupply"] = ledger.total_supply.value();
  j["nextPoolReceipts"] = std::move(receipts);
  return j;
}

}  // namespace scynet
