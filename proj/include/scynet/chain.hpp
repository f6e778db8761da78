#pragma once

#include <map>
#include <optional>

#include <json.hpp>

#include "scynet/blob_store.hpp"
#include "scynet/config.hpp"
#include "scynet/ledger.hpp"
#include "scynet/tournament.hpp"

namespace scynet {

enum class PriceScheme : std::uint8_t { PerUse = 0, Subscription = 1, Buyout = 2 };
const char* to_string(PriceScheme s);
PriceScheme price_scheme_from_string(std::string_view s);

struct AgentRecord {
  AccountId owner;
  std::uint64_t tournament = 0;
  Timestamp registered_at = 0;
  bool validated = false;  ///< ranked in a resolved tournament
  bool operator==(const AgentRecord&) const = default;
};

struct DataOffering {
  AccountId owner;
  Bytes params;
  bool operator==(const DataOffering&) const = default;
};

struct Listing {
  AccountId seller;
  PriceScheme scheme = PriceScheme::PerUse;
  TokenAmount price;
  bool is_agent = true;
  bool operator==(const Listing&) const = default;
};

/// Everything the replicated application agrees on. Applying the same blocks
/// to the same genesis yields an equal ChainState on every node.
struct ChainState {
  LedgerState ledger;
  std::map<AccountId, PublicKey> keys;
  std::map<AccountId, std::uint64_t> sequences;  ///< last applied, per sender
  std::map<Uuid, AgentRecord> agents;
  std::map<Uuid, DataOffering> data_offerings;
  std::map<Uuid, Listing> listings;
  std::map<std::uint64_t, TournamentState> tournaments;
  std::uint64_t next_tournament = 0;  ///< lowest index not yet started
  Timestamp time = 0;                 ///< timestamp of the last block (or genesis)
  std::uint64_t height = 0;
  Digest head{};

  bool operator==(const ChainState&) const = default;

  TournamentState& tournament(std::uint64_t index);
  const TournamentState* find_tournament(std::uint64_t index) const;
  /// Oldest tournament that has started and is neither resolved nor failed.
  const TournamentState* oldest_unsettled() const;
};

struct GenesisAccount {
  PublicKey key{};
  TokenAmount balance;  ///< total allocation, stake included
  TokenAmount stake;
};

ChainState chain_genesis(const std::vector<GenesisAccount>& accounts, Timestamp time = 0);

/// Read-only collaborators every state transition may consult.
struct ChainEnv {
  const ValidatedConfig* cfg = nullptr;
  const DomainOracle* oracle = nullptr;
  const BlobStore* blobs = nullptr;
};

/// Moves the clock to `now`: starts tournaments whose window has opened,
/// records deadline-derived disqualifications, and evaluates tournaments
/// whose reveal window has closed. `now` must not precede `s.time`.
void advance_chain(ChainState& s, const ChainEnv& env, Timestamp now);

/// Tournaments ended past the proposer deadline and still unsettled.
std::vector<std::uint64_t> overdue_tournaments(const ChainState& s, const ValidatedConfig& cfg, Timestamp now);

/// Disqualification marks across all tournaments, keyed by tournament.
std::map<std::uint64_t, std::map<AccountId, Misbehavior>> local_disqualified(const ChainState& s);

nlohmann::json chain_to_json(const ChainState& s);
/// SHA-256 over the sorted-key JSON dump.
Digest state_digest(const ChainState& s);

}  // namespace scynet
