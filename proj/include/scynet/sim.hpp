#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scynet/chain.hpp"
#include "scynet/config.hpp"
#include "scynet/crypto.hpp"
#include "scynet/toy_domain.hpp"
#include "scynet/transactions.hpp"

namespace scynet {

/// Malformed or inconsistent scenario file.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NetworkParams {
  Duration min_latency = 10;
  Duration max_latency = 200;
  Rational drop_rate{0, 1};
  Duration block_lag = 1'000;         ///< delay after a timed deadline before a block round
  Duration mempool_interval = 1'000;  ///< block round this long after a tx enters an idle mempool
  Duration round_timeout = 5'000;     ///< retry delay after a rejected proposal
};

struct NodeSpec {
  std::string id;
  TokenAmount balance;  ///< genesis allocation, stake included
  TokenAmount stake;
  std::optional<ScriptedAgent> agent;
  bool deny_service = false;
};

enum class FaultType { DelayTx, DropTx, SpamTx, CorruptDataset, LeakOutputs };
const char* to_string(FaultType f);

struct FaultSpec {
  FaultType type = FaultType::DropTx;
  std::string node;                  ///< actor (challenger for dataset faults)
  std::optional<TxKind> kind;        ///< DelayTx, DropTx, SpamTx
  Duration by = 0;                   ///< DelayTx
  std::uint64_t count = 0;           ///< SpamTx
  Timestamp at = 0;                  ///< SpamTx
  std::string to_miner;              ///< LeakOutputs
  std::optional<std::uint64_t> tournament;  ///< restrict to one tournament window
};

enum class ActionType { PublishAgentPrice, PublishDataPrice, Rent };

struct ActionSpec {
  ActionType type = ActionType::Rent;
  Timestamp at = 0;
  std::string node;
  PriceScheme scheme = PriceScheme::PerUse;
  TokenAmount price;
  Bytes params;
  std::string seller;  ///< Rent: node whose first listing is rented
  std::uint64_t quantity = 1;
};

struct Scenario {
  std::string name;
  std::uint64_t rng_seed = 0;
  std::uint64_t tournaments = 1;  ///< scored tournaments 1..N; tournament 0 is the registration window
  DomainConfig domain;
  NetworkParams network;
  Rational truth_bias{1, 2};
  std::size_t dataset_size = 32;
  Rational dataset_balance{1, 2};
  std::vector<NodeSpec> nodes;
  std::vector<FaultSpec> faults;
  std::vector<ActionSpec> actions;
};

/// Throws ScenarioError with the offending field.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::string& path);

/// Deterministic per-node identity.
KeyPair node_keypair(std::uint64_t rng_seed, const std::string& node_id);
Digest truth_seed(std::uint64_t rng_seed);
/// Genesis state shared by every node of `scenario`.
ChainState scenario_genesis(const Scenario& scenario);

struct SimOptions {
  unsigned threads = 1;  ///< >1 validates proposals on worker threads
};

struct SimResult {
  std::vector<std::string> log;  ///< one canonical JSON record per line
  std::map<std::string, Digest> final_digests;
  std::optional<std::string> violation;  ///< first invariant violation, if any
};

SimResult run_scenario(const Scenario& scenario, const SimOptions& options = {});

/// Appends `record` to `log` with sequence number and hash-chain link.
void append_record(std::vector<std::string>& log, nlohmann::json record);
/// Hash-chain link of a record body given the previous link.
std::string chain_link(const std::string& prev_link, const std::string& body);

}  // namespace scynet
