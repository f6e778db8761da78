#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scynet/chain.hpp"
#include "scynet/state_machine.hpp"
#include "scynet/toy_domain.hpp"

namespace scynet {

/// Behavior a node runs beyond validating blocks.
struct RoleConfig {
  std::optional<ScriptedAgent> agent;   ///< miner iff set
  std::optional<AccountId> copy_target;  ///< resolved Copycat target
  std::uint64_t last_tournament = 0;    ///< agents are submitted for tournaments up to this index
  std::size_t dataset_size = 32;
  Rational dataset_balance{1, 2};
  /// Seal outputs that do not match the published inputs, in these
  /// tournaments (or every tournament when `corrupt_all_datasets`).
  std::set<std::uint64_t> corrupt_datasets;
  bool corrupt_all_datasets = false;
};

struct PlannedTx {
  Transaction tx;
  Timestamp send_at = 0;
};

struct PublishedBlob {
  Digest ref{};
  Bytes content;
};

/// Miner and challenger duties of one node. Idempotent: calling
/// `obligations` repeatedly at the same time yields each transaction once.
class NodeRuntime {
 public:
  NodeRuntime(RoleConfig roles, Digest seed) : roles_(std::move(roles)), seed_(seed) {}

  const RoleConfig& roles() const noexcept { return roles_; }

  /// Transactions due at `now` given the node's committed chain. Blobs the
  /// node publishes are stored in `blobs` and appended to `published`.
  std::vector<PlannedTx> obligations(NodeState& node, const ChainEnv& env, Timestamp now, BlobStore& blobs,
                                     std::vector<PublishedBlob>& published);

  /// Correct outputs of this node's dataset for `tournament`, once generated.
  const std::vector<bool>* dataset_outputs(std::uint64_t tournament) const;

  /// Off-chain handover of another challenger's correct outputs.
  void receive_leak(std::uint64_t tournament, const AccountId& challenger, std::vector<bool> outputs);

  /// Agent uuid this node entered (or will enter) into `tournament`.
  Uuid agent_uuid(std::uint64_t tournament) const;

 private:
  void submit_agents(NodeState& node, const ChainEnv& env, Timestamp now, std::vector<PlannedTx>& out);
  void realtime_tick(NodeState& node, const ChainEnv& env, Timestamp tick, std::vector<PlannedTx>& out);
  void publish_dataset(NodeState& node, const ChainEnv& env, Timestamp now, BlobStore& blobs,
                       std::vector<PublishedBlob>& published, std::vector<PlannedTx>& out);
  void dataset_signal(NodeState& node, const ChainEnv& env, Timestamp now, const BlobStore& blobs,
                      std::vector<PlannedTx>& out);
  void dataset_reveals(NodeState& node, const ChainEnv& env, Timestamp now, std::vector<PlannedTx>& out);

  SymmetricKey signal_key(const Uuid& agent, Timestamp tick) const;
  Nonce nonce_for(std::string_view tag, const Uuid& agent, Timestamp tick) const;

  RoleConfig roles_;
  Digest seed_;
  std::set<std::uint64_t> submitted_;
  std::set<Timestamp> ticks_done_;
  std::map<std::pair<Uuid, Timestamp>, SymmetricKey> signal_keys_;
  std::map<Timestamp, std::pair<Uuid, Timestamp>> copied_;  ///< own tick -> copied (target agent, tick)
  std::set<std::uint64_t> datasets_published_;
  std::set<std::uint64_t> dataset_signals_done_;
  std::set<std::uint64_t> dataset_reveals_done_;
  std::map<std::uint64_t, std::pair<SymmetricKey, std::vector<bool>>> datasets_;
  std::map<std::uint64_t, std::map<AccountId, std::vector<bool>>> leaks_;
};

}  // namespace scynet
