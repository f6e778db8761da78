#pragma once

#include <map>
#include <optional>
#include <vector>

#include "scynet/chain.hpp"
#include "scynet/consensus.hpp"
#include "scynet/transactions.hpp"

namespace scynet {

struct Block {
  std::uint64_t height = 0;
  Digest prev{};
  AccountId proposer;
  Timestamp timestamp = 0;
  std::uint64_t round = 0;  ///< retry counter after rejected proposals at this height
  std::vector<Transaction> txs;
  Signature signature{};

  bool operator==(const Block&) const = default;
};

/// Header fields and every encoded transaction; excludes the signature.
Bytes block_signing_bytes(const Block& b);
Digest block_digest(const Block& b);
Bytes encode_block(const Block& b);
Block decode_block(std::span<const std::uint8_t> wire);

enum class BlockErrc {
  BadHeight,
  BadPrev,
  BadTimestamp,
  WrongProposer,
  BadSignature,
  InvalidTx,
  MissingResolution,
  NotProposer,
};
const char* to_string(BlockErrc c);
using BlockRejected = CodedError<BlockErrc>;

/// Proposer for the block after `s` at timestamp `ts`, weighted by coin-age
/// power at `ts`.
AccountId expected_proposer(const ChainState& s, Timestamp ts, std::uint64_t round);

/// Full validation and application. Throws BlockRejected; `s` is not modified.
ChainState apply_block(const ChainState& s, const Block& b, const ChainEnv& env);

/// One replica of the application: committed chain plus a local mempool.
class NodeState {
 public:
  NodeState(ChainEnv env, ChainState genesis, std::optional<KeyPair> key);

  const ChainState& chain() const noexcept { return chain_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  const std::optional<KeyPair>& key() const noexcept { return key_; }
  std::size_t mempool_size() const noexcept { return mempool_.size(); }

  /// Signs `body` with this node's key under its next sequence number.
  Transaction sign(TxBody body);
  /// Signs under an explicit sequence without advancing the counter.
  Transaction sign_with_sequence(TxBody body, std::uint64_t sequence) const;
  std::uint64_t next_sequence() const noexcept { return next_sequence_; }

  /// Adds `tx` iff it is valid against the committed chain advanced to
  /// `now`. Duplicates and invalid transactions are dropped. Returns the
  /// rejection reason, or nullopt when pooled.
  std::optional<std::string> ingest(const Transaction& tx, Timestamp now);

  /// Builds and signs a block at `now`. Every mempool transaction that is
  /// still valid is included in (sender, sequence) order; when a tournament
  /// is past its proposer deadline, the resolution transaction is appended
  /// unless `omit_resolution` is set (fault injection).
  Block propose_block(Timestamp now, std::uint64_t round, bool omit_resolution = false);

  /// Validates `b` and returns the signature of its digest, remembering the
  /// resulting state for commit. Throws BlockRejected.
  Signature vote(const Block& b);
  /// Validation without a key; returns the post state.
  ChainState validate(const Block& b) const { return apply_block(chain_, b, env_); }

  /// Adopts `b`; uses the state computed by vote/validate when available.
  void commit(const Block& b, std::optional<ChainState> post = std::nullopt);

  Digest digest() const { return state_digest(chain_); }

 private:
  void prune_mempool();

  ChainEnv env_;
  ChainState chain_;
  std::vector<Block> blocks_;
  std::optional<KeyPair> key_;
  std::uint64_t next_sequence_ = 1;
  std::map<std::pair<AccountId, std::uint64_t>, Transaction> mempool_;
  std::optional<std::pair<Digest, ChainState>> voted_;
  std::optional<ChainState> pending_;  ///< committed chain advanced for ingest
};

}  // namespace scynet
