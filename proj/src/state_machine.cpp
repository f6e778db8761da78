#include "scynet/state_machine.hpp"

#include "scynet/codec.hpp"

namespace scynet {

const char* to_string(BlockErrc c) {
  switch (c) {
    case BlockErrc::BadHeight: return "BadHeight";
    case BlockErrc::BadPrev: return "BadPrev";
    case BlockErrc::BadTimestamp: return "BadTimestamp";
    case BlockErrc::WrongProposer: return "WrongProposer";
    case BlockErrc::BadSignature: return "BadSignature";
    case BlockErrc::InvalidTx: return "InvalidTx";
    case BlockErrc::MissingResolution: return "MissingResolution";
    case BlockErrc::NotProposer: return "NotProposer";
  }
  return "BlockRejected";
}

Bytes block_signing_bytes(const Block& b) {
  ByteWriter w;
  w.u64(b.height).raw(b.prev).raw(b.proposer.bytes).i64(b.timestamp).u64(b.round);
  w.u32(static_cast<std::uint32_t>(b.txs.size()));
  for (const auto& tx : b.txs) w.bytes(encode_tx(tx));
  return std::move(w).take();
}

Digest block_digest(const Block& b) { return canonical_digest(block_signing_bytes(b)); }

Bytes encode_block(const Block& b) {
  Bytes out = block_signing_bytes(b);
  out.insert(out.end(), b.signature.begin(), b.signature.end());
  return out;
}

Block decode_block(std::span<const std::uint8_t> wire) {
  ByteReader r(wire);
  Block b;
  b.height = r.u64();
  b.prev = r.fixed<32>();
  b.proposer = AccountId{r.fixed<32>()};
  b.timestamp = r.i64();
  b.round = r.u64();
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) b.txs.push_back(decode_tx(r.bytes()));
  b.signature = r.fixed<64>();
  r.expect_done();
  return b;
}

AccountId expected_proposer(const ChainState& s, Timestamp ts, std::uint64_t round) {
  return select_proposer(network_powers(s.ledger, ts),
                         make_seed(s.head, s.height + 1, SelectionPurpose::Proposer, round));
}

ChainState apply_block(const ChainState& s, const Block& b, const ChainEnv& env) {
  if (b.height != s.height + 1) throw BlockRejected(BlockErrc::BadHeight);
  if (b.prev != s.head) throw BlockRejected(BlockErrc::BadPrev);
  if (b.timestamp <= s.time) throw BlockRejected(BlockErrc::BadTimestamp);
  try {
    if (expected_proposer(s, b.timestamp, b.round) != b.proposer) throw BlockRejected(BlockErrc::WrongProposer);
  } catch (const ConsensusError& e) {
    throw BlockRejected(BlockErrc::WrongProposer, e.what());
  }
  const auto key = s.keys.find(b.proposer);
  if (key == s.keys.end() || !verify_cached(block_signing_bytes(b), b.signature, key->second)) {
    throw BlockRejected(BlockErrc::BadSignature);
  }

  ChainState post = s;
  advance_chain(post, env, b.timestamp);
  const TxContext ctx{env, b.timestamp, b.proposer};
  for (std::size_t i = 0; i < b.txs.size(); ++i) {
    try {
      apply_tx(post, b.txs[i], ctx);
    } catch (const std::exception& e) {
      throw BlockRejected(BlockErrc::InvalidTx, "tx " + std::to_string(i) + " (" +
                                                    to_string(b.txs[i].kind()) + "): " + e.what());
    }
  }
  if (!overdue_tournaments(post, *env.cfg, b.timestamp).empty()) {
    throw BlockRejected(BlockErrc::MissingResolution);
  }
  post.ledger = reset_coin_age(post.ledger, b.proposer, b.timestamp);
  post.height = b.height;
  post.head = block_digest(b);
  return post;
}

NodeState::NodeState(ChainEnv env, ChainState genesis, std::optional<KeyPair> key)
    : env_(env), chain_(std::move(genesis)), key_(std::move(key)) {}

Transaction NodeState::sign(TxBody body) {
  if (!key_) throw std::logic_error("node has no signing key");
  return make_tx(*key_, next_sequence_++, std::move(body));
}

Transaction NodeState::sign_with_sequence(TxBody body, std::uint64_t sequence) const {
  if (!key_) throw std::logic_error("node has no signing key");
  return make_tx(*key_, sequence, std::move(body));
}

std::optional<std::string> NodeState::ingest(const Transaction& tx, Timestamp now) {
  const auto slot = std::make_pair(tx.sender, tx.sequence);
  if (mempool_.count(slot)) return std::string("Duplicate");
  // Deadline sweeps compose, so the advanced view is kept between blocks and
  // only moved forward.
  if (!pending_ || pending_->time > now) pending_ = chain_;
  advance_chain(*pending_, env_, std::max(now, pending_->time));
  const TxContext ctx{env_, pending_->time, AccountId{}};
  try {
    validate_tx(*pending_, tx, ctx);
  } catch (const std::exception& e) {
    return std::string(e.what());
  }
  mempool_.emplace(slot, tx);
  return std::nullopt;
}

Block NodeState::propose_block(Timestamp now, std::uint64_t round, bool omit_resolution) {
  if (!key_ || expected_proposer(chain_, now, round) != key_->account()) {
    throw BlockRejected(BlockErrc::NotProposer);
  }
  Block b;
  b.height = chain_.height + 1;
  b.prev = chain_.head;
  b.proposer = key_->account();
  b.timestamp = now;
  b.round = round;

  ChainState post = chain_;
  advance_chain(post, env_, now);
  const TxContext ctx{env_, now, b.proposer};
  for (auto it = mempool_.begin(); it != mempool_.end();) {
    try {
      apply_tx(post, it->second, ctx);
      b.txs.push_back(it->second);
      ++it;
    } catch (const std::exception&) {
      it = mempool_.erase(it);
    }
  }

  if (!omit_resolution) {
    while (!overdue_tournaments(post, *env_.cfg, now).empty()) {
      const TournamentState* t = post.oldest_unsettled();
      if (!t || !t->evaluation) break;
      TxBody body = t->evaluation->failed ? TxBody{TournamentFailureBody{}}
                                          : TxBody{PublishRankingBody{t->evaluation->ranking}};
      Transaction tx = sign(std::move(body));
      apply_tx(post, tx, ctx);
      b.txs.push_back(std::move(tx));
    }
  }
  b.signature = key_->sign(block_signing_bytes(b));
  return b;
}

Signature NodeState::vote(const Block& b) {
  if (!key_) throw std::logic_error("node has no signing key");
  ChainState post = apply_block(chain_, b, env_);
  const Digest d = block_digest(b);
  voted_.emplace(d, std::move(post));
  return key_->sign(d);
}

void NodeState::commit(const Block& b, std::optional<ChainState> post) {
  if (!post) {
    if (voted_ && voted_->first == block_digest(b)) {
      post = std::move(voted_->second);
    } else {
      post = apply_block(chain_, b, env_);
    }
  }
  chain_ = std::move(*post);
  pending_.reset();
  blocks_.push_back(b);
  voted_.reset();
  prune_mempool();
}

void NodeState::prune_mempool() {
  for (auto it = mempool_.begin(); it != mempool_.end();) {
    const auto last = chain_.sequences.find(it->first.first);
    if (last != chain_.sequences.end() && it->first.second <= last->second) {
      it = mempool_.erase(it);
    } else {
      ++it;
    }
  }
}

}  // namespace scynet
