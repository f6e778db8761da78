#include <gtest/gtest.h>

#include "scynet/state_machine.hpp"
#include "support.hpp"

namespace scynet {
namespace {

using testing::acct;
using testing::key;
using testing::seed_of;
using testing::uuid;

constexpr Timestamp kEnd0 = 3'600'000;       // tournament 0 ends
constexpr Timestamp kResolve0 = 4'200'000;   // plus the proposer deadline

BlockErrc block_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const BlockRejected& e) {
    return e.code();
  }
  ADD_FAILURE() << "no BlockRejected";
  return BlockErrc::BadHeight;
}

struct Cluster {
  ValidatedConfig cfg = validate_config(testing::realtime_domain());
  ToyOracle oracle{TruthStream(seed_of("truth"))};
  BlobStore blobs;
  ChainState genesis;
  std::vector<NodeState> nodes;  // "val" (sole staker), "alice", "bob"

  Cluster() {
    std::vector<GenesisAccount> accounts;
    for (const char* name : {"val", "alice", "bob"}) {
      const bool staker = std::string(name) == "val";
      accounts.push_back({key(name).public_key(), TokenAmount(1000), TokenAmount(staker ? 400 : 0)});
    }
    genesis = chain_genesis(accounts);
    for (const char* name : {"val", "alice", "bob"}) nodes.emplace_back(env(), genesis, key(name));
  }

  ChainEnv env() const { return {&cfg, &oracle, &blobs}; }
  NodeState& val() { return nodes[0]; }
  NodeState& alice() { return nodes[1]; }

  void broadcast(const Transaction& tx, Timestamp now) {
    for (auto& n : nodes) EXPECT_EQ(n.ingest(tx, now), std::nullopt);
  }

  Block round(Timestamp now, bool omit = false) {
    const Block b = val().propose_block(now, 0, omit);
    for (auto& n : nodes) n.commit(b);
    return b;
  }
};

TEST(Ingest, PoolsValidTransactionsOnce) {
  Cluster c;
  const Transaction tx = c.alice().sign(SubmitAgentBody{uuid("a")});
  EXPECT_EQ(c.val().ingest(tx, 1000), std::nullopt);
  EXPECT_EQ(c.val().ingest(tx, 1000), "Duplicate");
  EXPECT_EQ(c.val().mempool_size(), 1u);

  Transaction forged = c.alice().sign(SubmitAgentBody{uuid("b")});
  forged.signature[3] ^= 0x10;
  EXPECT_EQ(c.val().ingest(forged, 1000), "BadSignature");
  EXPECT_EQ(c.val().ingest(c.alice().sign(RentBody{uuid("none"), 1}), 1000), "UnknownListing");
  EXPECT_EQ(c.val().mempool_size(), 1u);
}

TEST(ProposeBlock, OnlyTheSelectedProposer) {
  Cluster c;
  EXPECT_EQ(block_code([&] { c.alice().propose_block(1000, 0); }), BlockErrc::NotProposer);
  EXPECT_EQ(expected_proposer(c.genesis, 1000, 7), acct("val"));
}

TEST(ProposeBlock, IncludesMempoolAndReplicates) {
  Cluster c;
  const Transaction tx = c.alice().sign(SubmitAgentBody{uuid("a")});
  c.broadcast(tx, 1000);
  const Block b = c.round(1000);
  EXPECT_EQ(b.height, 1u);
  ASSERT_EQ(b.txs.size(), 1u);
  EXPECT_EQ(b.txs[0], tx);
  EXPECT_EQ(decode_block(encode_block(b)), b);
  for (const auto& n : c.nodes) {
    EXPECT_EQ(n.chain(), c.val().chain());
    EXPECT_EQ(n.digest(), c.val().digest());
    EXPECT_EQ(n.mempool_size(), 0u);
  }
  EXPECT_EQ(c.val().chain().height, 1u);
  EXPECT_EQ(c.val().chain().head, block_digest(b));
  EXPECT_TRUE(c.val().chain().agents.count(uuid("a")));
}

TEST(ProposeBlock, DropsTransactionsInvalidatedByEarlierOnes) {
  Cluster c;
  // Both register the same uuid; only the first in (sender, sequence) order lands.
  const Transaction a = c.alice().sign(SubmitAgentBody{uuid("same")});
  const Transaction b = c.nodes[2].sign(SubmitAgentBody{uuid("same")});
  c.broadcast(a, 1000);
  c.broadcast(b, 1000);
  const Block blk = c.round(1000);
  EXPECT_EQ(blk.txs.size(), 1u);
  EXPECT_NO_THROW(apply_block(c.genesis, blk, c.env()));
}

TEST(ApplyBlock, HeaderChecks) {
  Cluster c;
  const Block good = c.val().propose_block(1000, 0);
  EXPECT_NO_THROW(apply_block(c.genesis, good, c.env()));

  Block b = good;
  b.height = 2;
  EXPECT_EQ(block_code([&] { apply_block(c.genesis, b, c.env()); }), BlockErrc::BadHeight);
  b = good;
  b.prev[0] ^= 1;
  EXPECT_EQ(block_code([&] { apply_block(c.genesis, b, c.env()); }), BlockErrc::BadPrev);
  b = good;
  b.timestamp = 0;
  EXPECT_EQ(block_code([&] { apply_block(c.genesis, b, c.env()); }), BlockErrc::BadTimestamp);
  b = good;
  b.signature[0] ^= 1;
  EXPECT_EQ(block_code([&] { apply_block(c.genesis, b, c.env()); }), BlockErrc::BadSignature);
  b = good;
  b.proposer = acct("alice");
  b.signature = key("alice").sign(block_signing_bytes(b));
  EXPECT_EQ(block_code([&] { apply_block(c.genesis, b, c.env()); }), BlockErrc::WrongProposer);
}

TEST(ApplyBlock, InvalidTransactionRejectsWholeBlock) {
  Cluster c;
  Block b = c.val().propose_block(1000, 0);
  b.txs.push_back(make_tx(key("alice"), 1, RentBody{uuid("none"), 1}));
  b.signature = key("val").sign(block_signing_bytes(b));
  EXPECT_EQ(block_code([&] { apply_block(c.genesis, b, c.env()); }), BlockErrc::InvalidTx);
  EXPECT_EQ(block_code([&] { c.alice().vote(b); }), BlockErrc::InvalidTx);
  EXPECT_EQ(c.alice().chain(), c.genesis);
}

TEST(ApplyBlock, ResetsProposerCoinAge) {
  Cluster c;
  const Timestamp later = 3 * kMillisPerDay;
  // Walk the chain forward so tournaments stay resolved.
  Timestamp t = 1000;
  for (; t < later; t += 600'000) c.round(t);
  const std::uint64_t before = consensus_power(c.val().chain().ledger, acct("val"), later);
  EXPECT_EQ(before, 400u);  // reset by the blocks just proposed
  EXPECT_EQ(consensus_power(c.genesis.ledger, acct("val"), later), 1200u);
}

TEST(Resolution, HonestProposerAppendsRankingAfterDeadline) {
  Cluster c;
  c.round(1000);
  c.round(kEnd0 + 1);
  EXPECT_FALSE(c.val().chain().tournaments.at(0).settled());
  const Block b = c.round(kResolve0 + 1);
  ASSERT_FALSE(b.txs.empty());
  EXPECT_EQ(b.txs.back().kind(), TxKind::PublishTournamentRanking);
  EXPECT_TRUE(c.val().chain().tournaments.at(0).settled());
}

TEST(Resolution, OmittingOverdueResolutionIsRejected) {
  Cluster c;
  c.round(1000);
  const Block omitted = c.val().propose_block(kResolve0 + 1, 0, true);
  EXPECT_EQ(block_code([&] { c.alice().vote(omitted); }), BlockErrc::MissingResolution);
  EXPECT_EQ(block_code([&] { c.alice().validate(omitted); }), BlockErrc::MissingResolution);
  // Before the deadline the same omission is fine.
  EXPECT_NO_THROW(c.alice().validate(c.val().propose_block(kResolve0 - 1, 0, true)));
}

TEST(Resolution, ForeignRankingRejected) {
  Cluster c;
  c.round(kEnd0 + 1);
  Block b = c.val().propose_block(kResolve0 + 1, 0);
  b.txs.back() = make_tx(key("val"), b.txs.back().sequence, PublishRankingBody{Ranking{{uuid("x"), {1, 1}}}});
  b.signature = key("val").sign(block_signing_bytes(b));
  EXPECT_EQ(block_code([&] { c.alice().validate(b); }), BlockErrc::InvalidTx);
}

TEST(Vote, SignsDigestAndCommitsRememberedState) {
  Cluster c;
  c.broadcast(c.alice().sign(SubmitAgentBody{uuid("a")}), 1000);
  const Block b = c.val().propose_block(1000, 0);
  const Signature sig = c.nodes[2].vote(b);
  EXPECT_TRUE(verify(block_digest(b), sig, key("bob").public_key()));
  c.nodes[2].commit(b);
  c.alice().commit(b, c.alice().validate(b));
  EXPECT_EQ(c.nodes[2].chain(), c.alice().chain());
  EXPECT_EQ(c.nodes[2].blocks().size(), 1u);
}

}  // namespace
}  // namespace scynet
