#include <gtest/gtest.h>

#include "scynet/codec.hpp"
#include "scynet/transactions.hpp"
#include "support.hpp"

namespace scynet {
namespace {

using testing::acct;
using testing::key;
using testing::seed_of;
using testing::uuid;

constexpr Timestamp kT1 = 3'600'000;  // start of tournament 1

template <typename F>
TxErrc tx_code(F&& f) {
  try {
    f();
  } catch (const TxError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no TxError";
  return TxErrc::BadSignature;
}

struct Net {
  ValidatedConfig cfg;
  ToyOracle oracle{TruthStream(seed_of("truth"))};
  BlobStore blobs;
  ChainState s;
  std::map<std::string, std::uint64_t> seq;

  explicit Net(DomainConfig c = testing::realtime_domain()) : cfg(validate_config(c)) {
    std::vector<GenesisAccount> accounts;
    for (const char* name : {"alice", "bob", "carol", "val"}) {
      const bool staker = std::string(name) == "val";
      accounts.push_back({key(name).public_key(), TokenAmount(1000), TokenAmount(staker ? 500 : 0)});
    }
    s = chain_genesis(accounts);
  }

  ChainEnv env() const { return {&cfg, &oracle, &blobs}; }
  TxContext at(Timestamp now, const std::string& creator = "val") const { return {env(), now, acct(creator)}; }

  Transaction tx(const std::string& who, TxBody body) { return make_tx(key(who), ++seq[who], std::move(body)); }

  void advance(Timestamp now) { advance_chain(s, env(), now); }
  void apply(const Transaction& t, Timestamp now) { apply_tx(s, t, at(now)); }

  // Apply must fail with `code` and leave the state untouched.
  TxErrc reject(const Transaction& t, Timestamp now) {
    const ChainState before = s;
    const TxErrc c = tx_code([&] { apply_tx(s, t, at(now)); });
    EXPECT_EQ(s, before);
    EXPECT_FALSE(tx_valid(s, t, at(now)));
    return c;
  }

  TokenAmount bal(const std::string& who) const { return s.ledger.balance(acct(who)); }

  void list(const std::string& seller, const Uuid& u, PriceScheme scheme, std::uint64_t price) {
    s.listings[u] = Listing{acct(seller), scheme, TokenAmount(price), true};
  }
};

TEST(TxCodec, EveryKindRoundTrips) {
  const KeyPair k = key("alice");
  SealedEnvelope env = seal(Bytes{1, 2, 3}, SymmetricKey{}, Nonce{});
  const std::vector<TxBody> bodies{
      SubmitAgentBody{uuid("a")},
      PublishDatasetBody{seed_of("1"), seed_of("2"), seed_of("3"), seed_of("4")},
      SubmitSignalBody{uuid("a"), env, Timestamp{60'000}},
      SubmitSignalBody{uuid("a"), env, std::nullopt},
      PublishDatasetKeyBody{SymmetricKey{7}},
      PublishSignalKeyBody{uuid("a"), SymmetricKey{9}, Timestamp{120'000}},
      PublishRankingBody{Ranking{{uuid("a"), Rational{3, 4}}, {uuid("b"), Rational{1, 2}}}},
      TournamentFailureBody{},
      PublishAgentPriceBody{uuid("a"), PriceScheme::Subscription, TokenAmount(12)},
      PublishDataPriceBody{uuid("d"), Bytes{5, 6}, PriceScheme::Buyout, TokenAmount(99)},
      RentBody{uuid("d"), 4},
  };
  std::uint64_t n = 1;
  for (const auto& body : bodies) {
    const Transaction tx = make_tx(k, n++, body);
    EXPECT_EQ(decode_tx(encode_tx(tx)), tx) << to_string(tx.kind());
    EXPECT_EQ(tx_kind_from_string(to_string(tx.kind())), tx.kind());
  }
}

TEST(TxCodec, RejectsTrailingAndTruncatedBytes) {
  Bytes wire = encode_tx(make_tx(key("alice"), 1, RentBody{uuid("d"), 4}));
  Bytes longer = wire;
  longer.push_back(0);
  EXPECT_THROW(decode_tx(longer), DecodeError);
  wire.pop_back();
  EXPECT_THROW(decode_tx(wire), DecodeError);
}

TEST(TxEnvelope, SignatureSequenceAndAccount) {
  Net n;
  const Uuid u = uuid("agent");
  Transaction forged = n.tx("alice", SubmitAgentBody{u});
  forged.signature[0] ^= 1;
  EXPECT_EQ(n.reject(forged, 1000), TxErrc::BadSignature);

  Transaction foreign = make_tx(key("mallory"), 1, SubmitAgentBody{u});
  EXPECT_EQ(n.reject(foreign, 1000), TxErrc::UnknownAccount);

  EXPECT_EQ(n.reject(make_tx(key("alice"), 0, SubmitAgentBody{u}), 1000), TxErrc::BadSequence);
  n.apply(make_tx(key("alice"), 5, SubmitAgentBody{u}), 1000);
  // Gaps are allowed; replays and regressions are not.
  EXPECT_EQ(n.reject(make_tx(key("alice"), 5, SubmitAgentBody{uuid("x")}), 1000), TxErrc::BadSequence);
  EXPECT_EQ(n.reject(make_tx(key("alice"), 4, SubmitAgentBody{uuid("x")}), 1000), TxErrc::BadSequence);
  n.apply(make_tx(key("alice"), 9, SubmitAgentBody{uuid("x")}), 1000);
}

TEST(SubmitAgent, ChargesFeeAndRegistersForNextTournament) {
  Net n;
  const Uuid u = uuid("agent");
  n.apply(n.tx("alice", SubmitAgentBody{u}), 1000);
  EXPECT_EQ(n.bal("alice"), TokenAmount(900));
  EXPECT_EQ(n.s.ledger.next_reward_pool, TokenAmount(100));
  const AgentRecord& a = n.s.agents.at(u);
  EXPECT_EQ(a.owner, acct("alice"));
  EXPECT_EQ(a.tournament, 1u);
  EXPECT_FALSE(a.validated);
  EXPECT_EQ(n.s.tournaments.at(1).participants.at(u).owner, acct("alice"));
  EXPECT_TRUE(is_conserved(n.s.ledger));

  EXPECT_EQ(n.reject(n.tx("bob", SubmitAgentBody{u}), 1000), TxErrc::DuplicateUuid);
}

TEST(SubmitAgent, InsufficientBalance) {
  Net n;
  n.s.ledger = transfer(n.s.ledger, acct("carol"), acct("bob"), TokenAmount(950));
  EXPECT_EQ(n.reject(n.tx("carol", SubmitAgentBody{uuid("c")}), 1000), TxErrc::InsufficientBalance);
}

TEST(Rent, PerUseTransfersPriceAndFee) {
  Net n;
  const Uuid u = uuid("listing");
  n.list("alice", u, PriceScheme::PerUse, 10);
  n.apply(n.tx("bob", RentBody{u, 3}), 1000);
  EXPECT_EQ(n.bal("bob"), TokenAmount(1000 - 32));
  EXPECT_EQ(n.bal("alice"), TokenAmount(1030));
  EXPECT_EQ(n.s.ledger.next_reward_pool, TokenAmount(2));
  EXPECT_TRUE(is_conserved(n.s.ledger));
}

TEST(Rent, SubscriptionMultipliesPeriods) {
  Net n;
  const Uuid u = uuid("listing");
  n.list("alice", u, PriceScheme::Subscription, 7);
  n.apply(n.tx("bob", RentBody{u, 12}), 1000);
  EXPECT_EQ(n.bal("bob"), TokenAmount(1000 - 84 - 2));
}

TEST(Rent, BuyoutRequiresQuantityOne) {
  Net n;
  const Uuid u = uuid("listing");
  n.list("alice", u, PriceScheme::Buyout, 500);
  EXPECT_EQ(n.reject(n.tx("bob", RentBody{u, 2}), 1000), TxErrc::QuantityInvalid);
  n.apply(n.tx("bob", RentBody{u, 1}), 1000);
  EXPECT_EQ(n.bal("alice"), TokenAmount(1500));
}

TEST(Rent, Rejections) {
  Net n;
  const Uuid u = uuid("listing");
  n.list("alice", u, PriceScheme::PerUse, 10);
  EXPECT_EQ(n.reject(n.tx("bob", RentBody{u, 0}), 1000), TxErrc::QuantityInvalid);
  EXPECT_EQ(n.reject(n.tx("bob", RentBody{uuid("nothing"), 1}), 1000), TxErrc::UnknownListing);
  EXPECT_EQ(n.reject(n.tx("bob", RentBody{u, 100}), 1000), TxErrc::InsufficientBalance);
  EXPECT_EQ(n.reject(n.tx("bob", RentBody{u, std::uint64_t{1} << 62}), 1000), TxErrc::InsufficientBalance);
  n.apply(n.tx("bob", RentBody{u, 99}), 1000);
  EXPECT_EQ(n.bal("bob"), TokenAmount(8));
  // 7 alone would fit in the remaining 8; price plus fee does not.
  n.list("alice", uuid("cheap"), PriceScheme::PerUse, 7);
  EXPECT_EQ(n.reject(n.tx("bob", RentBody{uuid("cheap"), 1}), 1000), TxErrc::InsufficientBalance);
}

TEST(PublishDataPrice, ChargesFeeAndCreatesListing) {
  Net n;
  const Uuid d = uuid("data");
  n.apply(n.tx("carol", PublishDataPriceBody{d, Bytes{1}, PriceScheme::Subscription, TokenAmount(4)}), 1000);
  EXPECT_EQ(n.bal("carol"), TokenAmount(990));
  EXPECT_EQ(n.s.data_offerings.at(d).owner, acct("carol"));
  EXPECT_EQ(n.s.listings.at(d).scheme, PriceScheme::Subscription);
  EXPECT_FALSE(n.s.listings.at(d).is_agent);
  EXPECT_EQ(n.reject(n.tx("bob", PublishDataPriceBody{d, {}, PriceScheme::PerUse, TokenAmount(1)}), 1000),
            TxErrc::DuplicateUuid);
}

TEST(PublishAgentPrice, OnlyOwnerOfValidatedAgent) {
  Net n;
  const Uuid u = uuid("agent");
  n.apply(n.tx("alice", SubmitAgentBody{u}), 1000);
  const TxBody body = PublishAgentPriceBody{u, PriceScheme::PerUse, TokenAmount(3)};
  EXPECT_EQ(n.reject(n.tx("alice", body), 2000), TxErrc::AgentNotValidated);
  n.s.agents.at(u).validated = true;
  EXPECT_EQ(n.reject(n.tx("bob", body), 2000), TxErrc::NotOwner);
  EXPECT_EQ(n.reject(n.tx("bob", PublishAgentPriceBody{uuid("none"), PriceScheme::PerUse, TokenAmount(3)}), 2000),
            TxErrc::UnknownAgent);
  n.apply(n.tx("alice", body), 2000);
  EXPECT_EQ(n.bal("alice"), TokenAmount(1000 - 100 - 5));
  EXPECT_EQ(n.s.listings.at(u).seller, acct("alice"));
}

TEST(DomainType, DatasetTransactionsRejectedInRealtime) {
  Net n;
  EXPECT_EQ(n.reject(n.tx("val", PublishDatasetBody{}), 1000), TxErrc::WrongDomainType);
  EXPECT_EQ(n.reject(n.tx("val", PublishDatasetKeyBody{}), kT1), TxErrc::WrongDomainType);
}

TEST(Resolution, OnlyTheBlockCreatorAndOnlyWhenEnded) {
  Net n;
  n.advance(1000);
  EXPECT_EQ(n.reject(n.tx("alice", PublishRankingBody{}), 1000), TxErrc::NotBlockCreator);
  EXPECT_EQ(n.reject(n.tx("val", PublishRankingBody{}), 1000), TxErrc::TournamentNotEnded);
  EXPECT_EQ(n.reject(n.tx("val", TournamentFailureBody{}), 1000), TxErrc::TournamentNotEnded);
}

// Real-time commit/reveal for one agent registered in tournament 0.
struct SignalFlow : Net {
  Uuid agent = uuid("agent");
  Timestamp tick = kT1;

  SignalFlow() {
    apply(tx("alice", SubmitAgentBody{agent}), 1000);
    advance(kT1 + 100);
  }

  SealedEnvelope envelope(const std::string& author, bool prediction, const SymmetricKey& k, std::uint8_t n = 0) {
    Nonce nonce{};
    nonce[0] = n;
    return seal(encode_signal_payload({encode_realtime_signal(prediction), key(author).public_key()}), k, nonce);
  }
};

TEST(SignalFlow, CommitThenRevealRecordsSignal) {
  SignalFlow f;
  const SymmetricKey k{1};
  f.apply(f.tx("alice", SubmitSignalBody{f.agent, f.envelope("alice", true, k), f.tick}), kT1 + 100);
  const Timestamp reveal = f.tick + 60'000;
  f.advance(reveal);
  f.apply(f.tx("alice", PublishSignalKeyBody{f.agent, k, reveal}), reveal);
  const SignalRecord& r = f.s.tournaments.at(1).signals.at({f.agent, f.tick});
  EXPECT_EQ(r.key, k);
  EXPECT_EQ(r.signal, encode_realtime_signal(true));
  EXPECT_TRUE(f.s.tournaments.at(1).disqualified_miners.empty());
  EXPECT_EQ(f.reject(f.tx("alice", PublishSignalKeyBody{f.agent, k, reveal}), reveal), TxErrc::AlreadyRevealed);
}

TEST(SignalFlow, SubmissionRules) {
  SignalFlow f;
  const SealedEnvelope e = f.envelope("alice", true, SymmetricKey{1});
  EXPECT_EQ(f.reject(f.tx("bob", SubmitSignalBody{f.agent, e, f.tick}), kT1 + 100), TxErrc::NotOwner);
  EXPECT_EQ(f.reject(f.tx("alice", SubmitSignalBody{f.agent, e, std::nullopt}), kT1 + 100),
            TxErrc::WrongDomainType);
  EXPECT_EQ(f.reject(f.tx("alice", SubmitSignalBody{f.agent, e, f.tick + 1}), kT1 + 100), TxErrc::OutsideTolerance);
  EXPECT_EQ(f.reject(f.tx("alice", SubmitSignalBody{f.agent, e, f.tick + 60'000}), kT1 + 100),
            TxErrc::OutsideTolerance);
  f.apply(f.tx("alice", SubmitSignalBody{f.agent, e, f.tick}), kT1 + 100);
  EXPECT_EQ(f.reject(f.tx("alice", SubmitSignalBody{f.agent, e, f.tick}), kT1 + 200), TxErrc::DuplicateSignal);
  f.apply(f.tx("alice", SubmitSignalBody{f.agent, e, f.tick + 60'000}), kT1 + 60'000 - 5'000);
}

TEST(SignalFlow, CopiedCiphertextIsEvidence) {
  SignalFlow f;
  const SymmetricKey k{3};
  // Alice publishes Bob's sealed output; the author key inside exposes it.
  f.apply(f.tx("alice", SubmitSignalBody{f.agent, f.envelope("bob", true, k), f.tick}), kT1 + 100);
  const Timestamp reveal = f.tick + 60'000;
  f.advance(reveal);
  f.apply(f.tx("alice", PublishSignalKeyBody{f.agent, k, reveal}), reveal);
  EXPECT_EQ(f.s.tournaments.at(1).disqualified_miners.at(acct("alice")), Misbehavior::CopiedSignal);
}

TEST(SignalFlow, CommitMismatchIsEvidence) {
  SignalFlow f;
  const SymmetricKey k{4};
  const Bytes payload = encode_signal_payload({encode_realtime_signal(true), key("alice").public_key()});
  const SealedEnvelope bad = seal_with_commit(payload, k, Nonce{}, seed_of("other"));
  f.apply(f.tx("alice", SubmitSignalBody{f.agent, bad, f.tick}), kT1 + 100);
  const Timestamp reveal = f.tick + 60'000;
  f.advance(reveal);
  f.apply(f.tx("alice", PublishSignalKeyBody{f.agent, k, reveal}), reveal);
  EXPECT_EQ(f.s.tournaments.at(1).disqualified_miners.at(acct("alice")), Misbehavior::BadCommit);
}

TEST(SignalFlow, WrongKeyAndReusedKeyRejected) {
  SignalFlow f;
  const SymmetricKey k{5};
  f.apply(f.tx("alice", SubmitSignalBody{f.agent, f.envelope("alice", true, k, 1), f.tick}), kT1 + 100);
  f.apply(f.tx("alice", SubmitSignalBody{f.agent, f.envelope("alice", false, k, 2), f.tick + 60'000}),
          kT1 + 60'000);
  const Timestamp r1 = f.tick + 60'000, r2 = f.tick + 120'000;
  EXPECT_EQ(f.reject(f.tx("alice", PublishSignalKeyBody{f.agent, SymmetricKey{6}, r1}), r1), TxErrc::DecryptFailed);
  f.apply(f.tx("alice", PublishSignalKeyBody{f.agent, k, r1}), r1);
  f.advance(r2);
  EXPECT_EQ(f.reject(f.tx("alice", PublishSignalKeyBody{f.agent, k, r2}), r2), TxErrc::KeyReused);
  EXPECT_EQ(f.reject(f.tx("alice", PublishSignalKeyBody{f.agent, k, r2 + 60'000}), r2), TxErrc::OutsideTolerance);
}

}  // namespace
}  // namespace scynet
