#include "scynet/transactions.hpp"

#include <functional>

#include "scynet/codec.hpp"

namespace scynet {

const char* to_string(TxKind k) {
  switch (k) {
    case TxKind::SubmitAgent: return "SubmitAgent";
    case TxKind::PublishDataset: return "PublishDataset";
    case TxKind::SubmitSignal: return "SubmitSignal";
    case TxKind::PublishDatasetDecryptionKey: return "PublishDatasetDecryptionKey";
    case TxKind::PublishSignalDecryptionKey: return "PublishSignalDecryptionKey";
    case TxKind::PublishTournamentRanking: return "PublishTournamentRanking";
    case TxKind::TournamentFailure: return "TournamentFailure";
    case TxKind::PublishAgentPrice: return "PublishAgentPrice";
    case TxKind::PublishDataPrice: return "PublishDataPrice";
    case TxKind::Rent: return "Rent";
  }
  return "Unknown";
}

TxKind tx_kind_from_string(std::string_view s) {
  for (std::uint8_t tag = 0x01; tag <= 0x0A; ++tag) {
    const auto k = static_cast<TxKind>(tag);
    if (s == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown transaction kind: " + std::string(s));
}

const char* to_string(TxErrc c) {
  switch (c) {
    case TxErrc::BadSignature: return "BadSignature";
    case TxErrc::UnknownAccount: return "UnknownAccount";
    case TxErrc::BadSequence: return "BadSequence";
    case TxErrc::WrongDomainType: return "WrongDomainType";
    case TxErrc::DuplicateUuid: return "DuplicateUuid";
    case TxErrc::InsufficientBalance: return "InsufficientBalance";
    case TxErrc::NotAChallenger: return "NotAChallenger";
    case TxErrc::DeadlinePassed: return "DeadlinePassed";
    case TxErrc::AlreadySubmitted: return "AlreadySubmitted";
    case TxErrc::UnknownAgent: return "UnknownAgent";
    case TxErrc::NotOwner: return "NotOwner";
    case TxErrc::OutsideTolerance: return "OutsideTolerance";
    case TxErrc::DuplicateSignal: return "DuplicateSignal";
    case TxErrc::AlreadyRevealed: return "AlreadyRevealed";
    case TxErrc::KeyReused: return "KeyReused";
    case TxErrc::DecryptFailed: return "DecryptFailed";
    case TxErrc::NoSignal: return "NoSignal";
    case TxErrc::SenderDisqualified: return "SenderDisqualified";
    case TxErrc::TournamentNotActive: return "TournamentNotActive";
    case TxErrc::NotBlockCreator: return "NotBlockCreator";
    case TxErrc::TournamentNotEnded: return "TournamentNotEnded";
    case TxErrc::RankingMismatch: return "RankingMismatch";
    case TxErrc::AlreadyRanked: return "AlreadyRanked";
    case TxErrc::TournamentFailed: return "TournamentFailed";
    case TxErrc::NotFailed: return "NotFailed";
    case TxErrc::AlreadyResolved: return "AlreadyResolved";
    case TxErrc::AgentNotValidated: return "AgentNotValidated";
    case TxErrc::UnknownListing: return "UnknownListing";
    case TxErrc::QuantityInvalid: return "QuantityInvalid";
    case TxErrc::DatasetUnavailable: return "DatasetUnavailable";
  }
  return "TxError";
}

TxKind kind_of(const TxBody& body) { return static_cast<TxKind>(body.index() + 1); }

// ---------------------------------------------------------------------------
// Wire form

namespace {

void put_tick(ByteWriter& w, const std::optional<Timestamp>& tick) {
  w.u8(tick ? 1 : 0);
  if (tick) w.i64(*tick);
}

std::optional<Timestamp> get_tick(ByteReader& r) {
  const std::uint8_t flag = r.u8();
  if (flag > 1) throw DecodeError(DecodeErrc::BadValue, "tick flag");
  if (flag == 0) return std::nullopt;
  return r.i64();
}

PriceScheme get_scheme(ByteReader& r) {
  const std::uint8_t v = r.u8();
  if (v > 2) throw DecodeError(DecodeErrc::BadValue, "price scheme");
  return static_cast<PriceScheme>(v);
}

void put_body(ByteWriter& w, const TxBody& body) {
  std::visit(
      [&w](const auto& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, SubmitAgentBody>) {
          w.raw(b.uuid.bytes);
        } else if constexpr (std::is_same_v<B, PublishDatasetBody>) {
          w.raw(b.inputs_ref).raw(b.inputs_hash).raw(b.encrypted_signals_ref).raw(b.signals_hash);
        } else if constexpr (std::is_same_v<B, SubmitSignalBody>) {
          w.raw(b.agent.bytes).bytes(encode_envelope(b.envelope));
          put_tick(w, b.tick);
        } else if constexpr (std::is_same_v<B, PublishDatasetKeyBody>) {
          w.raw(b.key);
        } else if constexpr (std::is_same_v<B, PublishSignalKeyBody>) {
          w.raw(b.agent.bytes).raw(b.key);
          put_tick(w, b.tick);
        } else if constexpr (std::is_same_v<B, PublishRankingBody>) {
          w.u32(static_cast<std::uint32_t>(b.ranking.size()));
          for (const auto& e : b.ranking) w.raw(e.agent.bytes).u64(e.score.num).u64(e.score.den);
        } else if constexpr (std::is_same_v<B, TournamentFailureBody>) {
        } else if constexpr (std::is_same_v<B, PublishAgentPriceBody>) {
          w.raw(b.agent.bytes).u8(static_cast<std::uint8_t>(b.scheme)).u64(b.price.value());
        } else if constexpr (std::is_same_v<B, PublishDataPriceBody>) {
          w.raw(b.data.bytes).bytes(b.params).u8(static_cast<std::uint8_t>(b.scheme)).u64(b.price.value());
        } else if constexpr (std::is_same_v<B, RentBody>) {
          w.raw(b.uuid.bytes).u64(b.quantity);
        }
      },
      body);
}

TxBody get_body(ByteReader& r, std::uint8_t tag) {
  switch (static_cast<TxKind>(tag)) {
    case TxKind::SubmitAgent: return SubmitAgentBody{Uuid{r.fixed<16>()}};
    case TxKind::PublishDataset: {
      PublishDatasetBody b;
      b.inputs_ref = r.fixed<32>();
      b.inputs_hash = r.fixed<32>();
      b.encrypted_signals_ref = r.fixed<32>();
      b.signals_hash = r.fixed<32>();
      return b;
    }
    case TxKind::SubmitSignal: {
      SubmitSignalBody b;
      b.agent = Uuid{r.fixed<16>()};
      b.envelope = decode_envelope(r.bytes());
      b.tick = get_tick(r);
      return b;
    }
    case TxKind::PublishDatasetDecryptionKey: return PublishDatasetKeyBody{r.fixed<32>()};
    case TxKind::PublishSignalDecryptionKey: {
      PublishSignalKeyBody b;
      b.agent = Uuid{r.fixed<16>()};
      b.key = r.fixed<32>();
      b.tick = get_tick(r);
      return b;
    }
    case TxKind::PublishTournamentRanking: {
      PublishRankingBody b;
      const std::uint32_t n = r.u32();
      for (std::uint32_t i = 0; i < n; ++i) {
        RankingEntry e;
        e.agent = Uuid{r.fixed<16>()};
        e.score.num = r.u64();
        e.score.den = r.u64();
        if (e.score.den == 0) throw DecodeError(DecodeErrc::BadValue, "zero denominator");
        b.ranking.push_back(e);
      }
      return b;
    }
    case TxKind::TournamentFailure: return TournamentFailureBody{};
    case TxKind::PublishAgentPrice: {
      PublishAgentPriceBody b;
      b.agent = Uuid{r.fixed<16>()};
      b.scheme = get_scheme(r);
      b.price = TokenAmount(r.u64());
      return b;
    }
    case TxKind::PublishDataPrice: {
      PublishDataPriceBody b;
      b.data = Uuid{r.fixed<16>()};
      b.params = r.bytes();
      b.scheme = get_scheme(r);
      b.price = TokenAmount(r.u64());
      return b;
    }
    case TxKind::Rent: {
      RentBody b;
      b.uuid = Uuid{r.fixed<16>()};
      b.quantity = r.u64();
      return b;
    }
  }
  throw DecodeError(DecodeErrc::BadTag, "transaction kind");
}

}  // namespace

Bytes signing_bytes(const Transaction& tx) {
  ByteWriter w;
  w.raw(tx.sender.bytes).u64(tx.sequence).u8(static_cast<std::uint8_t>(tx.kind()));
  put_body(w, tx.body);
  return std::move(w).take();
}

Bytes encode_tx(const Transaction& tx) {
  Bytes out = signing_bytes(tx);
  out.insert(out.end(), tx.signature.begin(), tx.signature.end());
  return out;
}

Transaction decode_tx(std::span<const std::uint8_t> wire) {
  ByteReader r(wire);
  Transaction tx;
  tx.sender = AccountId{r.fixed<32>()};
  tx.sequence = r.u64();
  const std::uint8_t tag = r.u8();
  if (tag < 0x01 || tag > 0x0A) throw DecodeError(DecodeErrc::BadTag, "transaction kind");
  tx.body = get_body(r, tag);
  tx.signature = r.fixed<64>();
  r.expect_done();
  return tx;
}

Digest tx_digest(const Transaction& tx) { return canonical_digest(encode_tx(tx)); }

Transaction make_tx(const KeyPair& signer, std::uint64_t sequence, TxBody body) {
  Transaction tx{signer.account(), sequence, std::move(body), {}};
  tx.signature = signer.sign(signing_bytes(tx));
  return tx;
}

// ---------------------------------------------------------------------------
// Validation and effects

namespace {

using Effect = std::function<void(ChainState&)>;

LedgerState charged(const LedgerState& ledger, const AccountId& payer, TokenAmount fee) {
  try {
    return charge_fee(ledger, payer, fee);
  } catch (const LedgerError&) {
    throw TxError(TxErrc::InsufficientBalance);
  }
}

const AgentRecord& owned_agent(const ChainState& s, const Uuid& uuid, const AccountId& sender) {
  const auto it = s.agents.find(uuid);
  if (it == s.agents.end()) throw TxError(TxErrc::UnknownAgent);
  if (it->second.owner != sender) throw TxError(TxErrc::NotOwner);
  return it->second;
}

const TournamentState& started(const ChainState& s, std::uint64_t index) {
  const TournamentState* t = s.find_tournament(index);
  if (!t || index >= s.next_tournament || t->settled()) throw TxError(TxErrc::TournamentNotActive);
  return *t;
}

/// Tournament whose end lies within tolerance of `now`.
std::uint64_t ending_tournament(const ValidatedConfig& cfg, Timestamp now) {
  const Duration freq = cfg->tournament_start_frequency;
  const Timestamp nearest_boundary = (now + freq / 2) / freq;
  if (nearest_boundary < 1) throw TxError(TxErrc::OutsideTolerance);
  const auto index = static_cast<std::uint64_t>(nearest_boundary - 1);
  if (!within_tolerance(cfg, tournament_window(cfg, index).end, now)) throw TxError(TxErrc::OutsideTolerance);
  return index;
}

/// Resolution transactions address the oldest evaluated, unsettled tournament.
const TournamentState& resolution_target(const ChainState& s, TxErrc when_all_settled) {
  bool any_evaluated = false;
  for (const auto& [index, t] : s.tournaments) {
    if (index >= s.next_tournament) break;
    if (t.settled()) {
      any_evaluated = true;
      continue;
    }
    if (t.evaluation) return t;
    throw TxError(TxErrc::TournamentNotEnded);
  }
  throw TxError(any_evaluated ? when_all_settled : TxErrc::TournamentNotEnded);
}

struct Handler {
  const ChainState& s;
  const Transaction& tx;
  const TxContext& ctx;

  const ValidatedConfig& cfg() const { return *ctx.env.cfg; }

  Effect operator()(const SubmitAgentBody& b) const {
    if (s.agents.count(b.uuid) || s.data_offerings.count(b.uuid)) throw TxError(TxErrc::DuplicateUuid);
    LedgerState ledger = charged(s.ledger, tx.sender, cfg()->agent_submission_fee);
    const std::uint64_t index = tournament_index_at(cfg(), ctx.now) + 1;
    return [=, sender = tx.sender, now = ctx.now](ChainState& st) {
      st.ledger = ledger;
      st.agents[b.uuid] = AgentRecord{sender, index, now, false};
      st.tournament(index).participants[b.uuid] = Participant{sender, now};
    };
  }

  Effect operator()(const PublishDatasetBody& b) const {
    if (!cfg().is_dataset()) throw TxError(TxErrc::WrongDomainType);
    const std::uint64_t index = tournament_index_at(cfg(), ctx.now);
    const TournamentState& t = started(s, index);
    if (!t.is_challenger(tx.sender)) throw TxError(TxErrc::NotAChallenger);
    if (t.challenger_disqualified(tx.sender)) throw TxError(TxErrc::SenderDisqualified);
    if (ctx.now >= tournament_window(cfg(), index).start + *cfg()->dataset_submission_deadline) {
      throw TxError(TxErrc::DeadlinePassed);
    }
    if (t.datasets.count(tx.sender)) throw TxError(TxErrc::AlreadySubmitted);

    const auto inputs = ctx.env.blobs->get(b.inputs_ref);
    const auto sealed = ctx.env.blobs->get(b.encrypted_signals_ref);
    if (!inputs || !sealed || sha256(*inputs) != b.inputs_hash) throw TxError(TxErrc::DatasetUnavailable);

    return [=, sender = tx.sender, now = ctx.now](ChainState& st) {
      st.tournament(index).datasets[sender] =
          DatasetRecord{b.inputs_ref, b.inputs_hash, b.encrypted_signals_ref, b.signals_hash, now, std::nullopt};
    };
  }

  Effect operator()(const SubmitSignalBody& b) const {
    const AgentRecord& agent = owned_agent(s, b.agent, tx.sender);
    const TournamentState& t = started(s, agent.tournament);
    const Window w = tournament_window(cfg(), agent.tournament);
    Timestamp tick = kNoTick;
    if (cfg().is_realtime()) {
      if (!b.tick) throw TxError(TxErrc::WrongDomainType);
      tick = *b.tick;
      if (tick < w.start || tick >= w.end || tick % *cfg()->real_time_frequency != 0) {
        throw TxError(TxErrc::OutsideTolerance);
      }
      if (!within_tolerance(cfg(), tick, ctx.now)) throw TxError(TxErrc::OutsideTolerance);
    } else {
      if (b.tick) throw TxError(TxErrc::WrongDomainType);
      if (ctx.now < w.start || ctx.now >= w.end) throw TxError(TxErrc::TournamentNotActive);
    }
    if (t.miner_disqualified(tx.sender)) throw TxError(TxErrc::SenderDisqualified);
    if (t.signals.count({b.agent, tick})) throw TxError(TxErrc::DuplicateSignal);

    return [=, index = agent.tournament, now = ctx.now](ChainState& st) {
      st.tournament(index).signals[{b.agent, tick}] = SignalRecord{b.envelope, now, std::nullopt, std::nullopt};
    };
  }

  Effect operator()(const PublishDatasetKeyBody& b) const {
    if (!cfg().is_dataset()) throw TxError(TxErrc::WrongDomainType);
    const std::uint64_t index = ending_tournament(cfg(), ctx.now);
    const TournamentState& t = started(s, index);
    if (!t.is_challenger(tx.sender)) throw TxError(TxErrc::NotAChallenger);
    if (t.challenger_disqualified(tx.sender)) throw TxError(TxErrc::SenderDisqualified);
    const auto ds = t.datasets.find(tx.sender);
    if (ds == t.datasets.end()) throw TxError(TxErrc::NoSignal);
    if (ds->second.key) throw TxError(TxErrc::AlreadyRevealed);
    return [=, sender = tx.sender](ChainState& st) { st.tournament(index).datasets[sender].key = b.key; };
  }

  Effect operator()(const PublishSignalKeyBody& b) const {
    const AgentRecord& agent = owned_agent(s, b.agent, tx.sender);
    const std::uint64_t index = agent.tournament;
    Timestamp envelope_tick = kNoTick;
    if (cfg().is_realtime()) {
      if (!b.tick) throw TxError(TxErrc::WrongDomainType);
      if (!within_tolerance(cfg(), *b.tick, ctx.now)) throw TxError(TxErrc::OutsideTolerance);
      envelope_tick = *b.tick - *cfg()->real_time_frequency;
    } else {
      if (b.tick) throw TxError(TxErrc::WrongDomainType);
      if (ending_tournament(cfg(), ctx.now) != index) throw TxError(TxErrc::OutsideTolerance);
    }
    const TournamentState& t = started(s, index);
    if (t.miner_disqualified(tx.sender)) throw TxError(TxErrc::SenderDisqualified);
    const auto rec = t.signals.find({b.agent, envelope_tick});
    if (rec == t.signals.end()) throw TxError(TxErrc::NoSignal);
    if (rec->second.key) throw TxError(TxErrc::AlreadyRevealed);

    std::optional<Misbehavior> evidence;
    SignalPayload payload;
    try {
      payload = decode_signal_payload(open(rec->second.envelope, b.key));
      if (payload.author != s.keys.at(tx.sender)) evidence = Misbehavior::CopiedSignal;
    } catch (const CryptoError& e) {
      if (e.code() != CryptoErrc::CommitMismatch) throw TxError(TxErrc::DecryptFailed);
      evidence = Misbehavior::BadCommit;
    } catch (const DecodeError&) {
      evidence = Misbehavior::BadCommit;
    }
    if (evidence) {
      // The transaction itself is valid: it is the on-chain evidence.
      return [=, sender = tx.sender](ChainState& st) {
        mark_disqualified(st.tournament(index), sender, false, *evidence);
      };
    }
    if (t.used_keys.count(b.key)) throw TxError(TxErrc::KeyReused);
    return [=, signal = payload.signal](ChainState& st) {
      TournamentState& tm = st.tournament(index);
      SignalRecord& r = tm.signals[{b.agent, envelope_tick}];
      r.key = b.key;
      r.signal = signal;
      tm.used_keys.insert(b.key);
    };
  }

  Effect operator()(const PublishRankingBody& b) const {
    if (tx.sender != ctx.block_creator) throw TxError(TxErrc::NotBlockCreator);
    const TournamentState& t = resolution_target(s, TxErrc::AlreadyRanked);
    if (t.evaluation->failed) throw TxError(TxErrc::TournamentFailed);
    if (b.ranking != t.evaluation->ranking) throw TxError(TxErrc::RankingMismatch);
    RewardOutcome outcome = distribute_reward(s.ledger, t, b.ranking, cfg()->problem_type);
    return [=, index = t.index](ChainState& st) {
      TournamentState& tm = st.tournament(index);
      st.ledger = outcome.ledger;
      tm.phase = TournamentPhase::Resolved;
      tm.result = b.ranking;
      tm.payouts = outcome.payouts;
      tm.carried_forward = outcome.carried_forward;
      for (const auto& e : b.ranking) st.agents[e.agent].validated = true;
    };
  }

  Effect operator()(const TournamentFailureBody&) const {
    if (tx.sender != ctx.block_creator) throw TxError(TxErrc::NotBlockCreator);
    const TournamentState& t = resolution_target(s, TxErrc::AlreadyResolved);
    if (!t.evaluation->failed) throw TxError(TxErrc::NotFailed);
    LedgerState ledger = refund_tournament(s.ledger, t);
    std::map<AccountId, TokenAmount> refunds;
    TokenAmount carried;
    for (const auto& r : t.fee_receipts) {
      if (r.payer) {
        refunds[*r.payer] += r.amount;
      } else {
        carried += r.amount;
      }
    }
    return [=, index = t.index](ChainState& st) {
      TournamentState& tm = st.tournament(index);
      st.ledger = ledger;
      tm.phase = TournamentPhase::Failed;
      tm.refunds = refunds;
      tm.carried_forward = carried;
    };
  }

  Effect operator()(const PublishAgentPriceBody& b) const {
    const AgentRecord& agent = owned_agent(s, b.agent, tx.sender);
    if (!agent.validated) throw TxError(TxErrc::AgentNotValidated);
    LedgerState ledger = charged(s.ledger, tx.sender, cfg()->price_publish_fee);
    return [=, sender = tx.sender](ChainState& st) {
      st.ledger = ledger;
      st.listings[b.agent] = Listing{sender, b.scheme, b.price, true};
    };
  }

  Effect operator()(const PublishDataPriceBody& b) const {
    if (s.agents.count(b.data) || s.data_offerings.count(b.data)) throw TxError(TxErrc::DuplicateUuid);
    LedgerState ledger = charged(s.ledger, tx.sender, cfg()->data_publish_fee);
    return [=, sender = tx.sender](ChainState& st) {
      st.ledger = ledger;
      st.data_offerings[b.data] = DataOffering{sender, b.params};
      st.listings[b.data] = Listing{sender, b.scheme, b.price, false};
    };
  }

  Effect operator()(const RentBody& b) const {
    if (b.quantity < 1) throw TxError(TxErrc::QuantityInvalid);
    const auto listing = s.listings.find(b.uuid);
    if (listing == s.listings.end()) throw TxError(TxErrc::UnknownListing);
    if (listing->second.scheme == PriceScheme::Buyout && b.quantity != 1) throw TxError(TxErrc::QuantityInvalid);
    LedgerState ledger;
    try {
      const TokenAmount cost = listing->second.price * b.quantity;
      ledger = transfer(s.ledger, tx.sender, listing->second.seller, cost);
      ledger = charge_fee(ledger, tx.sender, cfg()->rent_fee);
    } catch (const ArithmeticError&) {
      throw TxError(TxErrc::InsufficientBalance);
    } catch (const LedgerError&) {
      throw TxError(TxErrc::InsufficientBalance);
    }
    return [=](ChainState& st) { st.ledger = ledger; };
  }
};

Effect validate(const ChainState& s, const Transaction& tx, const TxContext& ctx) {
  const auto key = s.keys.find(tx.sender);
  if (key == s.keys.end()) throw TxError(TxErrc::UnknownAccount);
  if (!verify_cached(signing_bytes(tx), tx.signature, key->second)) throw TxError(TxErrc::BadSignature);
  const auto last = s.sequences.find(tx.sender);
  if (tx.sequence == 0 || (last != s.sequences.end() && tx.sequence <= last->second)) {
    throw TxError(TxErrc::BadSequence);
  }
  return std::visit(Handler{s, tx, ctx}, tx.body);
}

}  // namespace

void apply_tx(ChainState& s, const Transaction& tx, const TxContext& ctx) {
  Effect effect = validate(s, tx, ctx);
  effect(s);
  s.sequences[tx.sender] = tx.sequence;
}

ChainState applied(const ChainState& s, const Transaction& tx, const TxContext& ctx) {
  ChainState out = s;
  apply_tx(out, tx, ctx);
  return out;
}

void validate_tx(const ChainState& s, const Transaction& tx, const TxContext& ctx) { validate(s, tx, ctx); }

bool tx_valid(const ChainState& s, const Transaction& tx, const TxContext& ctx) {
  try {
    validate(s, tx, ctx);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace scynet
