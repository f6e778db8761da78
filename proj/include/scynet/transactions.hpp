#pragma once

#include <optional>
#include <variant>

#include "scynet/chain.hpp"
#include "scynet/crypto.hpp"

namespace scynet {

enum class TxKind : std::uint8_t {
  SubmitAgent = 0x01,
  PublishDataset = 0x02,
  SubmitSignal = 0x03,
  PublishDatasetDecryptionKey = 0x04,
  PublishSignalDecryptionKey = 0x05,
  PublishTournamentRanking = 0x06,
  TournamentFailure = 0x07,
  PublishAgentPrice = 0x08,
  PublishDataPrice = 0x09,
  Rent = 0x0A,
};
const char* to_string(TxKind k);
TxKind tx_kind_from_string(std::string_view s);

struct SubmitAgentBody {
  Uuid uuid;
  bool operator==(const SubmitAgentBody&) const = default;
};

/// Dataset references are content-store digests standing in for URLs.
struct PublishDatasetBody {
  Digest inputs_ref{};
  Digest inputs_hash{};
  Digest encrypted_signals_ref{};
  Digest signals_hash{};
  bool operator==(const PublishDatasetBody&) const = default;
};

struct SubmitSignalBody {
  Uuid agent;
  SealedEnvelope envelope;
  std::optional<Timestamp> tick;  ///< none in dataset domains
  bool operator==(const SubmitSignalBody&) const = default;
};

struct PublishDatasetKeyBody {
  SymmetricKey key{};
  bool operator==(const PublishDatasetKeyBody&) const = default;
};

/// In real-time domains `tick` is the tick at which the key is revealed; the
/// key opens the envelope submitted one tick earlier.
struct PublishSignalKeyBody {
  Uuid agent;
  SymmetricKey key{};
  std::optional<Timestamp> tick;
  bool operator==(const PublishSignalKeyBody&) const = default;
};

struct PublishRankingBody {
  Ranking ranking;
  bool operator==(const PublishRankingBody&) const = default;
};

struct TournamentFailureBody {
  bool operator==(const TournamentFailureBody&) const = default;
};

struct PublishAgentPriceBody {
  Uuid agent;
  PriceScheme scheme = PriceScheme::PerUse;
  TokenAmount price;
  bool operator==(const PublishAgentPriceBody&) const = default;
};

struct PublishDataPriceBody {
  Uuid data;
  Bytes params;
  PriceScheme scheme = PriceScheme::PerUse;
  TokenAmount price;
  bool operator==(const PublishDataPriceBody&) const = default;
};

struct RentBody {
  Uuid uuid;
  std::uint64_t quantity = 0;
  bool operator==(const RentBody&) const = default;
};

/// Alternatives appear in kind-tag order.
using TxBody = std::variant<SubmitAgentBody, PublishDatasetBody, SubmitSignalBody, PublishDatasetKeyBody,
                            PublishSignalKeyBody, PublishRankingBody, TournamentFailureBody,
                            PublishAgentPriceBody, PublishDataPriceBody, RentBody>;

TxKind kind_of(const TxBody& body);

struct Transaction {
  AccountId sender;
  std::uint64_t sequence = 0;
  TxBody body;
  Signature signature{};

  TxKind kind() const { return kind_of(body); }
  bool operator==(const Transaction&) const = default;
};

/// sender ‖ sequence ‖ kind ‖ body. The signature covers exactly these bytes.
Bytes signing_bytes(const Transaction& tx);
/// signing_bytes ‖ signature.
Bytes encode_tx(const Transaction& tx);
Transaction decode_tx(std::span<const std::uint8_t> wire);
Digest tx_digest(const Transaction& tx);

Transaction make_tx(const KeyPair& signer, std::uint64_t sequence, TxBody body);

enum class TxErrc {
  BadSignature,
  UnknownAccount,
  BadSequence,
  WrongDomainType,
  DuplicateUuid,
  InsufficientBalance,
  NotAChallenger,
  DeadlinePassed,
  AlreadySubmitted,
  UnknownAgent,
  NotOwner,
  OutsideTolerance,
  DuplicateSignal,
  AlreadyRevealed,
  KeyReused,
  DecryptFailed,
  NoSignal,
  SenderDisqualified,
  TournamentNotActive,
  NotBlockCreator,
  TournamentNotEnded,
  RankingMismatch,
  AlreadyRanked,
  TournamentFailed,
  NotFailed,
  AlreadyResolved,
  AgentNotValidated,
  UnknownListing,
  QuantityInvalid,
  DatasetUnavailable,
};
const char* to_string(TxErrc c);
using TxError = CodedError<TxErrc>;

struct TxContext {
  ChainEnv env;
  Timestamp now = 0;        ///< block timestamp; `s` must already be advanced to it
  AccountId block_creator;  ///< only consulted by ranking and failure transactions
};

/// Validates `tx` against `s` and applies it in place. On error `s` is left
/// untouched and a TxError (or LedgerError for ledger debits) is thrown.
void apply_tx(ChainState& s, const Transaction& tx, const TxContext& ctx);

/// Copying form; convenient in tests.
ChainState applied(const ChainState& s, const Transaction& tx, const TxContext& ctx);

/// Runs every check of apply_tx without mutating `s`. Throws like apply_tx.
void validate_tx(const ChainState& s, const Transaction& tx, const TxContext& ctx);

/// True iff apply_tx would succeed.
bool tx_valid(const ChainState& s, const Transaction& tx, const TxContext& ctx);

}  // namespace scynet
