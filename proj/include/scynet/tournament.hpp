#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include <json.hpp>

#include "scynet/blob_store.hpp"
#include "scynet/config.hpp"
#include "scynet/consensus.hpp"
#include "scynet/crypto.hpp"
#include "scynet/ledger.hpp"

namespace scynet {

enum class TournamentErrc { NoValidDatasets };
const char* to_string(TournamentErrc c);
using TournamentError = CodedError<TournamentErrc>;

enum class TournamentPhase { Pending, Active, AwaitingReveals, Resolved, Failed };
const char* to_string(TournamentPhase p);

enum class Misbehavior { MissedSignal, MissedReveal, MissedDataset, BadCommit, CopiedSignal, CorruptDataset };
const char* to_string(Misbehavior m);

/// Domain-specific interpretation of signals and truth. The tournament layer
/// treats signals as opaque bytes.
class DomainOracle {
 public:
  virtual ~DomainOracle() = default;
  virtual bool realtime_outcome(Timestamp tick) const = 0;
  virtual std::optional<bool> decode_realtime_signal(std::span<const std::uint8_t> signal) const = 0;
  virtual std::optional<std::map<AccountId, std::vector<bool>>> decode_dataset_signal(
      std::span<const std::uint8_t> signal) const = 0;
  virtual std::optional<std::vector<bool>> decode_dataset_outputs(std::span<const std::uint8_t> outputs) const = 0;
  virtual std::optional<std::size_t> dataset_size(std::span<const std::uint8_t> inputs_blob) const = 0;
};

struct RankingEntry {
  Uuid agent;
  Rational score;  ///< always reduced
  bool operator==(const RankingEntry& o) const {
    return agent == o.agent && score.num == o.score.num && score.den == o.score.den;
  }
};
using Ranking = std::vector<RankingEntry>;

struct Participant {
  AccountId owner;
  Timestamp registered_at = 0;
  bool operator==(const Participant&) const = default;
};

/// Dataset-domain signals carry no tick.
inline constexpr Timestamp kNoTick = -1;
using SignalKey = std::pair<Uuid, Timestamp>;

struct SignalRecord {
  SealedEnvelope envelope;
  Timestamp submitted_at = 0;
  std::optional<SymmetricKey> key;
  std::optional<Bytes> signal;  ///< opened payload signal, author-verified
  bool operator==(const SignalRecord&) const = default;
};

struct DatasetRecord {
  Digest inputs_ref{};
  Digest inputs_hash{};
  Digest encrypted_signals_ref{};
  Digest signals_hash{};
  Timestamp published_at = 0;
  std::optional<SymmetricKey> key;
  bool operator==(const DatasetRecord&) const = default;
};

struct Evaluation {
  bool failed = false;
  Ranking ranking;
  bool operator==(const Evaluation&) const = default;
};

struct TournamentState {
  std::uint64_t index = 0;
  TournamentPhase phase = TournamentPhase::Pending;
  std::map<Uuid, Participant> participants;
  std::optional<ChallengerSet> challengers;
  bool selection_failed = false;
  std::map<SignalKey, SignalRecord> signals;
  std::map<AccountId, DatasetRecord> datasets;
  std::set<SymmetricKey> used_keys;
  std::map<AccountId, Misbehavior> disqualified_miners;
  std::map<AccountId, Misbehavior> disqualified_challengers;
  TokenAmount pool;
  std::vector<FeeReceipt> fee_receipts;

  // Deadline sweep progress.
  std::size_t signal_ticks_swept = 0;
  std::size_t reveal_ticks_swept = 0;
  bool dataset_deadline_swept = false;
  bool end_swept = false;

  std::optional<Evaluation> evaluation;
  std::optional<Ranking> result;
  std::map<AccountId, TokenAmount> payouts;
  std::map<AccountId, TokenAmount> refunds;
  TokenAmount carried_forward;

  bool operator==(const TournamentState&) const = default;

  bool settled() const noexcept {
    return phase == TournamentPhase::Resolved || phase == TournamentPhase::Failed;
  }
  bool is_challenger(const AccountId& a) const { return challengers && challengers->contains(a); }
  bool miner_disqualified(const AccountId& a) const { return disqualified_miners.count(a) != 0; }
  bool challenger_disqualified(const AccountId& a) const { return disqualified_challengers.count(a) != 0; }
  std::set<AccountId> participating_miners() const;
};

/// Records the first reason only; later evidence against the same party is
/// ignored. Returns true if newly marked.
bool mark_disqualified(TournamentState& t, const AccountId& account, bool as_challenger, Misbehavior reason);

/// Correct predictions over ticks with a known outcome.
Rational score_realtime(const std::map<Timestamp, bool>& signals, const std::map<Timestamp, bool>& actuals);

/// Mean per-dataset accuracy over every dataset in `truths`. A dataset the
/// agent did not answer (or answered with the wrong length) scores 0.
Rational score_dataset(const std::map<AccountId, std::vector<bool>>& agent_outputs,
                       const std::map<AccountId, std::vector<bool>>& truths);

/// Opens every dataset whose challenger revealed a key; challengers whose
/// dataset fails to decrypt, hash-check, or parse are disqualified.
std::map<AccountId, std::vector<bool>> open_datasets(TournamentState& t, const DomainOracle& oracle,
                                                     const BlobStore& blobs);

/// Disqualified challengers hold at least half of the selected power, or no
/// valid challenger set could be selected.
bool check_failure(const TournamentState& t);

/// Score descending, then earlier registration, then uuid bytes.
Ranking compute_local_ranking(const TournamentState& t, const ValidatedConfig& cfg, const DomainOracle& oracle,
                              const std::map<AccountId, std::vector<bool>>& dataset_truths);

/// Runs open_datasets, check_failure and compute_local_ranking; stores the
/// result in `t.evaluation`.
void evaluate_tournament(TournamentState& t, const ValidatedConfig& cfg, const DomainOracle& oracle,
                         const BlobStore& blobs);

struct RewardOutcome {
  LedgerState ledger;
  std::map<AccountId, TokenAmount> payouts;
  TokenAmount carried_forward;
};

/// Splits `t.pool` out of escrow. Remainders roll into the next pool.
RewardOutcome distribute_reward(const LedgerState& ledger, const TournamentState& t, const Ranking& ranking,
                                ProblemType problem);

/// Returns every receipted fee of a failed tournament to its payer.
LedgerState refund_tournament(const LedgerState& ledger, const TournamentState& t);

nlohmann::json ranking_to_json(const Ranking& r);
nlohmann::json tournament_to_json(const TournamentState& t);

}  // namespace scynet
