#include "scynet/tournament.hpp"

#include <algorithm>

namespace scynet {

const char* to_string(TournamentErrc) { return "NoValidDatasets"; }

const char* to_string(TournamentPhase p) {
  switch (p) {
    case TournamentPhase::Pending: return "Pending";
    case TournamentPhase::Active: return "Active";
    case TournamentPhase::AwaitingReveals: return "AwaitingReveals";
    case TournamentPhase::Resolved: return "Resolved";
    case TournamentPhase::Failed: return "Failed";
  }
  return "Unknown";
}

const char* to_string(Misbehavior m) {
  switch (m) {
    case Misbehavior::MissedSignal: return "MissedSignal";
    case Misbehavior::MissedReveal: return "MissedReveal";
    case Misbehavior::MissedDataset: return "MissedDataset";
    case Misbehavior::BadCommit: return "BadCommit";
    case Misbehavior::CopiedSignal: return "CopiedSignal";
    case Misbehavior::CorruptDataset: return "CorruptDataset";
  }
  return "Unknown";
}

std::set<AccountId> TournamentState::participating_miners() const {
  std::set<AccountId> out;
  for (const auto& [_, p] : participants) out.insert(p.owner);
  return out;
}

bool mark_disqualified(TournamentState& t, const AccountId& account, bool as_challenger, Misbehavior reason) {
  auto& marks = as_challenger ? t.disqualified_challengers : t.disqualified_miners;
  return marks.emplace(account, reason).second;
}

Rational score_realtime(const std::map<Timestamp, bool>& signals, const std::map<Timestamp, bool>& actuals) {
  if (actuals.empty()) return {0, 1};
  std::uint64_t correct = 0;
  for (const auto& [tick, outcome] : actuals) {
    const auto it = signals.find(tick);
    if (it != signals.end() && it->second == outcome) ++correct;
  }
  return Rational{correct, actuals.size()}.reduced();
}

Rational score_dataset(const std::map<AccountId, std::vector<bool>>& agent_outputs,
                       const std::map<AccountId, std::vector<bool>>& truths) {
  if (truths.empty()) throw TournamentError(TournamentErrc::NoValidDatasets);
  // Sum of c_i / n_i kept as an exact fraction, then divided by the count.
  Rational sum{0, 1};
  for (const auto& [challenger, truth] : truths) {
    std::uint64_t correct = 0;
    const auto it = agent_outputs.find(challenger);
    if (it != agent_outputs.end() && it->second.size() == truth.size()) {
      for (std::size_t i = 0; i < truth.size(); ++i) correct += it->second[i] == truth[i] ? 1 : 0;
    }
    const std::uint64_t n = std::max<std::size_t>(truth.size(), 1);
    const std::uint64_t l = std::lcm(sum.den, n);
    sum = Rational{sum.num * (l / sum.den) + correct * (l / n), l}.reduced();
  }
  return Rational{sum.num, sum.den * truths.size()}.reduced();
}

std::map<AccountId, std::vector<bool>> open_datasets(TournamentState& t, const DomainOracle& oracle,
                                                     const BlobStore& blobs) {
  std::map<AccountId, std::vector<bool>> truths;
  if (!t.challengers) return truths;
  for (const AccountId& c : t.challengers->members) {
    if (t.challenger_disqualified(c)) continue;
    const auto rec = t.datasets.find(c);
    if (rec == t.datasets.end() || !rec->second.key) continue;  // swept as missed
    const DatasetRecord& ds = rec->second;

    std::optional<std::vector<bool>> outputs;
    try {
      const auto sealed = blobs.get(ds.encrypted_signals_ref);
      const auto inputs = blobs.get(ds.inputs_ref);
      if (sealed && inputs) {
        const SealedEnvelope env = decode_envelope(*sealed);
        if (env.commit_hash == ds.signals_hash) {
          outputs = oracle.decode_dataset_outputs(open(env, *ds.key));
          const auto size = oracle.dataset_size(*inputs);
          if (outputs && (!size || *size != outputs->size() || outputs->empty())) outputs.reset();
        }
      }
    } catch (const std::exception&) {
      outputs.reset();
    }
    if (outputs) {
      truths.emplace(c, std::move(*outputs));
    } else {
      mark_disqualified(t, c, true, Misbehavior::CorruptDataset);
    }
  }
  return truths;
}

bool check_failure(const TournamentState& t) {
  if (t.selection_failed) return true;
  if (!t.challengers) return false;
  std::uint64_t lost = 0;
  for (const auto& [account, power] : t.challengers->powers) {
    if (t.challenger_disqualified(account)) lost += power;
  }
  return static_cast<unsigned __int128>(lost) * 2 >= t.challengers->total_power();
}

Ranking compute_local_ranking(const TournamentState& t, const ValidatedConfig& cfg, const DomainOracle& oracle,
                              const std::map<AccountId, std::vector<bool>>& dataset_truths) {
  struct Scored {
    RankingEntry entry;
    Timestamp registered_at;
  };
  std::vector<Scored> scored;

  std::map<Timestamp, bool> actuals;
  if (cfg.is_realtime()) {
    for (Timestamp tick : realtime_ticks(cfg, t.index)) actuals[tick] = oracle.realtime_outcome(tick);
  }

  for (const auto& [uuid, participant] : t.participants) {
    if (t.miner_disqualified(participant.owner)) continue;
    Rational score{0, 1};
    if (cfg.is_realtime()) {
      std::map<Timestamp, bool> predictions;
      for (const auto& [tick, _] : actuals) {
        const auto rec = t.signals.find({uuid, tick});
        if (rec == t.signals.end() || !rec->second.signal) continue;
        if (auto p = oracle.decode_realtime_signal(*rec->second.signal)) predictions[tick] = *p;
      }
      score = score_realtime(predictions, actuals);
    } else {
      std::map<AccountId, std::vector<bool>> outputs;
      const auto rec = t.signals.find({uuid, kNoTick});
      if (rec != t.signals.end() && rec->second.signal) {
        if (auto decoded = oracle.decode_dataset_signal(*rec->second.signal)) outputs = std::move(*decoded);
      }
      if (!dataset_truths.empty()) score = score_dataset(outputs, dataset_truths);
    }
    scored.push_back({RankingEntry{uuid, score.reduced()}, participant.registered_at});
  }

  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.entry.score != b.entry.score) return a.entry.score > b.entry.score;
    if (a.registered_at != b.registered_at) return a.registered_at < b.registered_at;
    return a.entry.agent < b.entry.agent;
  });
  Ranking ranking;
  ranking.reserve(scored.size());
  for (auto& s : scored) ranking.push_back(s.entry);
  return ranking;
}

void evaluate_tournament(TournamentState& t, const ValidatedConfig& cfg, const DomainOracle& oracle,
                         const BlobStore& blobs) {
  const auto truths = cfg.is_dataset() ? open_datasets(t, oracle, blobs) : std::map<AccountId, std::vector<bool>>{};
  Evaluation ev;
  ev.failed = cfg.is_dataset() && check_failure(t);
  if (!ev.failed) ev.ranking = compute_local_ranking(t, cfg, oracle, truths);
  t.evaluation = std::move(ev);
}

namespace {

std::uint64_t mul_div(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b / c);
}

}  // namespace

RewardOutcome distribute_reward(const LedgerState& ledger, const TournamentState& t, const Ranking& ranking,
                                ProblemType problem) {
  RewardOutcome out{ledger, {}, {}};
  const std::uint64_t pool = t.pool.value();
  std::uint64_t paid = 0;
  auto pay = [&](const AccountId& to, std::uint64_t amount) {
    if (amount == 0) return;
    out.ledger = pay_from_current(out.ledger, to, TokenAmount(amount));
    out.payouts[to] += TokenAmount(amount);
    paid += amount;
  };

  if (!ranking.empty()) {
    std::uint64_t miner_part = pool;
    if (problem == ProblemType::Dataset) {
      const std::uint64_t challenger_part = pool / 3;
      miner_part = pool - challenger_part;
      std::uint64_t power_sum = 0;
      if (t.challengers) {
        for (const auto& [c, p] : t.challengers->powers) {
          if (!t.challenger_disqualified(c)) power_sum += p;
        }
      }
      if (power_sum > 0) {
        for (const auto& [c, p] : t.challengers->powers) {
          if (!t.challenger_disqualified(c)) pay(c, mul_div(challenger_part, p, power_sum));
        }
      }
    }
    static constexpr std::uint64_t kWeights[] = {3, 2, 1};
    const std::size_t winners = std::min<std::size_t>(3, ranking.size());
    std::uint64_t weight_sum = 0;
    for (std::size_t i = 0; i < winners; ++i) weight_sum += kWeights[i];
    for (std::size_t i = 0; i < winners; ++i) {
      const auto owner = t.participants.at(ranking[i].agent).owner;
      pay(owner, mul_div(miner_part, kWeights[i], weight_sum));
    }
  }

  out.carried_forward = TokenAmount(pool - paid);
  out.ledger = carry_to_next(out.ledger, out.carried_forward);
  return out;
}

LedgerState refund_tournament(const LedgerState& ledger, const TournamentState& t) {
  return refund_receipts(ledger, t.fee_receipts);
}

nlohmann::json ranking_to_json(const Ranking& r) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : r) out.push_back({{"agent", e.agent.hex()}, {"score", {e.score.num, e.score.den}}});
  return out;
}

namespace {

nlohmann::json marks_to_json(const std::map<AccountId, Misbehavior>& marks) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [a, m] : marks) out[a.hex()] = to_string(m);
  return out;
}

nlohmann::json amounts_to_json(const std::map<AccountId, TokenAmount>& amounts) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [a, v] : amounts) out[a.hex()] = v.value();
  return out;
}

}  // namespace

nlohmann::json tournament_to_json(const TournamentState& t) {
  nlohmann::json j;
  j["index"] = t.index;
  j["phase"] = to_string(t.phase);
  nlohmann::json participants = nlohmann::json::object();
  for (const auto& [uuid, p] : t.participants) {
    participants[uuid.hex()] = {{"owner", p.owner.hex()}, {"registeredAt", p.registered_at}};
  }
  j["participants"] = std::move(participants);
  if (t.challengers) {
    nlohmann::json ch = nlohmann::json::object();
    for (const auto& [a, p] : t.challengers->powers) ch[a.hex()] = p;
    j["challengers"] = std::move(ch);
  }
  j["selectionFailed"] = t.selection_failed;
  nlohmann::json signals = nlohmann::json::object();
  for (const auto& [key, rec] : t.signals) {
    nlohmann::json s;
    s["envelope"] = to_hex(encode_envelope(rec.envelope));
    s["submittedAt"] = rec.submitted_at;
    if (rec.key) s["key"] = to_hex(*rec.key);
    if (rec.signal) s["signal"] = to_hex(*rec.signal);
    signals[key.first.hex() + ":" + std::to_string(key.second)] = std::move(s);
  }
  j["signals"] = std::move(signals);
  nlohmann::json datasets = nlohmann::json::object();
  for (const auto& [c, d] : t.datasets) {
    nlohmann::json ds;
    ds["inputsRef"] = to_hex(d.inputs_ref);
    ds["inputsHash"] = to_hex(d.inputs_hash);
    ds["encryptedSignalsRef"] = to_hex(d.encrypted_signals_ref);
    ds["signalsHash"] = to_hex(d.signals_hash);
    ds["publishedAt"] = d.published_at;
    if (d.key) ds["key"] = to_hex(*d.key);
    datasets[c.hex()] = std::move(ds);
  }
  j["datasets"] = std::move(datasets);
  nlohmann::json keys = nlohmann::json::array();
  for (const auto& k : t.used_keys) keys.push_back(to_hex(k));
  j["usedKeys"] = std::move(keys);
  j["disqualifiedMiners"] = marks_to_json(t.disqualified_miners);
  j["disqualifiedChallengers"] = marks_to_json(t.disqualified_challengers);
  j["pool"] = t.pool.value();
  nlohmann::json receipts = nlohmann::json::array();
  for (const auto& r : t.fee_receipts) {
    receipts.push_back({{"payer", r.payer ? r.payer->hex() : ""}, {"amount", r.amount.value()}});
  }
  j["feeReceipts"] = std::move(receipts);
  j["sweep"] = {t.signal_ticks_swept, t.reveal_ticks_swept, t.dataset_deadline_swept, t.end_swept};
  if (t.evaluation) {
    j["evaluation"] = {{"failed", t.evaluation->failed}, {"ranking", ranking_to_json(t.evaluation->ranking)}};
  }
  if (t.result) j["result"] = ranking_to_json(*t.result);
  j["payouts"] = amounts_to_json(t.payouts);
  j["refunds"] = amounts_to_json(t.refunds);
  j["carriedForward"] = t.carried_forward.value();
  return j;
}

}  // namespace scynet
