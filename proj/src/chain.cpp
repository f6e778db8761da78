#include "scynet/chain.hpp"

#include "scynet/consensus.hpp"

namespace scynet {

const char* to_string(PriceScheme s) {
  switch (s) {
    case PriceScheme::PerUse: return "PerUse";
    case PriceScheme::Subscription: return "Subscription";
    case PriceScheme::Buyout: return "Buyout";
  }
  return "Unknown";
}

PriceScheme price_scheme_from_string(std::string_view s) {
  if (s == "PerUse") return PriceScheme::PerUse;
  if (s == "Subscription") return PriceScheme::Subscription;
  if (s == "Buyout") return PriceScheme::Buyout;
  throw std::invalid_argument("unknown price scheme: " + std::string(s));
}

TournamentState& ChainState::tournament(std::uint64_t index) {
  auto [it, inserted] = tournaments.try_emplace(index);
  if (inserted) it->second.index = index;
  return it->second;
}

const TournamentState* ChainState::find_tournament(std::uint64_t index) const {
  const auto it = tournaments.find(index);
  return it == tournaments.end() ? nullptr : &it->second;
}

const TournamentState* ChainState::oldest_unsettled() const {
  for (const auto& [index, t] : tournaments) {
    if (index >= next_tournament) break;
    if (!t.settled()) return &t;
  }
  return nullptr;
}

ChainState chain_genesis(const std::vector<GenesisAccount>& accounts, Timestamp time) {
  std::map<AccountId, TokenAmount> allocations;
  std::map<AccountId, GenesisStake> stakes;
  ChainState s;
  for (const auto& a : accounts) {
    const AccountId id = account_of(a.key);
    if (!s.keys.emplace(id, a.key).second) throw std::invalid_argument("duplicate genesis account " + id.hex());
    allocations[id] = a.balance;
    if (!a.stake.is_zero()) stakes[id] = GenesisStake{a.stake, time};
  }
  s.ledger = genesis(allocations, stakes);
  s.time = time;
  return s;
}

namespace {

void start_tournament(ChainState& s, const ChainEnv& env, std::uint64_t index) {
  const ValidatedConfig& cfg = *env.cfg;
  TournamentState& t = s.tournament(index);
  auto [ledger, rotation] = rotate_pools(s.ledger);
  s.ledger = std::move(ledger);
  t.pool = rotation.amount;
  t.fee_receipts = std::move(rotation.receipts);
  t.phase = TournamentPhase::Active;

  if (cfg.is_dataset()) {
    const Window w = tournament_window(cfg, index);
    try {
      t.challengers = select_challengers(network_powers(s.ledger, w.start),
                                         make_seed(s.head, s.height + 1, SelectionPurpose::Challenger), cfg,
                                         t.participating_miners());
    } catch (const ConsensusError&) {
      t.selection_failed = true;
    }
  }
}

void sweep_realtime(TournamentState& t, const ValidatedConfig& cfg, Timestamp now) {
  const auto ticks = realtime_ticks(cfg, t.index);
  const Duration tol = cfg->time_tolerance;
  const Duration step = *cfg->real_time_frequency;

  while (t.signal_ticks_swept < ticks.size() && now > ticks[t.signal_ticks_swept] + tol) {
    const Timestamp tick = ticks[t.signal_ticks_swept++];
    for (const auto& [uuid, p] : t.participants) {
      if (t.miner_disqualified(p.owner)) continue;
      if (!t.signals.count({uuid, tick})) mark_disqualified(t, p.owner, false, Misbehavior::MissedSignal);
    }
  }
  while (t.reveal_ticks_swept < ticks.size() && now > ticks[t.reveal_ticks_swept] + step + tol) {
    const Timestamp tick = ticks[t.reveal_ticks_swept++];
    for (const auto& [uuid, p] : t.participants) {
      if (t.miner_disqualified(p.owner)) continue;
      const auto rec = t.signals.find({uuid, tick});
      if (rec != t.signals.end() && !rec->second.key) {
        mark_disqualified(t, p.owner, false, Misbehavior::MissedReveal);
      }
    }
  }
  t.end_swept = t.reveal_ticks_swept == ticks.size();
}

void sweep_dataset(TournamentState& t, const ValidatedConfig& cfg, Timestamp now) {
  const Window w = tournament_window(cfg, t.index);
  const Duration tol = cfg->time_tolerance;
  const auto challengers = t.challengers ? t.challengers->members : std::vector<AccountId>{};

  if (!t.dataset_deadline_swept && now >= w.start + *cfg->dataset_submission_deadline) {
    t.dataset_deadline_swept = true;
    for (const auto& c : challengers) {
      if (!t.challenger_disqualified(c) && !t.datasets.count(c)) {
        mark_disqualified(t, c, true, Misbehavior::MissedDataset);
      }
    }
  }
  if (t.signal_ticks_swept == 0 && now >= w.end) {
    t.signal_ticks_swept = 1;
    for (const auto& [uuid, p] : t.participants) {
      if (!t.miner_disqualified(p.owner) && !t.signals.count({uuid, kNoTick})) {
        mark_disqualified(t, p.owner, false, Misbehavior::MissedSignal);
      }
    }
  }
  if (t.reveal_ticks_swept == 0 && now > w.end + tol) {
    t.reveal_ticks_swept = 1;
    for (const auto& c : challengers) {
      if (t.challenger_disqualified(c)) continue;
      const auto ds = t.datasets.find(c);
      if (ds != t.datasets.end() && !ds->second.key) mark_disqualified(t, c, true, Misbehavior::MissedReveal);
    }
    for (const auto& [uuid, p] : t.participants) {
      if (t.miner_disqualified(p.owner)) continue;
      const auto rec = t.signals.find({uuid, kNoTick});
      if (rec != t.signals.end() && !rec->second.key) {
        mark_disqualified(t, p.owner, false, Misbehavior::MissedReveal);
      }
    }
    t.end_swept = true;
  }
}

}  // namespace

void advance_chain(ChainState& s, const ChainEnv& env, Timestamp now) {
  if (now < s.time) throw std::invalid_argument("advance_chain: time moves backwards");
  const ValidatedConfig& cfg = *env.cfg;

  while (tournament_window(cfg, s.next_tournament).start <= now) {
    start_tournament(s, env, s.next_tournament);
    ++s.next_tournament;
  }

  for (auto& [index, t] : s.tournaments) {
    if (index >= s.next_tournament) break;
    if (t.settled() || t.evaluation) continue;
    const Window w = tournament_window(cfg, index);
    if (cfg.is_realtime()) {
      sweep_realtime(t, cfg, now);
    } else {
      sweep_dataset(t, cfg, now);
    }
    if (now >= w.end && t.phase == TournamentPhase::Active) t.phase = TournamentPhase::AwaitingReveals;
    if (t.end_swept && now > w.end + cfg->time_tolerance) evaluate_tournament(t, cfg, *env.oracle, *env.blobs);
  }
  s.time = now;
}

std::vector<std::uint64_t> overdue_tournaments(const ChainState& s, const ValidatedConfig& cfg, Timestamp now) {
  std::vector<std::uint64_t> out;
  for (const auto& [index, t] : s.tournaments) {
    if (index >= s.next_tournament) break;
    if (!t.settled() && now >= tournament_window(cfg, index).end + cfg->proposer_deadline) out.push_back(index);
  }
  return out;
}

std::map<std::uint64_t, std::map<AccountId, Misbehavior>> local_disqualified(const ChainState& s) {
  std::map<std::uint64_t, std::map<AccountId, Misbehavior>> out;
  for (const auto& [index, t] : s.tournaments) {
    auto marks = t.disqualified_miners;
    marks.insert(t.disqualified_challengers.begin(), t.disqualified_challengers.end());
    if (!marks.empty()) out[index] = std::move(marks);
  }
  return out;
}

nlohmann::json chain_to_json(const ChainState& s) {
  nlohmann::json j;
  j["ledger"] = ledger_to_json(s.ledger);
  nlohmann::json keys = nlohmann::json::object();
  for (const auto& [a, k] : s.keys) keys[a.hex()] = to_hex(k);
  j["keys"] = std::move(keys);
  nlohmann::json seqs = nlohmann::json::object();
  for (const auto& [a, n] : s.sequences) seqs[a.hex()] = n;
  j["sequences"] = std::move(seqs);
  nlohmann::json agents = nlohmann::json::object();
  for (const auto& [u, a] : s.agents) {
    agents[u.hex()] = {{"owner", a.owner.hex()},
                       {"tournament", a.tournament},
                       {"registeredAt", a.registered_at},
                       {"validated", a.validated}};
  }
  j["agents"] = std::move(agents);
  nlohmann::json offerings = nlohmann::json::object();
  for (const auto& [u, d] : s.data_offerings) offerings[u.hex()] = {{"owner", d.owner.hex()}, {"params", to_hex(d.params)}};
  j["dataOfferings"] = std::move(offerings);
  nlohmann::json listings = nlohmann::json::object();
  for (const auto& [u, l] : s.listings) {
    listings[u.hex()] = {{"seller", l.seller.hex()},
                         {"scheme", to_string(l.scheme)},
                         {"price", l.price.value()},
                         {"isAgent", l.is_agent}};
  }
  j["listings"] = std::move(listings);
  nlohmann::json tournaments = nlohmann::json::object();
  for (const auto& [i, t] : s.tournaments) tournaments[std::to_string(i)] = tournament_to_json(t);
  j["tournaments"] = std::move(tournaments);
  j["nextTournament"] = s.next_tournament;
  j["time"] = s.time;
  j["height"] = s.height;
  j["head"] = to_hex(s.head);
  return j;
}

Digest state_digest(const ChainState& s) { return canonical_digest(chain_to_json(s).dump()); }

}  // namespace scynet
