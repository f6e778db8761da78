#include "scynet/replay.hpp"

#include <fstream>
#include <sstream>

#include "scynet/state_machine.hpp"

namespace scynet {

namespace {

struct Violation {
  std::string what;
};

[[noreturn]] void fail(const std::string& invariant, const std::string& detail) {
  throw Violation{invariant + ": " + detail};
}

std::string who(const Replay& r, const AccountId& a) {
  const auto it = r.names.find(a);
  return it == r.names.end() ? a.hex() : it->second;
}

void replay_records(Replay& r, const std::vector<std::string>& lines) {
  std::string prev_link;
  std::optional<ToyOracle> oracle;
  std::optional<ValidatedConfig> cfg;
  BlobStore blobs;
  bool ended = false;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string at = "record " + std::to_string(i);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::exception&) {
      fail("integrity", at + " is not valid JSON");
    }
    if (!rec.is_object() || !rec.contains("h") || !rec["h"].is_string() || !rec.contains("type")) {
      fail("integrity", at + " lacks a hash link");
    }
    const std::string link = rec["h"].get<std::string>();
    rec.erase("h");
    if (rec.value("seq", std::uint64_t{~0ull}) != i) fail("integrity", at + " is out of sequence");
    if (chain_link(prev_link, rec.dump()) != link) fail("integrity", at + " digest mismatch");
    prev_link = link;
    if (ended) fail("integrity", at + " follows the end record");
    ++r.records;

    const std::string type = rec["type"].get<std::string>();
    try {
      if (i == 0) {
        if (type != "scenario") fail("integrity", "log does not start with a scenario record");
        r.scenario = scenario_from_json(rec["scenario"]);
        cfg = validate_config(r.scenario->domain);
        oracle.emplace(TruthStream(truth_seed(r.scenario->rng_seed), r.scenario->truth_bias));
        r.chain = scenario_genesis(*r.scenario);
        for (const auto& n : r.scenario->nodes) r.names[node_keypair(r.scenario->rng_seed, n.id).account()] = n.id;
        continue;
      }
      if (type == "blob") {
        const Bytes content = from_hex(rec["content"].get<std::string>());
        const Digest ref = array_from_hex<32>(rec["ref"].get<std::string>());
        if (sha256(content) != ref) fail("integrity", at + " blob content does not match its reference");
        blobs.put_as(ref, content);
      } else if (type == "reject") {
        ++r.rejected_rounds;
      } else if (type == "commit") {
        const Block block = decode_block(from_hex(rec["block"].get<std::string>()));
        const ChainEnv env{&*cfg, &*oracle, &blobs};
        ChainState post;
        try {
          post = apply_block(r.chain, block, env);
        } catch (const std::exception& e) {
          fail("replication", "block " + std::to_string(block.height) + " does not apply: " + e.what());
        }
        std::map<AccountId, Signature> votes;
        for (const auto& [account, sig] : rec["votes"].items()) {
          votes[AccountId::from_hex(account)] = array_from_hex<64>(sig.get<std::string>());
        }
        const PowerMap powers = network_powers(r.chain.ledger, block.timestamp);
        if (!block_accepted(votes, powers, block_digest(block), r.chain.keys)) {
          fail("consensus", "block " + std::to_string(block.height) + " lacks a two-thirds quorum");
        }
        r.chain = std::move(post);
        ++r.blocks;
        if (to_hex(state_digest(r.chain)) != rec["digest"].get<std::string>()) {
          fail("replication", "state digest mismatch at height " + std::to_string(block.height));
        }
        if (!is_conserved(r.chain.ledger)) {
          fail("conservation", "supply mismatch at height " + std::to_string(block.height));
        }
      } else if (type == "end") {
        ended = true;
        const std::string recorded = rec["violation"].get<std::string>();
        if (!recorded.empty()) throw Violation{recorded};
        if (rec["height"].get<std::uint64_t>() != r.chain.height ||
            rec["digest"].get<std::string>() != to_hex(state_digest(r.chain))) {
          fail("replication", "final state digest mismatch");
        }
      }
    } catch (const Violation&) {
      throw;
    } catch (const std::exception& e) {
      fail("integrity", at + " (" + type + ") is malformed: " + e.what());
    }
  }

  if (!r.scenario) fail("integrity", "empty log");
  if (!ended) fail("liveness", "log ends before the end record");
  for (std::uint64_t k = 0; k <= r.scenario->tournaments; ++k) {
    const TournamentState* t = r.chain.find_tournament(k);
    if (!t || !t->settled()) fail("liveness", "tournament " + std::to_string(k) + " incomplete");
  }
}

template <typename V>
std::map<std::string, V> by_name(const Replay& r, const std::map<AccountId, V>& m) {
  std::map<std::string, V> out;
  for (const auto& [a, v] : m) out.emplace(who(r, a), v);
  return out;
}

nlohmann::json amounts_by_node(const Replay& r, const std::map<AccountId, TokenAmount>& m) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [a, amount] : m) out[who(r, a)] = amount.value();
  return out;
}

nlohmann::json marks_by_node(const Replay& r, const std::map<AccountId, Misbehavior>& m) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [a, reason] : m) out[who(r, a)] = to_string(reason);
  return out;
}

nlohmann::json tournament_report(const Replay& r, const TournamentState& t) {
  nlohmann::json j;
  j["index"] = t.index;
  j["phase"] = to_string(t.phase);
  j["pool"] = t.pool.value();
  nlohmann::json ranking = nlohmann::json::array();
  if (t.result) {
    for (const auto& e : *t.result) {
      const auto p = t.participants.find(e.agent);
      ranking.push_back({{"agent", e.agent.hex()},
                         {"owner", p == t.participants.end() ? "" : who(r, p->second.owner)},
                         {"score", e.score.str()}});
    }
  }
  j["ranking"] = std::move(ranking);
  j["payouts"] = amounts_by_node(r, t.payouts);
  j["refunds"] = amounts_by_node(r, t.refunds);
  j["carriedForward"] = t.carried_forward.value();
  j["disqualifiedMiners"] = marks_by_node(r, t.disqualified_miners);
  j["disqualifiedChallengers"] = marks_by_node(r, t.disqualified_challengers);
  nlohmann::json challengers = nlohmann::json::array();
  if (t.challengers) {
    for (const auto& a : t.challengers->members) challengers.push_back(who(r, a));
  }
  j["challengers"] = std::move(challengers);
  return j;
}

std::string tournament_text(const Replay& r, const TournamentState& t) {
  std::ostringstream out;
  out << "tournament " << t.index << " phase=" << to_string(t.phase) << " pool=" << t.pool.value() << "\n";
  if (t.result) {
    std::size_t place = 1;
    for (const auto& e : *t.result) {
      const auto p = t.participants.find(e.agent);
      out << "rank " << place++ << " agent=" << e.agent.hex()
          << " owner=" << (p == t.participants.end() ? "?" : who(r, p->second.owner)) << " score=" << e.score.str()
          << "\n";
    }
  }
  for (const auto& [name, amount] : by_name(r, t.payouts)) out << "payout " << name << " " << amount.value() << "\n";
  for (const auto& [name, amount] : by_name(r, t.refunds)) out << "refund " << name << " " << amount.value() << "\n";
  out << "carried_forward " << t.carried_forward.value() << "\n";
  for (const auto& [name, m] : by_name(r, t.disqualified_miners)) {
    out << "disqualified miner " << name << " " << to_string(m) << "\n";
  }
  for (const auto& [name, m] : by_name(r, t.disqualified_challengers)) {
    out << "disqualified challenger " << name << " " << to_string(m) << "\n";
  }
  return out.str();
}

}  // namespace

Replay replay_log(const std::vector<std::string>& lines) {
  Replay r;
  try {
    replay_records(r, lines);
  } catch (const Violation& v) {
    r.violation = v.what;
  }
  return r;
}

std::vector<std::string> read_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open event log '" + path + "'");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  return lines;
}

nlohmann::json build_report(const Replay& r, const std::string& event_log) {
  nlohmann::json j;
  if (r.scenario) {
    const std::string sc = scenario_to_json(*r.scenario).dump();
    j["scenario"] = r.scenario->name;
    j["seed"] = r.scenario->rng_seed;
    j["scenarioDigest"] = to_hex(sha256(Bytes(sc.begin(), sc.end())));
  }
  nlohmann::json tournaments = nlohmann::json::array();
  for (const auto& [k, t] : r.chain.tournaments) tournaments.push_back(tournament_report(r, t));
  j["tournaments"] = std::move(tournaments);

  const LedgerState& l = r.chain.ledger;
  nlohmann::json accounts = nlohmann::json::object();
  for (const auto& [a, name] : r.names) {
    const auto s = l.stakes.find(a);
    accounts[name] = {{"balance", l.balance(a).value()},
                      {"stake", s == l.stakes.end() ? 0 : s->second.amount.value()}};
  }
  j["ledger"] = {{"accounts", accounts},
                 {"currentRewardPool", l.current_reward_pool.value()},
                 {"nextRewardPool", l.next_reward_pool.value()},
                 {"totalSupply", l.total_supply.value()},
                 {"accountedSupply", accounted_supply(l).value()}};

  const std::string violated = r.violation ? r.violation->substr(0, r.violation->find(':')) : "";
  nlohmann::json inv = nlohmann::json::object();
  for (const char* name : {"integrity", "consensus", "replication", "conservation", "liveness"}) {
    inv[name] = violated == name ? "fail" : "pass";
  }
  j["invariants"] = inv;
  j["violation"] = r.violation ? nlohmann::json(*r.violation) : nlohmann::json(nullptr);
  j["blocks"] = r.blocks;
  j["rejectedRounds"] = r.rejected_rounds;
  j["eventLog"] = event_log;
  return j;
}

std::string inspect(const Replay& r, const std::string& query) {
  std::ostringstream out;
  if (query == "balances") {
    const LedgerState& l = r.chain.ledger;
    std::map<std::string, AccountId> accounts;
    for (const auto& [a, name] : r.names) accounts.emplace(name, a);
    for (const auto& [name, a] : accounts) {
      const auto s = l.stakes.find(a);
      out << name << " balance=" << l.balance(a).value()
          << " stake=" << (s == l.stakes.end() ? 0 : s->second.amount.value()) << "\n";
    }
    out << "current_reward_pool " << l.current_reward_pool.value() << "\n";
    out << "next_reward_pool " << l.next_reward_pool.value() << "\n";
    out << "accounted_supply " << accounted_supply(l).value() << "\n";
    out << "total_supply " << l.total_supply.value() << "\n";
    out << "conserved " << (is_conserved(l) ? "yes" : "no") << "\n";
    return out.str();
  }
  if (query == "disqualifications") {
    for (const auto& [k, t] : r.chain.tournaments) {
      for (const auto& [name, m] : by_name(r, t.disqualified_miners)) {
        out << "tournament " << k << " miner " << name << " " << to_string(m) << "\n";
      }
      for (const auto& [name, m] : by_name(r, t.disqualified_challengers)) {
        out << "tournament " << k << " challenger " << name << " " << to_string(m) << "\n";
      }
    }
    return out.str();
  }
  const std::string prefix = "tournament ";
  if (query.rfind(prefix, 0) == 0 && query.size() > prefix.size()) {
    const std::string num = query.substr(prefix.size());
    if (num.find_first_not_of("0123456789") == std::string::npos && num.size() <= 18) {
      const TournamentState* t = r.chain.find_tournament(std::stoull(num));
      if (!t) return "tournament " + num + " not started\n";
      return tournament_text(r, *t);
    }
  }
  throw std::invalid_argument("unknown query '" + query + "'");
}

}  // namespace scynet
