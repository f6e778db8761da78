#include "scynet/sim.hpp"

#include <fstream>
#include <future>
#include <queue>
#include <set>

#include "scynet/codec.hpp"
#include "scynet/roles.hpp"
#include "scynet/rng.hpp"
#include "scynet/state_machine.hpp"

namespace scynet {

const char* to_string(FaultType f) {
  switch (f) {
    case FaultType::DelayTx: return "DelayTx";
    case FaultType::DropTx: return "DropTx";
    case FaultType::SpamTx: return "SpamTx";
    case FaultType::CorruptDataset: return "CorruptDataset";
    case FaultType::LeakOutputs: return "LeakOutputs";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Scenario files

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw ScenarioError("scenario field '" + field + "': " + why);
}

void only_keys(const nlohmann::json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(where, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) bad(where + "." + key, "unknown field");
  }
}

std::uint64_t get_uint(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) bad(where + "." + key, "missing");
  if (!j[key].is_number_unsigned() && !(j[key].is_number_integer() && j[key].get<std::int64_t>() >= 0)) {
    bad(where + "." + key, "expected a non-negative integer");
  }
  return j[key].get<std::uint64_t>();
}

std::uint64_t get_uint_or(const nlohmann::json& j, const std::string& key, const std::string& where,
                          std::uint64_t fallback) {
  return j.contains(key) ? get_uint(j, key, where) : fallback;
}

std::string get_string(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string()) bad(where + "." + key, "expected a string");
  return j[key].get<std::string>();
}

Rational get_fraction(const nlohmann::json& j, const std::string& key, const std::string& where, Rational fallback) {
  if (!j.contains(key)) return fallback;
  try {
    const Rational r = Rational::parse(get_string(j, key, where));
    if (r.den == 0 || r.num > r.den) bad(where + "." + key, "fraction outside [0, 1]");
    return r;
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    bad(where + "." + key, e.what());
  }
}

TxKind get_kind(const nlohmann::json& j, const std::string& where) {
  try {
    return tx_kind_from_string(get_string(j, "kind", where));
  } catch (const std::invalid_argument& e) {
    bad(where + ".kind", e.what());
  }
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& j) {
  only_keys(j, "scenario",
            {"name", "rngSeed", "tournaments", "domain", "network", "truth", "dataset", "nodes", "faults", "actions"});
  Scenario s;
  s.name = get_string(j, "name", "scenario");
  s.rng_seed = get_uint(j, "rngSeed", "scenario");
  s.tournaments = get_uint(j, "tournaments", "scenario");
  if (s.tournaments < 1) bad("tournaments", "must be at least 1");

  if (!j.contains("domain")) bad("domain", "missing");
  try {
    s.domain = config_from_json(j["domain"]);
    validate_config(s.domain);
  } catch (const ConfigError& e) {
    bad("domain." + e.field(), e.what());
  }
  const bool realtime = s.domain.problem_type == ProblemType::RealTime;

  if (j.contains("network")) {
    const auto& n = j["network"];
    only_keys(n, "network",
              {"minLatency", "maxLatency", "dropRate", "blockLag", "mempoolInterval", "roundTimeout"});
    NetworkParams& p = s.network;
    p.min_latency = static_cast<Duration>(get_uint_or(n, "minLatency", "network", p.min_latency));
    p.max_latency = static_cast<Duration>(get_uint_or(n, "maxLatency", "network", p.max_latency));
    p.drop_rate = get_fraction(n, "dropRate", "network", p.drop_rate);
    p.block_lag = static_cast<Duration>(get_uint_or(n, "blockLag", "network", p.block_lag));
    p.mempool_interval = static_cast<Duration>(get_uint_or(n, "mempoolInterval", "network", p.mempool_interval));
    p.round_timeout = static_cast<Duration>(get_uint_or(n, "roundTimeout", "network", p.round_timeout));
  }
  const NetworkParams& p = s.network;
  if (p.min_latency > p.max_latency) bad("network.minLatency", "exceeds maxLatency");
  if (p.block_lag <= p.max_latency) bad("network.blockLag", "must exceed maxLatency");
  if (p.block_lag > s.domain.time_tolerance) bad("network.blockLag", "must not exceed domain.timeTolerance");
  if (p.mempool_interval <= 0) bad("network.mempoolInterval", "must be positive");
  if (p.round_timeout <= 0) bad("network.roundTimeout", "must be positive");

  if (j.contains("truth")) {
    only_keys(j["truth"], "truth", {"bias"});
    s.truth_bias = get_fraction(j["truth"], "bias", "truth", s.truth_bias);
  }
  if (j.contains("dataset")) {
    only_keys(j["dataset"], "dataset", {"size", "balance"});
    s.dataset_size = get_uint_or(j["dataset"], "size", "dataset", s.dataset_size);
    s.dataset_balance = get_fraction(j["dataset"], "balance", "dataset", s.dataset_balance);
    if (s.dataset_size < 1) bad("dataset.size", "must be at least 1");
  }

  if (!j.contains("nodes") || !j["nodes"].is_array() || j["nodes"].empty()) bad("nodes", "expected a non-empty array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < j["nodes"].size(); ++i) {
    const auto& n = j["nodes"][i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    only_keys(n, where, {"id", "balance", "stake", "agent", "denyService"});
    NodeSpec spec;
    spec.id = get_string(n, "id", where);
    if (!ids.insert(spec.id).second) bad(where + ".id", "duplicate node id '" + spec.id + "'");
    spec.balance = TokenAmount(get_uint(n, "balance", where));
    spec.stake = TokenAmount(get_uint_or(n, "stake", where, 0));
    if (spec.stake > spec.balance) bad(where + ".stake", "exceeds balance");
    if (n.contains("agent")) {
      try {
        spec.agent = agent_from_json(n["agent"]);
      } catch (const ToyError& e) {
        bad(where + ".agent", e.what());
      }
    }
    if (n.contains("denyService")) {
      if (!n["denyService"].is_boolean()) bad(where + ".denyService", "expected a boolean");
      spec.deny_service = n["denyService"].get<bool>();
    }
    s.nodes.push_back(std::move(spec));
  }
  bool any_stake = false;
  for (const auto& n : s.nodes) any_stake = any_stake || !n.stake.is_zero();
  if (!any_stake) bad("nodes", "at least one node must stake");
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    const auto& a = s.nodes[i].agent;
    if (!a || a->behavior != AgentBehavior::Copycat) continue;
    const std::string where = "nodes[" + std::to_string(i) + "].agent.target";
    if (!realtime) bad(where, "Copycat agents need a RealTime domain");
    if (!ids.count(a->copy_target)) bad(where, "UnknownTarget '" + a->copy_target + "'");
  }

  auto require_node = [&](const std::string& id, const std::string& where) {
    if (!ids.count(id)) bad(where, "UnknownTarget '" + id + "'");
  };

  if (j.contains("faults")) {
    if (!j["faults"].is_array()) bad("faults", "expected an array");
    for (std::size_t i = 0; i < j["faults"].size(); ++i) {
      const auto& f = j["faults"][i];
      const std::string where = "faults[" + std::to_string(i) + "]";
      FaultSpec spec;
      const std::string type = get_string(f, "type", where);
      if (type == "DelayTx") {
        only_keys(f, where, {"type", "node", "kind", "by", "tournament"});
        spec.type = FaultType::DelayTx;
        spec.kind = get_kind(f, where);
        spec.by = static_cast<Duration>(get_uint(f, "by", where));
      } else if (type == "DropTx") {
        only_keys(f, where, {"type", "node", "kind", "tournament"});
        spec.type = FaultType::DropTx;
        spec.kind = get_kind(f, where);
      } else if (type == "SpamTx") {
        only_keys(f, where, {"type", "node", "kind", "count", "at"});
        spec.type = FaultType::SpamTx;
        spec.kind = get_kind(f, where);
        if (*spec.kind != TxKind::Rent && *spec.kind != TxKind::SubmitAgent) {
          bad(where + ".kind", "spam supports Rent and SubmitAgent");
        }
        spec.count = get_uint(f, "count", where);
        spec.at = static_cast<Timestamp>(get_uint(f, "at", where));
      } else if (type == "CorruptDataset") {
        only_keys(f, where, {"type", "node", "tournament"});
        spec.type = FaultType::CorruptDataset;
        if (realtime) bad(where, "CorruptDataset needs a Dataset domain");
      } else if (type == "LeakOutputs") {
        only_keys(f, where, {"type", "node", "toMiner", "tournament"});
        spec.type = FaultType::LeakOutputs;
        spec.to_miner = get_string(f, "toMiner", where);
        require_node(spec.to_miner, where + ".toMiner");
        if (realtime) bad(where, "LeakOutputs needs a Dataset domain");
      } else {
        bad(where + ".type", "unknown fault '" + type + "'");
      }
      spec.node = get_string(f, "node", where);
      require_node(spec.node, where + ".node");
      if (f.contains("tournament")) spec.tournament = get_uint(f, "tournament", where);
      s.faults.push_back(std::move(spec));
    }
  }

  if (j.contains("actions")) {
    if (!j["actions"].is_array()) bad("actions", "expected an array");
    for (std::size_t i = 0; i < j["actions"].size(); ++i) {
      const auto& a = j["actions"][i];
      const std::string where = "actions[" + std::to_string(i) + "]";
      ActionSpec spec;
      const std::string type = get_string(a, "type", where);
      auto scheme = [&] {
        try {
          return price_scheme_from_string(get_string(a, "scheme", where));
        } catch (const std::invalid_argument& e) {
          bad(where + ".scheme", e.what());
        }
      };
      if (type == "PublishAgentPrice") {
        only_keys(a, where, {"type", "at", "node", "scheme", "price"});
        spec.type = ActionType::PublishAgentPrice;
        spec.scheme = scheme();
        spec.price = TokenAmount(get_uint(a, "price", where));
      } else if (type == "PublishDataPrice") {
        only_keys(a, where, {"type", "at", "node", "scheme", "price", "params"});
        spec.type = ActionType::PublishDataPrice;
        spec.scheme = scheme();
        spec.price = TokenAmount(get_uint(a, "price", where));
        if (a.contains("params")) {
          try {
            spec.params = from_hex(get_string(a, "params", where));
          } catch (const std::exception& e) {
            bad(where + ".params", e.what());
          }
        }
      } else if (type == "Rent") {
        only_keys(a, where, {"type", "at", "node", "seller", "quantity"});
        spec.type = ActionType::Rent;
        spec.seller = get_string(a, "seller", where);
        require_node(spec.seller, where + ".seller");
        spec.quantity = get_uint(a, "quantity", where);
      } else {
        bad(where + ".type", "unknown action '" + type + "'");
      }
      spec.at = static_cast<Timestamp>(get_uint(a, "at", where));
      spec.node = get_string(a, "node", where);
      require_node(spec.node, where + ".node");
      s.actions.push_back(std::move(spec));
    }
  }
  return s;
}

nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["rngSeed"] = s.rng_seed;
  j["tournaments"] = s.tournaments;
  j["domain"] = config_to_json(s.domain);
  j["network"] = {{"minLatency", s.network.min_latency},
                  {"maxLatency", s.network.max_latency},
                  {"dropRate", s.network.drop_rate.str()},
                  {"blockLag", s.network.block_lag},
                  {"mempoolInterval", s.network.mempool_interval},
                  {"roundTimeout", s.network.round_timeout}};
  j["truth"] = {{"bias", s.truth_bias.str()}};
  j["dataset"] = {{"size", s.dataset_size}, {"balance", s.dataset_balance.str()}};
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : s.nodes) {
    nlohmann::json node{{"id", n.id}, {"balance", n.balance.value()}, {"stake", n.stake.value()}};
    if (n.agent) node["agent"] = agent_to_json(*n.agent);
    if (n.deny_service) node["denyService"] = true;
    nodes.push_back(std::move(node));
  }
  j["nodes"] = std::move(nodes);
  nlohmann::json faults = nlohmann::json::array();
  for (const auto& f : s.faults) {
    nlohmann::json fault{{"type", to_string(f.type)}, {"node", f.node}};
    if (f.kind && f.type != FaultType::CorruptDataset && f.type != FaultType::LeakOutputs) {
      fault["kind"] = to_string(*f.kind);
    }
    if (f.type == FaultType::DelayTx) fault["by"] = f.by;
    if (f.type == FaultType::SpamTx) {
      fault["count"] = f.count;
      fault["at"] = f.at;
    }
    if (f.type == FaultType::LeakOutputs) fault["toMiner"] = f.to_miner;
    if (f.tournament) fault["tournament"] = *f.tournament;
    faults.push_back(std::move(fault));
  }
  j["faults"] = std::move(faults);
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& a : s.actions) {
    nlohmann::json action{{"at", a.at}, {"node", a.node}};
    switch (a.type) {
      case ActionType::PublishAgentPrice:
        action["type"] = "PublishAgentPrice";
        action["scheme"] = to_string(a.scheme);
        action["price"] = a.price.value();
        break;
      case ActionType::PublishDataPrice:
        action["type"] = "PublishDataPrice";
        action["scheme"] = to_string(a.scheme);
        action["price"] = a.price.value();
        action["params"] = to_hex(a.params);
        break;
      case ActionType::Rent:
        action["type"] = "Rent";
        action["seller"] = a.seller;
        action["quantity"] = a.quantity;
        break;
    }
    actions.push_back(std::move(action));
  }
  j["actions"] = std::move(actions);
  return j;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError("scenario file '" + path + "' is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

namespace {

Bytes be64(std::uint64_t v) {
  ByteWriter w;
  w.u64(v);
  return std::move(w).take();
}

Bytes text_bytes(std::string_view s) { return {s.begin(), s.end()}; }

}  // namespace

KeyPair node_keypair(std::uint64_t rng_seed, const std::string& node_id) {
  return keygen(tagged_digest("scynet/node-key", {be64(rng_seed), text_bytes(node_id)}));
}

Digest truth_seed(std::uint64_t rng_seed) { return tagged_digest("scynet/truth-seed", {be64(rng_seed)}); }

ChainState scenario_genesis(const Scenario& scenario) {
  std::vector<GenesisAccount> accounts;
  for (const auto& n : scenario.nodes) {
    accounts.push_back({node_keypair(scenario.rng_seed, n.id).public_key(), n.balance, n.stake});
  }
  return chain_genesis(accounts, 0);
}

std::string chain_link(const std::string& prev_link, const std::string& body) {
  const Bytes prev = text_bytes(prev_link);
  const Bytes text = text_bytes(body);
  return to_hex(tagged_digest("scynet/log", {prev, text}));
}

void append_record(std::vector<std::string>& log, nlohmann::json record) {
  std::string prev;
  if (!log.empty()) prev = nlohmann::json::parse(log.back())["h"].get<std::string>();
  record["seq"] = log.size();
  const std::string link = chain_link(prev, record.dump());
  record["h"] = link;
  log.push_back(record.dump());
}

// ---------------------------------------------------------------------------
// Simulator

namespace {

constexpr std::uint64_t kMaxRounds = 64;

enum class EventKind { Timer, Send, Deliver, Round, Action, Spam };

struct Event {
  Timestamp time = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Timer;
  std::size_t node = 0;
  std::optional<Transaction> tx;
  std::uint64_t round = 0;
  std::size_t index = 0;  ///< action / fault index
  bool spam = false;

  bool operator>(const Event& o) const { return std::tie(time, seq) > std::tie(o.time, o.seq); }
};

class Simulator {
 public:
  Simulator(const Scenario& sc, const SimOptions& opt)
      : sc_(sc),
        opt_(opt),
        cfg_(validate_config(sc.domain)),
        oracle_(TruthStream(truth_seed(sc.rng_seed), sc.truth_bias)),
        env_{&cfg_, &oracle_, &blobs_},
        net_rng_(tagged_digest("scynet/network", {be64(sc.rng_seed)})),
        spam_rng_(tagged_digest("scynet/spam-network", {be64(sc.rng_seed)})) {
    for (std::size_t i = 0; i < sc.nodes.size(); ++i) {
      keys_.push_back(node_keypair(sc.rng_seed, sc.nodes[i].id));
      accounts_.push_back(keys_.back().account());
      index_[sc.nodes[i].id] = i;
    }
    const ChainState g = scenario_genesis(sc);
    for (std::size_t i = 0; i < sc.nodes.size(); ++i) {
      const NodeSpec& n = sc.nodes[i];
      nodes_.emplace_back(env_, g, keys_[i]);
      RoleConfig roles;
      roles.agent = n.agent;
      if (n.agent && n.agent->behavior == AgentBehavior::Copycat) roles.copy_target = accounts_[index_.at(n.agent->copy_target)];
      roles.last_tournament = sc.tournaments;
      roles.dataset_size = sc.dataset_size;
      roles.dataset_balance = sc.dataset_balance;
      for (const auto& f : sc.faults) {
        if (f.type != FaultType::CorruptDataset || f.node != n.id) continue;
        if (f.tournament) {
          roles.corrupt_datasets.insert(*f.tournament);
        } else {
          roles.corrupt_all_datasets = true;
        }
      }
      runtimes_.emplace_back(roles, tagged_digest("scynet/node-seed", {be64(sc.rng_seed), text_bytes(n.id)}));
    }
    const Window last = tournament_window(cfg_, sc.tournaments);
    horizon_ = last.end + sc.domain.proposer_deadline + 16 * sc.network.round_timeout;
  }

  SimResult run() {
    record({{"type", "scenario"}, {"t", 0}, {"scenario", scenario_to_json(sc_)}});
    schedule_timers();
    while (!queue_.empty() && !violation_) {
      Event e = queue_.top();
      queue_.pop();
      if (e.time > horizon_) break;
      now_ = e.time;
      switch (e.kind) {
        case EventKind::Timer: duties(e.time); break;
        case EventKind::Send: send(e.node, *e.tx, e.spam); break;
        case EventKind::Deliver: deliver(e.node, *e.tx); break;
        case EventKind::Round: round(e.time, e.round, e.index); break;
        case EventKind::Action: action(sc_.actions[e.index]); break;
        case EventKind::Spam: spam(sc_.faults[e.index]); break;
      }
    }
    if (!violation_) check_settled();
    const ChainState& chain = nodes_.front().chain();
    record({{"type", "end"},
            {"t", chain.time},
            {"height", chain.height},
            {"digest", to_hex(nodes_.front().digest())},
            {"violation", violation_ ? *violation_ : ""}});

    SimResult out;
    out.log = std::move(log_);
    for (std::size_t i = 0; i < nodes_.size(); ++i) out.final_digests[sc_.nodes[i].id] = nodes_[i].digest();
    out.violation = violation_;
    return out;
  }

 private:
  void push(Event e) {
    e.seq = next_seq_++;
    queue_.push(std::move(e));
  }

  void record(nlohmann::json r) { append_record(log_, std::move(r)); }

  /// `retry` > 0 re-attempts height `height` after a rejection.
  void schedule_round(Timestamp t, std::uint64_t retry = 0, std::uint64_t height = 0) {
    if (retry == 0 && !rounds_pending_.insert(t).second) return;
    push(Event{t, 0, EventKind::Round, 0, std::nullopt, retry, height});
  }

  void schedule_timers() {
    const std::uint64_t last = sc_.tournaments;
    const Duration lag = sc_.network.block_lag;
    push(Event{0, 0, EventKind::Timer, 0, std::nullopt});
    if (cfg_.is_realtime()) {
      const Duration step = *cfg_->real_time_frequency;
      for (Timestamp t = 0; t <= tournament_window(cfg_, last).end; t += step) {
        push(Event{t, 0, EventKind::Timer, 0, std::nullopt});
        schedule_round(t + lag);
      }
    } else {
      for (std::uint64_t k = 0; k <= last; ++k) {
        const Window w = tournament_window(cfg_, k);
        const Timestamp deadline = w.start + *cfg_->dataset_submission_deadline;
        for (Timestamp t : {w.start, deadline, w.end}) {
          push(Event{t, 0, EventKind::Timer, 0, std::nullopt});
          schedule_round(t + lag);
        }
      }
    }
    for (std::uint64_t k = 0; k <= last; ++k) {
      schedule_round(tournament_window(cfg_, k).end + cfg_->proposer_deadline);
    }
    for (std::size_t i = 0; i < sc_.actions.size(); ++i) {
      push(Event{sc_.actions[i].at, 0, EventKind::Action, 0, std::nullopt, 0, i});
    }
    for (std::size_t i = 0; i < sc_.faults.size(); ++i) {
      if (sc_.faults[i].type == FaultType::SpamTx) push(Event{sc_.faults[i].at, 0, EventKind::Spam, 0, std::nullopt, 0, i});
    }
  }

  // Reveals are sent at or after the window boundary, so a transaction's
  // tournament is read from its content rather than its send time.
  std::uint64_t tournament_of(std::size_t node, const Transaction& tx, Timestamp t) const {
    const ChainState& chain = nodes_[node].chain();
    const auto agent_tournament = [&](const Uuid& u) {
      const auto it = chain.agents.find(u);
      return it == chain.agents.end() ? tournament_index_at(cfg_, t) : it->second.tournament;
    };
    if (std::holds_alternative<SubmitAgentBody>(tx.body)) return tournament_index_at(cfg_, t) + 1;
    if (const auto* b = std::get_if<SubmitSignalBody>(&tx.body)) return agent_tournament(b->agent);
    if (const auto* b = std::get_if<PublishSignalKeyBody>(&tx.body)) return agent_tournament(b->agent);
    if (std::holds_alternative<PublishDatasetKeyBody>(tx.body)) {
      const Duration freq = cfg_->tournament_start_frequency;
      const auto boundary = static_cast<std::uint64_t>((t + freq / 2) / freq);
      return boundary == 0 ? 0 : boundary - 1;
    }
    return tournament_index_at(cfg_, t);
  }

  bool fault_applies(const FaultSpec& f, std::size_t node, const Transaction& tx, Timestamp t) const {
    if (f.node != sc_.nodes[node].id || !f.kind || *f.kind != tx.kind()) return false;
    return !f.tournament || tournament_of(node, tx, t) == *f.tournament;
  }

  void dispatch(std::size_t node, Transaction tx, Timestamp send_at) {
    for (const auto& f : sc_.faults) {
      if (!fault_applies(f, node, tx, send_at)) continue;
      if (f.type == FaultType::DropTx) {
        record({{"type", "fault"}, {"t", now_}, {"fault", "DropTx"}, {"node", sc_.nodes[node].id},
                {"kind", to_string(tx.kind())}});
        return;
      }
      if (f.type == FaultType::DelayTx) {
        send_at += f.by;
        record({{"type", "fault"}, {"t", now_}, {"fault", "DelayTx"}, {"node", sc_.nodes[node].id},
                {"kind", to_string(tx.kind())}, {"until", send_at}});
      }
    }
    push(Event{std::max(send_at, now_), 0, EventKind::Send, node, std::move(tx)});
  }

  void duties(Timestamp t) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      std::vector<PublishedBlob> published;
      auto planned = runtimes_[i].obligations(nodes_[i], env_, t, blobs_, published);
      for (auto& b : published) {
        record({{"type", "blob"}, {"t", t}, {"node", sc_.nodes[i].id}, {"ref", to_hex(b.ref)},
                {"content", to_hex(b.content)}});
      }
      for (auto& p : planned) dispatch(i, std::move(p.tx), p.send_at);
      leak_outputs(i, t);
    }
  }

  void leak_outputs(std::size_t challenger, Timestamp t) {
    const std::uint64_t k = tournament_index_at(cfg_, t);
    const std::vector<bool>* outputs = runtimes_[challenger].dataset_outputs(k);
    if (!outputs) return;
    for (const auto& f : sc_.faults) {
      if (f.type != FaultType::LeakOutputs || f.node != sc_.nodes[challenger].id) continue;
      if (f.tournament && *f.tournament != k) continue;
      if (!leaked_.insert({challenger, k}).second) return;
      const std::size_t miner = index_.at(f.to_miner);
      runtimes_[miner].receive_leak(k, accounts_[challenger], *outputs);
      record({{"type", "leak"}, {"t", t}, {"tournament", k}, {"challenger", f.node}, {"miner", f.to_miner}});
    }
  }

  // Spam draws latencies from its own stream so honest traffic is unaffected.
  void send(std::size_t from, const Transaction& tx, bool is_spam) {
    DigestRng& rng = is_spam ? spam_rng_ : net_rng_;
    record({{"type", "send"}, {"t", now_}, {"node", sc_.nodes[from].id}, {"kind", to_string(tx.kind())},
            {"tx", to_hex(encode_tx(tx))}});
    for (std::size_t to = 0; to < nodes_.size(); ++to) {
      if (to == from) {
        deliver(to, tx);
        continue;
      }
      if (rng.bernoulli(sc_.network.drop_rate)) {
        record({{"type", "lost"}, {"t", now_}, {"node", sc_.nodes[to].id}, {"tx", to_hex(tx_digest(tx))}});
        continue;
      }
      const auto spread = static_cast<std::uint64_t>(sc_.network.max_latency - sc_.network.min_latency) + 1;
      const auto latency = sc_.network.min_latency + static_cast<Duration>(rng.uniform_below(spread));
      push(Event{now_ + latency, 0, EventKind::Deliver, to, tx});
    }
  }

  void deliver(std::size_t to, const Transaction& tx) {
    const auto reason = nodes_[to].ingest(tx, now_);
    nlohmann::json r{{"type", "ingest"}, {"t", now_}, {"node", sc_.nodes[to].id}, {"tx", to_hex(tx_digest(tx))},
                     {"ok", !reason}};
    if (reason) r["reason"] = *reason;
    record(std::move(r));
    if (reason) return;
    const Timestamp due = now_ + sc_.network.mempool_interval;
    const auto it = rounds_pending_.lower_bound(now_);
    if (it == rounds_pending_.end() || *it > due) schedule_round(due);
  }

  bool omits_resolution(std::size_t node) const {
    for (const auto& f : sc_.faults) {
      if (f.type != FaultType::DropTx || f.node != sc_.nodes[node].id || !f.kind) continue;
      if (*f.kind == TxKind::PublishTournamentRanking || *f.kind == TxKind::TournamentFailure) return true;
    }
    return false;
  }

  // Rounds at one height share a counter, so any round after a rejection
  // moves on to a different proposer draw.
  void round(Timestamp t, std::uint64_t retry, std::uint64_t height) {
    if (retry == 0) rounds_pending_.erase(t);
    const std::uint64_t round_no = round_;
    const ChainState& chain = nodes_.front().chain();
    if (retry > 0 && height != chain.height + 1) return;
    const Timestamp ts = std::max(t, chain.time + 1);

    std::size_t proposer = 0;
    try {
      const AccountId who = expected_proposer(chain, ts, round_no);
      proposer = static_cast<std::size_t>(std::find(accounts_.begin(), accounts_.end(), who) - accounts_.begin());
    } catch (const ConsensusError& e) {
      violation_ = std::string("no eligible proposer: ") + e.what();
      return;
    }
    const Block block = nodes_[proposer].propose_block(ts, round_no, omits_resolution(proposer));
    const Digest digest = block_digest(block);
    record({{"type", "propose"}, {"t", ts}, {"node", sc_.nodes[proposer].id}, {"height", block.height},
            {"round", round_no}, {"txs", block.txs.size()}, {"block", to_hex(digest)}});

    const PowerMap powers = network_powers(chain.ledger, ts);
    std::vector<std::optional<Signature>> sigs(nodes_.size());
    std::vector<std::string> reasons(nodes_.size());
    auto cast_vote = [&](std::size_t i) {
      try {
        sigs[i] = nodes_[i].vote(block);
      } catch (const std::exception& e) {
        reasons[i] = e.what();
      }
    };
    std::vector<std::size_t> voters;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto p = powers.find(accounts_[i]);
      if (p != powers.end() && p->second > 0) voters.push_back(i);
    }
    if (opt_.threads > 1) {
      std::vector<std::future<void>> jobs;
      for (std::size_t i : voters) jobs.push_back(std::async(std::launch::async, cast_vote, i));
      for (auto& j : jobs) j.get();
    } else {
      for (std::size_t i : voters) cast_vote(i);
    }

    std::map<AccountId, Signature> votes;
    for (std::size_t i : voters) {
      if (sigs[i]) votes[accounts_[i]] = *sigs[i];
    }
    if (!block_accepted(votes, powers, digest, chain.keys)) {
      nlohmann::json why = nlohmann::json::object();
      for (std::size_t i : voters) {
        if (!reasons[i].empty()) why[sc_.nodes[i].id] = reasons[i];
      }
      record({{"type", "reject"}, {"t", ts}, {"height", block.height}, {"round", round_no}, {"reasons", why}});
      if (++round_ >= kMaxRounds) {
        violation_ = "liveness: no block accepted at height " + std::to_string(block.height);
        return;
      }
      schedule_round(ts + sc_.network.round_timeout, round_, block.height);
      return;
    }
    commit(block, votes, ts);
  }

  void commit(const Block& block, const std::map<AccountId, Signature>& votes, Timestamp ts) {
    round_ = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      try {
        nodes_[i].commit(block);
      } catch (const std::exception& e) {
        violation_ = "replication: node " + sc_.nodes[i].id + " cannot apply accepted block: " + e.what();
        return;
      }
    }
    // The digest is a pure function of the state, so structural equality with
    // the first replica stands in for hashing every replica.
    const Digest d = nodes_.front().digest();
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      if (nodes_[i].chain() != nodes_.front().chain() && nodes_[i].digest() != d) {
        violation_ = "replication: node " + sc_.nodes[i].id + " diverged at height " + std::to_string(block.height);
        return;
      }
    }
    const ChainState& chain = nodes_.front().chain();
    if (!is_conserved(chain.ledger)) {
      violation_ = "conservation: supply mismatch at height " + std::to_string(block.height);
      return;
    }
    nlohmann::json v = nlohmann::json::object();
    for (const auto& [a, sig] : votes) v[a.hex()] = to_hex(sig);
    record({{"type", "commit"}, {"t", ts}, {"height", block.height}, {"round", block.round},
            {"block", to_hex(encode_block(block))}, {"votes", v}, {"digest", to_hex(d)}});

    for (const auto& [k, marks] : local_disqualified(chain)) {
      for (const auto& [account, reason] : marks) {
        if (!marks_seen_.insert({k, account}).second) continue;
        record({{"type", "mark"}, {"t", ts}, {"tournament", k}, {"node", name_of(account)},
                {"reason", to_string(reason)}});
      }
    }
    for (const auto& tx : block.txs) {
      const auto* rent = std::get_if<RentBody>(&tx.body);
      if (!rent) continue;
      const auto listing = chain.listings.find(rent->uuid);
      if (listing == chain.listings.end()) continue;
      const std::size_t seller = index_of(listing->second.seller);
      if (seller < nodes_.size() && sc_.nodes[seller].deny_service) {
        record({{"type", "service_denied"}, {"t", ts}, {"node", sc_.nodes[seller].id},
                {"renter", name_of(tx.sender)}, {"listing", rent->uuid.hex()}});
      }
    }
    duties(ts);
  }

  void action(const ActionSpec& a) {
    const std::size_t i = index_.at(a.node);
    const ChainState& chain = nodes_[i].chain();
    std::optional<TxBody> body;
    switch (a.type) {
      case ActionType::PublishAgentPrice: {
        std::optional<std::pair<std::uint64_t, Uuid>> best;
        for (const auto& [uuid, rec] : chain.agents) {
          if (rec.owner != accounts_[i] || !rec.validated) continue;
          if (!best || rec.tournament > best->first) best = {rec.tournament, uuid};
        }
        if (best) body = PublishAgentPriceBody{best->second, a.scheme, a.price};
        break;
      }
      case ActionType::PublishDataPrice: {
        const Uuid data = Uuid::from_digest(
            tagged_digest("scynet/data", {be64(sc_.rng_seed), text_bytes(a.node), be64(static_cast<std::uint64_t>(a.at))}));
        body = PublishDataPriceBody{data, a.params, a.scheme, a.price};
        break;
      }
      case ActionType::Rent: {
        const AccountId seller = accounts_[index_.at(a.seller)];
        for (const auto& [uuid, l] : chain.listings) {
          if (l.seller == seller) {
            body = RentBody{uuid, a.quantity};
            break;
          }
        }
        break;
      }
    }
    if (!body) {
      record({{"type", "action_skipped"}, {"t", now_}, {"node", a.node}});
      return;
    }
    dispatch(i, nodes_[i].sign(std::move(*body)), now_);
  }

  void spam(const FaultSpec& f) {
    const std::size_t i = index_.at(f.node);
    const NodeState& node = nodes_[i];
    const ChainState& chain = node.chain();
    std::optional<Uuid> listing;
    if (!chain.listings.empty()) listing = chain.listings.begin()->first;
    const Digest spam_seed = tagged_digest("scynet/spam", {be64(sc_.rng_seed), text_bytes(f.node)});
    DigestRng rng(spam_seed);
    for (std::uint64_t c = 0; c < f.count; ++c) {
      Uuid target;
      for (auto& byte : target.bytes) byte = static_cast<std::uint8_t>(rng.next_u64());
      TxBody body;
      if (*f.kind == TxKind::Rent) {
        // Either an unknown listing or a real one priced far beyond any balance.
        body = RentBody{listing && c % 2 == 0 ? *listing : target, std::uint64_t{1} << 62};
      } else {
        body = SubmitAgentBody{target};
      }
      Transaction tx = node.sign_with_sequence(std::move(body), node.next_sequence());
      if (*f.kind == TxKind::SubmitAgent || c % 3 == 2) tx.signature[0] ^= 0x01;  // forged
      push(Event{now_, 0, EventKind::Send, i, std::move(tx), 0, 0, true});
    }
  }

  void check_settled() {
    const ChainState& chain = nodes_.front().chain();
    for (std::uint64_t k = 0; k <= sc_.tournaments; ++k) {
      const TournamentState* t = chain.find_tournament(k);
      if (!t || !t->settled()) {
        violation_ = "liveness: tournament " + std::to_string(k) + " unresolved at end of run";
        return;
      }
    }
  }

  std::size_t index_of(const AccountId& a) const {
    return static_cast<std::size_t>(std::find(accounts_.begin(), accounts_.end(), a) - accounts_.begin());
  }
  std::string name_of(const AccountId& a) const {
    const std::size_t i = index_of(a);
    return i < sc_.nodes.size() ? sc_.nodes[i].id : a.hex();
  }

  const Scenario& sc_;
  SimOptions opt_;
  ValidatedConfig cfg_;
  ToyOracle oracle_;
  BlobStore blobs_;
  ChainEnv env_;
  DigestRng net_rng_;
  DigestRng spam_rng_;

  std::vector<KeyPair> keys_;
  std::vector<AccountId> accounts_;
  std::map<std::string, std::size_t> index_;
  std::vector<NodeState> nodes_;
  std::vector<NodeRuntime> runtimes_;

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t next_seq_ = 0;
  Timestamp now_ = 0;
  Timestamp horizon_ = 0;
  std::uint64_t round_ = 0;
  std::set<Timestamp> rounds_pending_;
  std::set<std::pair<std::size_t, std::uint64_t>> leaked_;
  std::set<std::pair<std::uint64_t, AccountId>> marks_seen_;
  std::vector<std::string> log_;
  std::optional<std::string> violation_;
};

}  // namespace

SimResult run_scenario(const Scenario& scenario, const SimOptions& options) {
  return Simulator(scenario, options).run();
}

}  // namespace scynet
