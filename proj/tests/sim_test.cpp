#include <gtest/gtest.h>

#include <fstream>

#include "scynet/replay.hpp"
#include "scynet/sim.hpp"
#include "support.hpp"

namespace scynet {
namespace {

nlohmann::json bundled(const std::string& name) {
  std::ifstream in(std::string(SCYNET_SCENARIO_DIR) + "/" + name + ".json");
  return nlohmann::json::parse(in);
}

std::string scenario_error(const nlohmann::json& j) {
  try {
    scenario_from_json(j);
  } catch (const ScenarioError& e) {
    return e.what();
  }
  ADD_FAILURE() << "accepted: " << j.dump();
  return "";
}

// One staking validator and three noisy miners over 240 ticks.
nlohmann::json four_nodes() {
  return nlohmann::json::parse(R"({
    "name": "four_nodes", "rngSeed": 11, "tournaments": 1,
    "domain": {"problemType": "RealTime", "tournamentStartFrequency": 1200000,
               "realTimeFrequency": 5000, "proposerDeadline": 10000, "timeTolerance": 2000,
               "agentSubmissionFee": 60, "dataPublishFee": 1, "pricePublishFee": 1, "rentFee": 1},
    "nodes": [
      {"id": "v", "balance": 10000, "stake": 5000},
      {"id": "a", "balance": 1000, "agent": {"behavior": "NoisyOracle", "p": "9/10"}},
      {"id": "b", "balance": 1000, "agent": {"behavior": "NoisyOracle", "p": "7/10"}},
      {"id": "c", "balance": 1000, "agent": {"behavior": "NoisyOracle", "p": "1/2"}}
    ]})");
}

TEST(ScenarioParse, BundledScenariosRoundTrip) {
  for (const char* name : {"happy_realtime", "happy_dataset", "spam", "signal_copying", "service_failure",
                           "agent_submission_failure", "challenger_missed_reveal", "challenger_collapse",
                           "proposer_omits_ranking", "lossy_network", "leak_outputs"}) {
    const Scenario s = scenario_from_json(bundled(name));
    EXPECT_EQ(s.name, name);
    EXPECT_EQ(scenario_to_json(scenario_from_json(scenario_to_json(s))), scenario_to_json(s)) << name;
  }
}

TEST(ScenarioParse, DuplicateNodeIds) {
  nlohmann::json j = four_nodes();
  j["nodes"][2]["id"] = "a";
  EXPECT_NE(scenario_error(j).find("duplicate node id 'a'"), std::string::npos);
}

TEST(ScenarioParse, RejectsInconsistentScripts) {
  nlohmann::json j = four_nodes();
  j["surprise"] = 1;
  EXPECT_NE(scenario_error(j).find("unknown field"), std::string::npos);

  j = four_nodes();
  j["faults"] = {{{"type", "DropTx"}, {"node", "ghost"}, {"kind", "SubmitSignal"}}};
  EXPECT_NE(scenario_error(j).find("UnknownTarget"), std::string::npos);

  j = four_nodes();
  j["faults"] = {{{"type", "CorruptDataset"}, {"node", "v"}}};
  EXPECT_NE(scenario_error(j).find("Dataset domain"), std::string::npos);

  j = four_nodes();
  j["nodes"][0]["stake"] = 0;
  EXPECT_NE(scenario_error(j).find("must stake"), std::string::npos);

  j = four_nodes();
  j["domain"]["realTimeFrequency"] = 7000;
  EXPECT_NE(scenario_error(j).find("domain."), std::string::npos);

  j = four_nodes();
  j["network"] = {{"maxLatency", 5000}};
  EXPECT_NE(scenario_error(j).find("network.blockLag"), std::string::npos);

  j = four_nodes();
  j["nodes"][1]["agent"] = {{"behavior", "Copycat"}, {"target", "nobody"}};
  EXPECT_NE(scenario_error(j).find("UnknownTarget"), std::string::npos);

  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ScenarioError);
}

TEST(RunScenario, FourNodesRankByAccuracy) {
  const Scenario s = scenario_from_json(four_nodes());
  const SimResult r = run_scenario(s);
  ASSERT_FALSE(r.violation) << *r.violation;
  ASSERT_EQ(r.final_digests.size(), 4u);
  for (const auto& [id, d] : r.final_digests) EXPECT_EQ(d, r.final_digests.at("v")) << id;

  const Replay rep = replay_log(r.log);
  ASSERT_FALSE(rep.violation) << *rep.violation;
  const TournamentState& t = rep.chain.tournaments.at(1);
  EXPECT_EQ(t.phase, TournamentPhase::Resolved);
  ASSERT_TRUE(t.result);
  ASSERT_EQ(t.result->size(), 3u);
  std::vector<std::string> order;
  for (const auto& e : *t.result) order.push_back(rep.names.at(t.participants.at(e.agent).owner));
  EXPECT_EQ(order, (std::vector<std::string>{"a", "b", "c"}));
  // 240 ticks per agent, each scored as a reduced fraction of 240.
  for (const auto& e : *t.result) EXPECT_EQ(240 % e.score.den, 0u);
  EXPECT_EQ(t.payouts.size(), 3u);
  EXPECT_EQ(to_hex(state_digest(rep.chain)), to_hex(r.final_digests.at("v")));
}

TEST(RunScenario, ByteIdenticalAcrossRunsAndThreads) {
  const Scenario s = scenario_from_json(bundled("happy_realtime"));
  const SimResult a = run_scenario(s);
  const SimResult b = run_scenario(s);
  const SimResult c = run_scenario(s, SimOptions{4});
  EXPECT_EQ(a.log, b.log);
  EXPECT_EQ(a.log, c.log);
  EXPECT_EQ(a.final_digests, c.final_digests);
}

TEST(RunScenario, SeedChangesTheRun) {
  Scenario s = scenario_from_json(four_nodes());
  const SimResult a = run_scenario(s);
  s.rng_seed = 12;
  const SimResult b = run_scenario(s);
  EXPECT_FALSE(b.violation);
  EXPECT_NE(a.log, b.log);
}

TEST(RunScenario, LogIsOrderedAndHashChained) {
  const SimResult r = run_scenario(scenario_from_json(four_nodes()));
  std::string prev;
  std::int64_t last_t = -1;
  for (std::size_t i = 0; i < r.log.size(); ++i) {
    nlohmann::json rec = nlohmann::json::parse(r.log[i]);
    EXPECT_EQ(rec["seq"], i);
    const std::string h = rec["h"];
    rec.erase("h");
    EXPECT_EQ(chain_link(prev, rec.dump()), h);
    prev = h;
    if (rec.contains("t")) {
      EXPECT_GE(rec["t"].get<std::int64_t>(), last_t) << "record " << i;
      last_t = rec["t"];
    }
  }
  EXPECT_EQ(nlohmann::json::parse(r.log.front())["type"], "scenario");
  EXPECT_EQ(nlohmann::json::parse(r.log.back())["type"], "end");
}

TEST(RunScenario, LeakedOutputsMoveOneDatasetOnly) {
  const Scenario leaky = scenario_from_json(bundled("leak_outputs"));
  Scenario quiet = leaky;
  std::erase_if(quiet.faults, [](const FaultSpec& f) { return f.type == FaultType::LeakOutputs; });
  const Replay a = replay_log(run_scenario(leaky).log);
  const Replay b = replay_log(run_scenario(quiet).log);
  ASSERT_FALSE(a.violation);
  ASSERT_FALSE(b.violation);
  const auto score_of = [](const Replay& r, std::uint64_t k, const std::string& owner) {
    const TournamentState& t = r.chain.tournaments.at(k);
    for (const auto& e : *t.result) {
      if (r.names.at(t.participants.at(e.agent).owner) == owner) return e.score;
    }
    ADD_FAILURE() << owner << " unranked in " << k;
    return Rational{0, 1};
  };
  int raised = 0;
  for (std::uint64_t k = 1; k <= leaky.tournaments; ++k) {
    const TournamentState& t = a.chain.tournaments.at(k);
    const std::uint64_t valid = t.challengers->members.size() - t.disqualified_challengers.size();
    const Rational with = score_of(a, k, "m3"), without = score_of(b, k, "m3");
    EXPECT_GE(with, without) << k;
    // One of `valid` averaged accuracies moves by at most 1.
    // (with - without) * valid <= 1, cross-multiplied.
    const auto wide = [](std::uint64_t x) { return static_cast<unsigned __int128>(x); };
    EXPECT_TRUE((wide(with.num) * without.den - wide(without.num) * with.den) * valid <= wide(with.den) * without.den)
        << k << ": " << with.str() << " vs " << without.str();
    raised += with > without;
    EXPECT_EQ(score_of(a, k, "m1"), score_of(b, k, "m1"));
  }
  EXPECT_GT(raised, 0);
}

// Replay-side checks; the CLI verify command is a thin wrapper over these.
class ReplayChecks : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { log_ = new std::vector<std::string>(run_scenario(scenario_from_json(four_nodes())).log); }
  static void TearDownTestSuite() { delete log_; }
  static std::vector<std::string>* log_;
};
std::vector<std::string>* ReplayChecks::log_ = nullptr;

std::string violation_of(const std::vector<std::string>& log) {
  const Replay r = replay_log(log);
  return r.violation.value_or("");
}

TEST_F(ReplayChecks, UntouchedLogIsClean) {
  const Replay r = replay_log(*log_);
  EXPECT_FALSE(r.violation);
  EXPECT_EQ(r.records, log_->size());
  EXPECT_GT(r.blocks, 0u);
}

TEST_F(ReplayChecks, FlippedByteBreaksIntegrity) {
  for (std::size_t line : {std::size_t{0}, log_->size() / 2, log_->size() - 1}) {
    std::vector<std::string> bad = *log_;
    std::string& l = bad[line];
    const std::size_t at = l.find("\"t\":") != std::string::npos ? l.find("\"t\":") + 4 : l.size() / 2;
    l[at] = l[at] == '1' ? '2' : '1';
    EXPECT_EQ(violation_of(bad).rfind("integrity:", 0), 0u) << violation_of(bad);
  }
}

TEST_F(ReplayChecks, TruncatedLogIsIncomplete) {
  std::vector<std::string> cut(log_->begin(), log_->begin() + static_cast<std::ptrdiff_t>(log_->size() / 2));
  EXPECT_EQ(violation_of(cut).rfind("liveness:", 0), 0u) << violation_of(cut);
  EXPECT_EQ(violation_of({}).rfind("integrity:", 0), 0u);
}

// Rewrites one record and re-links the remainder, so only semantic checks can
// catch the change.
std::vector<std::string> forge(const std::vector<std::string>& log, const std::function<bool(nlohmann::json&)>& edit) {
  std::vector<std::string> out;
  bool done = false;
  for (const auto& line : log) {
    nlohmann::json rec = nlohmann::json::parse(line);
    rec.erase("h");
    rec.erase("seq");
    if (!done) done = edit(rec);
    append_record(out, rec);
  }
  EXPECT_TRUE(done);
  return out;
}

TEST_F(ReplayChecks, RelinkedLogStillClean) { EXPECT_EQ(violation_of(forge(*log_, [](nlohmann::json&) { return true; })), ""); }

TEST_F(ReplayChecks, ForgedDigestIsReplicationFailure) {
  const auto bad = forge(*log_, [](nlohmann::json& rec) {
    if (rec["type"] != "commit") return false;
    std::string d = rec["digest"];
    d[0] = d[0] == 'a' ? 'b' : 'a';
    rec["digest"] = d;
    return true;
  });
  EXPECT_EQ(violation_of(bad).rfind("replication:", 0), 0u) << violation_of(bad);
}

TEST_F(ReplayChecks, MissingVotesIsConsensusFailure) {
  const auto bad = forge(*log_, [](nlohmann::json& rec) {
    if (rec["type"] != "commit") return false;
    rec["votes"] = nlohmann::json::object();
    return true;
  });
  EXPECT_EQ(violation_of(bad).rfind("consensus:", 0), 0u) << violation_of(bad);
}

TEST_F(ReplayChecks, ReportRegeneratesIdentically) {
  const nlohmann::json a = build_report(replay_log(*log_), "events.log");
  const nlohmann::json b = build_report(replay_log(forge(*log_, [](nlohmann::json&) { return true; })), "events.log");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a["invariants"]["conservation"], "pass");
  EXPECT_EQ(a["ledger"]["totalSupply"], a["ledger"]["accountedSupply"]);
}

TEST_F(ReplayChecks, InspectQueries) {
  const Replay r = replay_log(*log_);
  const std::string bal = inspect(r, "balances");
  EXPECT_NE(bal.find("conserved yes"), std::string::npos);
  EXPECT_EQ(bal.rfind("a balance=", 0), 0u);
  const std::string t1 = inspect(r, "tournament 1");
  EXPECT_EQ(t1.rfind("tournament 1 phase=Resolved", 0), 0u);
  EXPECT_NE(t1.find("rank 1 agent="), std::string::npos);
  EXPECT_NE(t1.find("owner=a"), std::string::npos);
  EXPECT_EQ(inspect(r, "tournament 9"), "tournament 9 not started\n");
  EXPECT_TRUE(inspect(r, "disqualifications").empty());
  EXPECT_THROW(inspect(r, "everything"), std::invalid_argument);
  EXPECT_THROW(inspect(r, "tournament x"), std::invalid_argument);
}

}  // namespace
}  // namespace scynet
