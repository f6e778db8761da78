#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scynet/chain.hpp"
#include "scynet/sim.hpp"

namespace scynet {

/// Reconstruction of a run from its event log alone.
struct Replay {
  std::optional<Scenario> scenario;
  ChainState chain;
  std::map<AccountId, std::string> names;
  std::uint64_t blocks = 0;
  std::uint64_t rejected_rounds = 0;
  std::uint64_t records = 0;
  /// First violated invariant: "<invariant>: <detail>".
  std::optional<std::string> violation;
};

/// Verifies the hash chain, re-executes every committed block against a fresh
/// state machine, and checks votes, digests, conservation and completeness.
/// Never throws on bad content; problems are reported through `violation`.
Replay replay_log(const std::vector<std::string>& lines);

/// Reads a log file line by line. Throws std::runtime_error if unreadable.
std::vector<std::string> read_log(const std::string& path);

nlohmann::json build_report(const Replay& r, const std::string& event_log);

/// Canonical text for `balances`, `disqualifications` or `tournament N`.
/// Throws std::invalid_argument on an unknown query.
std::string inspect(const Replay& r, const std::string& query);

}  // namespace scynet
