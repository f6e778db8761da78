#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scynet/types.hpp"

namespace scynet {

enum class ProblemType { RealTime, Dataset };
const char* to_string(ProblemType t);

/// Domain parameters. Optional fields are present only for the problem type
/// that uses them.
struct DomainConfig {
  Duration tournament_start_frequency = 0;
  Duration proposer_deadline = 0;
  Duration time_tolerance = 0;
  ProblemType problem_type = ProblemType::RealTime;
  std::optional<Duration> real_time_frequency;
  std::optional<Duration> dataset_submission_deadline;
  std::optional<std::uint64_t> min_agent_challengers;
  std::optional<Rational> min_agent_challenger_voting_power;
  TokenAmount agent_submission_fee;
  TokenAmount data_publish_fee;
  TokenAmount price_publish_fee;
  TokenAmount rent_fee;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& why)
      : std::runtime_error("ConfigError(" + field + "): " + why), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class ScheduleErrc { WrongDomainType };
const char* to_string(ScheduleErrc c);
using ScheduleError = CodedError<ScheduleErrc>;

/// A DomainConfig whose invariants have been checked. Only validate_config
/// constructs one.
class ValidatedConfig {
 public:
  const DomainConfig& get() const noexcept { return cfg_; }
  const DomainConfig* operator->() const noexcept { return &cfg_; }
  const DomainConfig& operator*() const noexcept { return cfg_; }

  bool is_realtime() const noexcept { return cfg_.problem_type == ProblemType::RealTime; }
  bool is_dataset() const noexcept { return cfg_.problem_type == ProblemType::Dataset; }

 private:
  friend ValidatedConfig validate_config(const DomainConfig& cfg);
  explicit ValidatedConfig(DomainConfig cfg) : cfg_(std::move(cfg)) {}
  DomainConfig cfg_;
};

ValidatedConfig validate_config(const DomainConfig& cfg);
inline ValidatedConfig validate_config(const ValidatedConfig& cfg) { return cfg; }

struct Window {
  Timestamp start = 0;
  Timestamp end = 0;
  bool operator==(const Window&) const = default;
};

/// Epoch-anchored; `end` is the next tournament's `start`.
Window tournament_window(const ValidatedConfig& cfg, std::uint64_t index);

/// Index of the tournament whose window contains t (t >= 0).
std::uint64_t tournament_index_at(const ValidatedConfig& cfg, Timestamp t);

/// Multiples of realTimeFrequency in [start, end), ascending.
std::vector<Timestamp> realtime_ticks(const ValidatedConfig& cfg, std::uint64_t index);

/// |observed - deadline| <= timeTolerance.
bool within_tolerance(const ValidatedConfig& cfg, Timestamp deadline, Timestamp observed);

/// Scenario-file form. Durations are integers in milliseconds, the voting
/// power share is a "num/den" string.
nlohmann::json config_to_json(const DomainConfig& cfg);
DomainConfig config_from_json(const nlohmann::json& j);

}  // namespace scynet
