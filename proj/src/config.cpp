#include "scynet/config.hpp"

namespace scynet {

const char* to_string(ProblemType t) { return t == ProblemType::RealTime ? "RealTime" : "Dataset"; }

const char* to_string(ScheduleErrc) { return "WrongDomainType"; }

ValidatedConfig validate_config(const DomainConfig& cfg) {
  const Duration freq = cfg.tournament_start_frequency;
  if (freq <= 0) throw ConfigError("tournamentStartFrequency", "must be positive");
  if (cfg.proposer_deadline <= 0) throw ConfigError("proposerDeadline", "must be positive");
  if (cfg.time_tolerance < 0) throw ConfigError("timeTolerance", "must be non-negative");
  // Rankings become computable once every reveal window (end + tolerance) has
  // closed, and must be settled before the next tournament ends.
  if (cfg.proposer_deadline <= cfg.time_tolerance) {
    throw ConfigError("proposerDeadline", "must exceed timeTolerance");
  }
  if (cfg.proposer_deadline >= freq) {
    throw ConfigError("proposerDeadline", "must be shorter than tournamentStartFrequency");
  }

  if (cfg.problem_type == ProblemType::RealTime) {
    if (!cfg.real_time_frequency) throw ConfigError("realTimeFrequency", "required for RealTime");
    if (*cfg.real_time_frequency <= 0) throw ConfigError("realTimeFrequency", "must be positive");
    if (freq % *cfg.real_time_frequency != 0) {
      throw ConfigError("realTimeFrequency", "must divide tournamentStartFrequency");
    }
    if (cfg.dataset_submission_deadline) throw ConfigError("datasetSubmissionDeadline", "Dataset only");
    if (cfg.min_agent_challengers) throw ConfigError("minAgentChallengers", "Dataset only");
    if (cfg.min_agent_challenger_voting_power) {
      throw ConfigError("minAgentChallengerVotingPower", "Dataset only");
    }
  } else {
    if (cfg.real_time_frequency) throw ConfigError("realTimeFrequency", "RealTime only");
    if (!cfg.dataset_submission_deadline) throw ConfigError("datasetSubmissionDeadline", "required for Dataset");
    if (*cfg.dataset_submission_deadline <= 0) {
      throw ConfigError("datasetSubmissionDeadline", "must be positive");
    }
    if (*cfg.dataset_submission_deadline + cfg.time_tolerance >= freq) {
      throw ConfigError("datasetSubmissionDeadline", "deadline plus tolerance must precede tournament end");
    }
    if (!cfg.min_agent_challengers || *cfg.min_agent_challengers < 1) {
      throw ConfigError("minAgentChallengers", "must be at least 1");
    }
    const auto& share = cfg.min_agent_challenger_voting_power;
    if (!share || share->den == 0 || share->num == 0 || share->num > share->den) {
      throw ConfigError("minAgentChallengerVotingPower", "must be a fraction in (0, 1]");
    }
  }
  return ValidatedConfig(cfg);
}

Window tournament_window(const ValidatedConfig& cfg, std::uint64_t index) {
  const Duration freq = cfg->tournament_start_frequency;
  const auto start = static_cast<Timestamp>(index) * freq;
  return {start, start + freq};
}

std::uint64_t tournament_index_at(const ValidatedConfig& cfg, Timestamp t) {
  if (t < 0) return 0;
  return static_cast<std::uint64_t>(t / cfg->tournament_start_frequency);
}

std::vector<Timestamp> realtime_ticks(const ValidatedConfig& cfg, std::uint64_t index) {
  if (!cfg.is_realtime()) throw ScheduleError(ScheduleErrc::WrongDomainType);
  const Window w = tournament_window(cfg, index);
  const Duration step = *cfg->real_time_frequency;
  std::vector<Timestamp> ticks;
  // start is a multiple of step because step divides the tournament frequency.
  for (Timestamp t = w.start; t < w.end; t += step) ticks.push_back(t);
  return ticks;
}

bool within_tolerance(const ValidatedConfig& cfg, Timestamp deadline, Timestamp observed) {
  const Duration delta = observed >= deadline ? observed - deadline : deadline - observed;
  return delta <= cfg->time_tolerance;
}

nlohmann::json config_to_json(const DomainConfig& cfg) {
  nlohmann::json j;
  j["tournamentStartFrequency"] = cfg.tournament_start_frequency;
  j["proposerDeadline"] = cfg.proposer_deadline;
  j["timeTolerance"] = cfg.time_tolerance;
  j["problemType"] = to_string(cfg.problem_type);
  if (cfg.real_time_frequency) j["realTimeFrequency"] = *cfg.real_time_frequency;
  if (cfg.dataset_submission_deadline) j["datasetSubmissionDeadline"] = *cfg.dataset_submission_deadline;
  if (cfg.min_agent_challengers) j["minAgentChallengers"] = *cfg.min_agent_challengers;
  if (cfg.min_agent_challenger_voting_power) {
    j["minAgentChallengerVotingPower"] = cfg.min_agent_challenger_voting_power->str();
  }
  j["agentSubmissionFee"] = cfg.agent_submission_fee.value();
  j["dataPublishFee"] = cfg.data_publish_fee.value();
  j["pricePublishFee"] = cfg.price_publish_fee.value();
  j["rentFee"] = cfg.rent_fee.value();
  return j;
}

DomainConfig config_from_json(const nlohmann::json& j) {
  static const char* const kKnown[] = {
      "tournamentStartFrequency", "proposerDeadline", "timeTolerance", "problemType",
      "realTimeFrequency", "datasetSubmissionDeadline", "minAgentChallengers",
      "minAgentChallengerVotingPower", "agentSubmissionFee", "dataPublishFee", "pricePublishFee",
      "rentFee"};
  if (!j.is_object()) throw ConfigError("domain", "must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
      throw ConfigError(key, "unknown field");
    }
  }
  auto integer = [&](const char* field) -> std::int64_t {
    if (!j.contains(field)) throw ConfigError(field, "missing");
    if (!j.at(field).is_number_integer()) throw ConfigError(field, "must be an integer");
    return j.at(field).get<std::int64_t>();
  };
  auto amount = [&](const char* field) {
    const std::int64_t v = integer(field);
    if (v < 0) throw ConfigError(field, "fees are non-negative");
    return TokenAmount(static_cast<std::uint64_t>(v));
  };

  DomainConfig cfg;
  cfg.tournament_start_frequency = integer("tournamentStartFrequency");
  cfg.proposer_deadline = integer("proposerDeadline");
  cfg.time_tolerance = integer("timeTolerance");
  const std::string type = j.value("problemType", "");
  if (type == "RealTime") {
    cfg.problem_type = ProblemType::RealTime;
  } else if (type == "Dataset") {
    cfg.problem_type = ProblemType::Dataset;
  } else {
    throw ConfigError("problemType", "must be RealTime or Dataset");
  }
  if (j.contains("realTimeFrequency")) cfg.real_time_frequency = integer("realTimeFrequency");
  if (j.contains("datasetSubmissionDeadline")) {
    cfg.dataset_submission_deadline = integer("datasetSubmissionDeadline");
  }
  if (j.contains("minAgentChallengers")) {
    const std::int64_t n = integer("minAgentChallengers");
    if (n < 0) throw ConfigError("minAgentChallengers", "must be at least 1");
    cfg.min_agent_challengers = static_cast<std::uint64_t>(n);
  }
  if (j.contains("minAgentChallengerVotingPower")) {
    const auto& v = j.at("minAgentChallengerVotingPower");
    if (!v.is_string()) throw ConfigError("minAgentChallengerVotingPower", "must be a \"num/den\" string");
    try {
      cfg.min_agent_challenger_voting_power = Rational::parse(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("minAgentChallengerVotingPower", e.what());
    }
  }
  cfg.agent_submission_fee = amount("agentSubmissionFee");
  cfg.data_publish_fee = amount("dataPublishFee");
  cfg.price_publish_fee = amount("pricePublishFee");
  cfg.rent_fee = amount("rentFee");
  return cfg;
}

}  // namespace scynet
