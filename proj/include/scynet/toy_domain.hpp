#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scynet/tournament.hpp"
#include "scynet/types.hpp"

namespace scynet {

enum class ToyErrc { LengthMismatch, EmptyTruth, EmptyInput, InvalidSize, MalformedAgent };
const char* to_string(ToyErrc c);
using ToyError = CodedError<ToyErrc>;

/// Share of cases predicted correctly, reduced.
Rational accuracy(const std::vector<bool>& predictions, const std::vector<bool>& truth);

/// Best accuracy achievable by predicting a constant.
Rational baseline(const std::vector<bool>& truth);

/// Seeded Boolean outcome per real-time tick ("price rises" = true).
class TruthStream {
 public:
  TruthStream(const Digest& seed, Rational bias = {1, 2}) : seed_(seed), bias_(bias) {}

  bool outcome(Timestamp tick) const;

 private:
  Digest seed_;
  Rational bias_;
};

/// Ground-truth label of a toy feature vector.
bool toy_label(std::span<const std::uint8_t> input);

struct ToyDataset {
  std::vector<Bytes> inputs;
  std::vector<bool> outputs;

  std::size_t size() const noexcept { return outputs.size(); }
  bool operator==(const ToyDataset&) const = default;
};

/// Exactly round(balance * size) positive outputs, shuffled. Every input
/// labels to its output under toy_label.
ToyDataset generate_dataset(const Digest& seed, std::size_t size, Rational balance = {1, 2});

Bytes encode_dataset_inputs(const std::vector<Bytes>& inputs);
std::vector<Bytes> decode_dataset_inputs(std::span<const std::uint8_t> wire);
Bytes encode_outputs(const std::vector<bool>& outputs);
std::vector<bool> decode_outputs(std::span<const std::uint8_t> wire);

Bytes encode_realtime_signal(bool prediction);
/// Predictions per challenger dataset.
Bytes encode_dataset_signal(const std::map<AccountId, std::vector<bool>>& predictions);
std::map<AccountId, std::vector<bool>> decode_dataset_signal(std::span<const std::uint8_t> wire);

enum class AgentBehavior { Constant, NoisyOracle, Copycat, Silent, LateRevealer, KeyReuser, BadCommit };
const char* to_string(AgentBehavior b);

/// LateRevealer, KeyReuser and BadCommit predict like NoisyOracle with `p`;
/// only their protocol conduct differs.
struct ScriptedAgent {
  AgentBehavior behavior = AgentBehavior::NoisyOracle;
  bool constant = true;
  Rational p{1, 2};
  std::string copy_target;  ///< node id, Copycat only

  bool operator==(const ScriptedAgent&) const = default;
};

ScriptedAgent agent_from_json(const nlohmann::json& j);
nlohmann::json agent_to_json(const ScriptedAgent& a);

struct AgentInput {
  std::optional<Timestamp> tick;                                  ///< real-time domains
  const std::map<AccountId, std::vector<Bytes>>* datasets = nullptr;  ///< dataset domains
  const TruthStream* truth = nullptr;
  std::optional<Bytes> target_prior_ciphertext;                   ///< Copycat only
  std::map<AccountId, std::vector<bool>> leaked_outputs;          ///< outputs handed over off-chain
};

struct AgentResponse {
  enum class Kind { Signal, Silent, CopiedCiphertext };
  Kind kind = Kind::Silent;
  Bytes bytes;  ///< encoded signal, or envelope wire bytes when copied
};

AgentResponse agent_respond(const ScriptedAgent& agent, const AgentInput& input, const Digest& seed);

/// DomainOracle backed by the toy truth stream and toy signal formats.
class ToyOracle final : public DomainOracle {
 public:
  explicit ToyOracle(TruthStream truth) : truth_(truth) {}

  const TruthStream& truth() const noexcept { return truth_; }

  bool realtime_outcome(Timestamp tick) const override { return truth_.outcome(tick); }
  std::optional<bool> decode_realtime_signal(std::span<const std::uint8_t> signal) const override;
  std::optional<std::map<AccountId, std::vector<bool>>> decode_dataset_signal(
      std::span<const std::uint8_t> signal) const override;
  std::optional<std::vector<bool>> decode_dataset_outputs(std::span<const std::uint8_t> outputs) const override;
  std::optional<std::size_t> dataset_size(std::span<const std::uint8_t> inputs_blob) const override;

 private:
  TruthStream truth_;
};

}  // namespace scynet
