#include "scynet/toy_domain.hpp"

#include <algorithm>

#include "scynet/codec.hpp"
#include "scynet/crypto.hpp"
#include "scynet/rng.hpp"

namespace scynet {

const char* to_string(ToyErrc c) {
  switch (c) {
    case ToyErrc::LengthMismatch: return "LengthMismatch";
    case ToyErrc::EmptyTruth: return "EmptyTruth";
    case ToyErrc::EmptyInput: return "EmptyInput";
    case ToyErrc::InvalidSize: return "InvalidSize";
    case ToyErrc::MalformedAgent: return "MalformedAgent";
  }
  return "ToyError";
}

const char* to_string(AgentBehavior b) {
  switch (b) {
    case AgentBehavior::Constant: return "Constant";
    case AgentBehavior::NoisyOracle: return "NoisyOracle";
    case AgentBehavior::Copycat: return "Copycat";
    case AgentBehavior::Silent: return "Silent";
    case AgentBehavior::LateRevealer: return "LateRevealer";
    case AgentBehavior::KeyReuser: return "KeyReuser";
    case AgentBehavior::BadCommit: return "BadCommit";
  }
  return "Unknown";
}

Rational accuracy(const std::vector<bool>& predictions, const std::vector<bool>& truth) {
  if (predictions.size() != truth.size()) throw ToyError(ToyErrc::LengthMismatch);
  if (truth.empty()) throw ToyError(ToyErrc::EmptyInput);
  std::uint64_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predictions[i] == truth[i] ? 1 : 0;
  return Rational{hits, truth.size()}.reduced();
}

Rational baseline(const std::vector<bool>& truth) {
  if (truth.empty()) throw ToyError(ToyErrc::EmptyTruth);
  const auto positives = static_cast<std::uint64_t>(std::count(truth.begin(), truth.end(), true));
  return Rational{std::max<std::uint64_t>(positives, truth.size() - positives), truth.size()}.reduced();
}

bool TruthStream::outcome(Timestamp tick) const {
  ByteWriter w;
  w.i64(tick);
  DigestRng rng(tagged_digest("scynet/truth", {seed_, w.data()}));
  return rng.bernoulli(bias_);
}

bool toy_label(std::span<const std::uint8_t> input) { return (sha256(input)[0] & 1) != 0; }

ToyDataset generate_dataset(const Digest& seed, std::size_t size, Rational balance) {
  if (size == 0) throw ToyError(ToyErrc::InvalidSize);
  if (balance.den == 0 || balance.num > balance.den) throw ToyError(ToyErrc::InvalidSize, "balance");
  DigestRng rng(seed);

  // round half up of balance * size
  const auto positives = static_cast<std::size_t>(
      (static_cast<unsigned __int128>(balance.num) * size * 2 + balance.den) / (2 * static_cast<unsigned __int128>(balance.den)));
  ToyDataset ds;
  ds.outputs.assign(size, false);
  std::fill_n(ds.outputs.begin(), positives, true);
  for (std::size_t i = size - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_below(i + 1));
    const bool tmp = ds.outputs[i];
    ds.outputs[i] = ds.outputs[j];
    ds.outputs[j] = tmp;
  }

  ds.inputs.reserve(size);
  for (bool label : ds.outputs) {
    Bytes input(16);
    do {
      ByteWriter w;
      w.u64(rng.next_u64()).u64(rng.next_u64());
      input = std::move(w).take();
    } while (toy_label(input) != label);
    ds.inputs.push_back(std::move(input));
  }
  return ds;
}

Bytes encode_dataset_inputs(const std::vector<Bytes>& inputs) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(inputs.size()));
  for (const auto& in : inputs) w.bytes(in);
  return std::move(w).take();
}

std::vector<Bytes> decode_dataset_inputs(std::span<const std::uint8_t> wire) {
  ByteReader r(wire);
  const std::uint32_t n = r.u32();
  std::vector<Bytes> out;
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(r.bytes());
  r.expect_done();
  return out;
}

namespace {

void write_outputs(ByteWriter& w, const std::vector<bool>& outputs) {
  w.u32(static_cast<std::uint32_t>(outputs.size()));
  for (bool b : outputs) w.u8(b ? 1 : 0);
}

std::vector<bool> read_outputs(ByteReader& r) {
  const std::uint32_t n = r.u32();
  std::vector<bool> out;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint8_t v = r.u8();
    if (v > 1) throw DecodeError(DecodeErrc::BadValue, "boolean");
    out.push_back(v == 1);
  }
  return out;
}

}  // namespace

Bytes encode_outputs(const std::vector<bool>& outputs) {
  ByteWriter w;
  write_outputs(w, outputs);
  return std::move(w).take();
}

std::vector<bool> decode_outputs(std::span<const std::uint8_t> wire) {
  ByteReader r(wire);
  auto out = read_outputs(r);
  r.expect_done();
  return out;
}

Bytes encode_realtime_signal(bool prediction) { return {static_cast<std::uint8_t>(prediction ? 1 : 0)}; }

Bytes encode_dataset_signal(const std::map<AccountId, std::vector<bool>>& predictions) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(predictions.size()));
  for (const auto& [challenger, outputs] : predictions) {
    w.raw(challenger.bytes);
    write_outputs(w, outputs);
  }
  return std::move(w).take();
}

std::map<AccountId, std::vector<bool>> decode_dataset_signal(std::span<const std::uint8_t> wire) {
  ByteReader r(wire);
  const std::uint32_t n = r.u32();
  std::map<AccountId, std::vector<bool>> out;
  for (std::uint32_t i = 0; i < n; ++i) {
    const AccountId c{r.fixed<32>()};
    if (!out.emplace(c, read_outputs(r)).second) throw DecodeError(DecodeErrc::BadValue, "duplicate challenger");
  }
  r.expect_done();
  return out;
}

ScriptedAgent agent_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("behavior") || !j["behavior"].is_string()) {
    throw ToyError(ToyErrc::MalformedAgent, "missing behavior");
  }
  static const std::map<std::string, AgentBehavior> kNames = {
      {"Constant", AgentBehavior::Constant},         {"NoisyOracle", AgentBehavior::NoisyOracle},
      {"Copycat", AgentBehavior::Copycat},           {"Silent", AgentBehavior::Silent},
      {"LateRevealer", AgentBehavior::LateRevealer}, {"KeyReuser", AgentBehavior::KeyReuser},
      {"BadCommit", AgentBehavior::BadCommit},
  };
  const auto name = j["behavior"].get<std::string>();
  const auto it = kNames.find(name);
  if (it == kNames.end()) throw ToyError(ToyErrc::MalformedAgent, "unknown behavior " + name);

  ScriptedAgent a;
  a.behavior = it->second;
  for (const auto& [key, value] : j.items()) {
    if (key == "behavior") continue;
    if (key == "value" && value.is_boolean()) {
      a.constant = value.get<bool>();
    } else if (key == "p" && value.is_string()) {
      try {
        a.p = Rational::parse(value.get<std::string>());
      } catch (const std::exception& e) {
        throw ToyError(ToyErrc::MalformedAgent, e.what());
      }
      if (a.p.den == 0 || a.p.num > a.p.den) throw ToyError(ToyErrc::MalformedAgent, "p outside [0,1]");
    } else if (key == "target" && value.is_string()) {
      a.copy_target = value.get<std::string>();
    } else {
      throw ToyError(ToyErrc::MalformedAgent, "bad field " + key);
    }
  }
  if (a.behavior == AgentBehavior::Copycat && a.copy_target.empty()) {
    throw ToyError(ToyErrc::MalformedAgent, "Copycat needs a target");
  }
  return a;
}

nlohmann::json agent_to_json(const ScriptedAgent& a) {
  nlohmann::json j{{"behavior", to_string(a.behavior)}};
  switch (a.behavior) {
    case AgentBehavior::Constant: j["value"] = a.constant; break;
    case AgentBehavior::Copycat: j["target"] = a.copy_target; break;
    case AgentBehavior::Silent: break;
    default: j["p"] = a.p.str(); break;
  }
  return j;
}

AgentResponse agent_respond(const ScriptedAgent& agent, const AgentInput& input, const Digest& seed) {
  AgentResponse out;
  if (agent.behavior == AgentBehavior::Silent) return out;
  if (agent.behavior == AgentBehavior::Copycat && input.target_prior_ciphertext) {
    out.kind = AgentResponse::Kind::CopiedCiphertext;
    out.bytes = *input.target_prior_ciphertext;
    return out;
  }
  const bool noisy = agent.behavior != AgentBehavior::Constant && agent.behavior != AgentBehavior::Copycat;
  DigestRng rng(seed);
  out.kind = AgentResponse::Kind::Signal;

  if (input.tick) {
    bool prediction = agent.constant;
    if (noisy) {
      if (!input.truth) throw ToyError(ToyErrc::EmptyTruth, "real-time agent without truth stream");
      const bool actual = input.truth->outcome(*input.tick);
      prediction = rng.bernoulli(agent.p) ? actual : !actual;
    }
    out.bytes = encode_realtime_signal(prediction);
    return out;
  }

  std::map<AccountId, std::vector<bool>> predictions;
  if (input.datasets) {
    for (const auto& [challenger, inputs] : *input.datasets) {
      const auto leaked = input.leaked_outputs.find(challenger);
      std::vector<bool> outputs;
      outputs.reserve(inputs.size());
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!noisy) {
          outputs.push_back(agent.constant);
          continue;
        }
        // Draw even when the answer is leaked so other datasets see the same noise.
        const bool actual = toy_label(inputs[i]);
        const bool guess = rng.bernoulli(agent.p) ? actual : !actual;
        const bool use_leak = leaked != input.leaked_outputs.end() && i < leaked->second.size();
        outputs.push_back(use_leak ? leaked->second[i] : guess);
      }
      predictions.emplace(challenger, std::move(outputs));
    }
  }
  out.bytes = encode_dataset_signal(predictions);
  return out;
}

std::optional<bool> ToyOracle::decode_realtime_signal(std::span<const std::uint8_t> signal) const {
  if (signal.size() != 1 || signal[0] > 1) return std::nullopt;
  return signal[0] == 1;
}

std::optional<std::map<AccountId, std::vector<bool>>> ToyOracle::decode_dataset_signal(
    std::span<const std::uint8_t> signal) const {
  try {
    return scynet::decode_dataset_signal(signal);
  } catch (const DecodeError&) {
    return std::nullopt;
  }
}

std::optional<std::vector<bool>> ToyOracle::decode_dataset_outputs(std::span<const std::uint8_t> outputs) const {
  try {
    return decode_outputs(outputs);
  } catch (const DecodeError&) {
    return std::nullopt;
  }
}

std::optional<std::size_t> ToyOracle::dataset_size(std::span<const std::uint8_t> inputs_blob) const {
  try {
    return decode_dataset_inputs(inputs_blob).size();
  } catch (const DecodeError&) {
    return std::nullopt;
  }
}

}  // namespace scynet
