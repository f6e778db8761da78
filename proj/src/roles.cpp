#include "scynet/roles.hpp"

#include "scynet/codec.hpp"

namespace scynet {

namespace {

Bytes be64(std::uint64_t v) {
  ByteWriter w;
  w.u64(v);
  return std::move(w).take();
}

const TruthStream* truth_of(const ChainEnv& env) {
  const auto* toy = dynamic_cast<const ToyOracle*>(env.oracle);
  return toy ? &toy->truth() : nullptr;
}

bool registered_for(const ChainState& chain, const Uuid& uuid, std::uint64_t tournament) {
  const auto it = chain.agents.find(uuid);
  return it != chain.agents.end() && it->second.tournament == tournament;
}

}  // namespace

Uuid NodeRuntime::agent_uuid(std::uint64_t tournament) const {
  return Uuid::from_digest(tagged_digest("scynet/agent", {seed_, be64(tournament)}));
}

SymmetricKey NodeRuntime::signal_key(const Uuid& agent, Timestamp tick) const {
  if (roles_.agent && roles_.agent->behavior == AgentBehavior::KeyReuser) {
    return tagged_digest("scynet/signal-key", {seed_, agent.bytes});
  }
  return tagged_digest("scynet/signal-key", {seed_, agent.bytes, be64(static_cast<std::uint64_t>(tick))});
}

Nonce NodeRuntime::nonce_for(std::string_view tag, const Uuid& agent, Timestamp tick) const {
  const Digest d = tagged_digest(tag, {seed_, agent.bytes, be64(static_cast<std::uint64_t>(tick))});
  Nonce n{};
  std::copy_n(d.begin(), n.size(), n.begin());
  return n;
}

const std::vector<bool>* NodeRuntime::dataset_outputs(std::uint64_t tournament) const {
  const auto it = datasets_.find(tournament);
  return it == datasets_.end() ? nullptr : &it->second.second;
}

void NodeRuntime::receive_leak(std::uint64_t tournament, const AccountId& challenger, std::vector<bool> outputs) {
  leaks_[tournament][challenger] = std::move(outputs);
}

std::vector<PlannedTx> NodeRuntime::obligations(NodeState& node, const ChainEnv& env, Timestamp now,
                                                BlobStore& blobs, std::vector<PublishedBlob>& published) {
  std::vector<PlannedTx> out;
  if (!node.key()) return out;
  const ValidatedConfig& cfg = *env.cfg;
  if (roles_.agent) submit_agents(node, env, now, out);
  if (cfg.is_realtime()) {
    if (roles_.agent && now % *cfg->real_time_frequency == 0 && !ticks_done_.count(now)) {
      realtime_tick(node, env, now, out);
    }
  } else {
    publish_dataset(node, env, now, blobs, published, out);
    if (roles_.agent) dataset_signal(node, env, now, blobs, out);
    dataset_reveals(node, env, now, out);
  }
  return out;
}

void NodeRuntime::submit_agents(NodeState& node, const ChainEnv& env, Timestamp now, std::vector<PlannedTx>& out) {
  const std::uint64_t target = tournament_index_at(*env.cfg, now) + 1;
  if (target > roles_.last_tournament || submitted_.count(target)) return;
  submitted_.insert(target);
  out.push_back({node.sign(SubmitAgentBody{agent_uuid(target)}), now});
}

void NodeRuntime::realtime_tick(NodeState& node, const ChainEnv& env, Timestamp tick, std::vector<PlannedTx>& out) {
  ticks_done_.insert(tick);
  const ValidatedConfig& cfg = *env.cfg;
  const ChainState& chain = node.chain();
  const ScriptedAgent& agent = *roles_.agent;
  const PublicKey& me = node.key()->public_key();
  const Duration step = *cfg->real_time_frequency;

  // Reveal the key of the envelope sent one tick ago.
  const Timestamp prev = tick - step;
  if (prev >= 0) {
    const std::uint64_t pk = tournament_index_at(cfg, prev);
    const Uuid puuid = agent_uuid(pk);
    if (const auto c = copied_.find(prev); c != copied_.end()) {
      const TournamentState* t = chain.find_tournament(pk);
      if (t) {
        const auto rec = t->signals.find(c->second);
        if (rec != t->signals.end() && rec->second.key) {
          out.push_back({node.sign(PublishSignalKeyBody{puuid, *rec->second.key, tick}), tick});
        }
      }
    } else if (const auto k = signal_keys_.find({puuid, prev}); k != signal_keys_.end()) {
      const Timestamp send_at =
          agent.behavior == AgentBehavior::LateRevealer ? tick + 2 * cfg->time_tolerance + 1 : tick;
      out.push_back({node.sign(PublishSignalKeyBody{puuid, k->second, tick}), send_at});
    }
  }

  const std::uint64_t index = tournament_index_at(cfg, tick);
  const Uuid uuid = agent_uuid(index);
  if (!registered_for(chain, uuid, index) || agent.behavior == AgentBehavior::Silent) return;

  if (agent.behavior == AgentBehavior::Copycat && roles_.copy_target) {
    const TournamentState* t = chain.find_tournament(index);
    if (t) {
      for (const auto& [tuuid, p] : t->participants) {
        if (p.owner != *roles_.copy_target) continue;
        const auto rec = t->signals.find({tuuid, prev});
        if (rec == t->signals.end()) break;
        copied_[tick] = {tuuid, prev};
        out.push_back({node.sign(SubmitSignalBody{uuid, rec->second.envelope, tick}), tick});
        return;
      }
    }
  }

  AgentInput input;
  input.tick = tick;
  input.truth = truth_of(env);
  const Digest agent_seed =
      tagged_digest("scynet/agent-signal", {seed_, uuid.bytes, be64(static_cast<std::uint64_t>(tick))});
  const AgentResponse response = agent_respond(agent, input, agent_seed);
  if (response.kind != AgentResponse::Kind::Signal) return;

  const Bytes payload = encode_signal_payload(SignalPayload{response.bytes, me});
  const SymmetricKey key = signal_key(uuid, tick);
  const Nonce nonce = nonce_for("scynet/signal-nonce", uuid, tick);
  const SealedEnvelope env_sealed =
      agent.behavior == AgentBehavior::BadCommit
          ? seal_with_commit(payload, key, nonce, tagged_digest("scynet/bogus-commit", {payload}))
          : seal(payload, key, nonce);
  signal_keys_[{uuid, tick}] = key;
  out.push_back({node.sign(SubmitSignalBody{uuid, env_sealed, tick}), tick});
}

void NodeRuntime::publish_dataset(NodeState& node, const ChainEnv& env, Timestamp now, BlobStore& blobs,
                                  std::vector<PublishedBlob>& published, std::vector<PlannedTx>& out) {
  const ValidatedConfig& cfg = *env.cfg;
  const ChainState& chain = node.chain();
  const std::uint64_t index = tournament_index_at(cfg, now);
  if (datasets_published_.count(index) || index >= chain.next_tournament) return;
  const TournamentState* t = chain.find_tournament(index);
  if (!t || !t->is_challenger(node.key()->account())) return;
  if (now >= tournament_window(cfg, index).start + *cfg->dataset_submission_deadline) return;
  datasets_published_.insert(index);

  const ToyDataset ds = generate_dataset(tagged_digest("scynet/dataset", {seed_, be64(index)}), roles_.dataset_size,
                                         roles_.dataset_balance);
  std::vector<bool> sealed_outputs = ds.outputs;
  if (roles_.corrupt_all_datasets || roles_.corrupt_datasets.count(index)) sealed_outputs.push_back(false);

  const SymmetricKey key = tagged_digest("scynet/dataset-key", {seed_, be64(index)});
  Nonce nonce{};
  const Digest nd = tagged_digest("scynet/dataset-nonce", {seed_, be64(index)});
  std::copy_n(nd.begin(), nonce.size(), nonce.begin());
  const SealedEnvelope sealed = seal(encode_outputs(sealed_outputs), key, nonce);

  Bytes inputs_blob = encode_dataset_inputs(ds.inputs);
  Bytes sealed_blob = encode_envelope(sealed);
  const Digest inputs_hash = sha256(inputs_blob);
  published.push_back({inputs_hash, inputs_blob});
  published.push_back({sha256(sealed_blob), sealed_blob});
  const Digest inputs_ref = blobs.put(std::move(inputs_blob));
  const Digest sealed_ref = blobs.put(std::move(sealed_blob));

  datasets_[index] = {key, ds.outputs};
  out.push_back({node.sign(PublishDatasetBody{inputs_ref, inputs_hash, sealed_ref, sealed.commit_hash}), now});
}

void NodeRuntime::dataset_signal(NodeState& node, const ChainEnv& env, Timestamp now, const BlobStore& blobs,
                                 std::vector<PlannedTx>& out) {
  const ValidatedConfig& cfg = *env.cfg;
  const ChainState& chain = node.chain();
  const std::uint64_t index = tournament_index_at(cfg, now);
  const Window w = tournament_window(cfg, index);
  if (now < w.start + *cfg->dataset_submission_deadline || dataset_signals_done_.count(index)) return;
  const Uuid uuid = agent_uuid(index);
  if (!registered_for(chain, uuid, index)) return;
  dataset_signals_done_.insert(index);
  if (roles_.agent->behavior == AgentBehavior::Silent) return;

  std::map<AccountId, std::vector<Bytes>> datasets;
  if (const TournamentState* t = chain.find_tournament(index)) {
    for (const auto& [challenger, rec] : t->datasets) {
      if (t->challenger_disqualified(challenger)) continue;
      if (const auto blob = blobs.get(rec.inputs_ref)) datasets[challenger] = decode_dataset_inputs(*blob);
    }
  }
  AgentInput input;
  input.datasets = &datasets;
  input.truth = truth_of(env);
  if (const auto leak = leaks_.find(index); leak != leaks_.end()) input.leaked_outputs = leak->second;
  const AgentResponse response =
      agent_respond(*roles_.agent, input, tagged_digest("scynet/agent-signal", {seed_, uuid.bytes}));
  if (response.kind != AgentResponse::Kind::Signal) return;

  const Bytes payload = encode_signal_payload(SignalPayload{response.bytes, node.key()->public_key()});
  const SymmetricKey key = signal_key(uuid, kNoTick);
  const Nonce nonce = nonce_for("scynet/signal-nonce", uuid, kNoTick);
  const SealedEnvelope sealed =
      roles_.agent->behavior == AgentBehavior::BadCommit
          ? seal_with_commit(payload, key, nonce, tagged_digest("scynet/bogus-commit", {payload}))
          : seal(payload, key, nonce);
  signal_keys_[{uuid, kNoTick}] = key;
  out.push_back({node.sign(SubmitSignalBody{uuid, sealed, std::nullopt}), now});
}

void NodeRuntime::dataset_reveals(NodeState& node, const ChainEnv& env, Timestamp now, std::vector<PlannedTx>& out) {
  const ValidatedConfig& cfg = *env.cfg;
  const Duration freq = cfg->tournament_start_frequency;
  if (now <= 0 || now % freq != 0) return;
  const auto index = static_cast<std::uint64_t>(now / freq - 1);
  if (dataset_reveals_done_.count(index)) return;
  dataset_reveals_done_.insert(index);

  if (const auto ds = datasets_.find(index); ds != datasets_.end()) {
    out.push_back({node.sign(PublishDatasetKeyBody{ds->second.first}), now});
  }
  if (roles_.agent) {
    const Uuid uuid = agent_uuid(index);
    if (const auto k = signal_keys_.find({uuid, kNoTick}); k != signal_keys_.end()) {
      const Timestamp send_at =
          roles_.agent->behavior == AgentBehavior::LateRevealer ? now + 2 * cfg->time_tolerance + 1 : now;
      out.push_back({node.sign(PublishSignalKeyBody{uuid, k->second, std::nullopt}), send_at});
    }
  }
}

}  // namespace scynet
