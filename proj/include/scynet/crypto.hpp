#pragma once

#include <array>
#include <span>
#include <string_view>

#include "scynet/types.hpp"

namespace scynet {

using PublicKey = std::array<std::uint8_t, 32>;
using Signature = std::array<std::uint8_t, 64>;
using SymmetricKey = std::array<std::uint8_t, 32>;
using Nonce = std::array<std::uint8_t, 12>;

enum class CryptoErrc { DecryptFailed, CommitMismatch, BackendFailure };
const char* to_string(CryptoErrc c);
using CryptoError = CodedError<CryptoErrc>;

Digest sha256(std::span<const std::uint8_t> data);

/// Digest of a value's canonical byte form. Callers serialize first (binary
/// codec for protocol objects, sorted-key JSON for state dumps).
Digest canonical_digest(std::span<const std::uint8_t> canonical_bytes);
Digest canonical_digest(std::string_view canonical_text);

/// Hash of several parts, each length-prefixed so boundaries are unambiguous.
Digest tagged_digest(std::string_view tag, std::initializer_list<std::span<const std::uint8_t>> parts);

/// Ed25519 identity. The signing key is the 32-byte seed.
class KeyPair {
 public:
  const PublicKey& public_key() const noexcept { return public_; }
  AccountId account() const;

  Signature sign(std::span<const std::uint8_t> message) const;

  friend KeyPair keygen(const Digest& seed);

 private:
  std::array<std::uint8_t, 32> secret_{};
  PublicKey public_{};
};

/// Deterministic for a given seed.
KeyPair keygen(const Digest& seed);

AccountId account_of(const PublicKey& key);
bool verify(std::span<const std::uint8_t> message, const Signature& sig, const PublicKey& key);
/// verify() with successful checks remembered process-wide. Replicas that
/// re-validate the same transactions share the work.
bool verify_cached(std::span<const std::uint8_t> message, const Signature& sig, const PublicKey& key);

/// AES-256-GCM ciphertext (tag appended) plus the digest of the plaintext.
/// The commit hash is authenticated as associated data.
struct SealedEnvelope {
  Nonce nonce{};
  Bytes ciphertext;
  Digest commit_hash{};

  bool operator==(const SealedEnvelope&) const = default;
};

/// `(key, nonce)` must never repeat.
SealedEnvelope seal(std::span<const std::uint8_t> payload, const SymmetricKey& key, const Nonce& nonce);

/// Seals with an arbitrary commit hash. Honest senders use `seal`; this exists
/// so misbehaving parties can be modeled.
SealedEnvelope seal_with_commit(std::span<const std::uint8_t> payload, const SymmetricKey& key,
                                const Nonce& nonce, const Digest& commit_hash);

/// Returns the payload iff authenticated decryption succeeds and the payload
/// digest equals the commit hash. Throws CryptoError otherwise; no partial
/// plaintext escapes.
Bytes open(const SealedEnvelope& env, const SymmetricKey& key);

/// Wire form: len(nonce) nonce | len(ciphertext) ciphertext | len(commit) commit.
Bytes encode_envelope(const SealedEnvelope& env);
SealedEnvelope decode_envelope(std::span<const std::uint8_t> wire);

/// Plaintext inside a signal envelope: the agent output bound to its author.
struct SignalPayload {
  Bytes signal;
  PublicKey author{};

  bool operator==(const SignalPayload&) const = default;
};

Bytes encode_signal_payload(const SignalPayload& p);
SignalPayload decode_signal_payload(std::span<const std::uint8_t> wire);

}  // namespace scynet
