#include "scynet/crypto.hpp"

#include <openssl/evp.h>

#include <memory>
#include <mutex>
#include <set>

#include "scynet/codec.hpp"

namespace scynet {

namespace {

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

constexpr std::size_t kGcmTagSize = 16;

void check(int ok, const char* what) {
  if (ok != 1) throw CryptoError(CryptoErrc::BackendFailure, what);
}

Bytes gcm_encrypt(std::span<const std::uint8_t> plain, const SymmetricKey& key, const Nonce& nonce,
                  const Digest& aad) {
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw CryptoError(CryptoErrc::BackendFailure, "cipher ctx");
  check(EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr), "init");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(nonce.size()), nullptr),
        "ivlen");
  check(EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()), "key");
  int len = 0;
  check(EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())), "aad");
  Bytes out(plain.size() + kGcmTagSize);
  if (!plain.empty()) {
    check(EVP_EncryptUpdate(ctx.get(), out.data(), &len, plain.data(), static_cast<int>(plain.size())),
          "update");
  }
  int tail = 0;
  check(EVP_EncryptFinal_ex(ctx.get(), out.data() + plain.size(), &tail), "final");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kGcmTagSize, out.data() + plain.size()),
        "tag");
  return out;
}

}  // namespace

const char* to_string(CryptoErrc c) {
  switch (c) {
    case CryptoErrc::DecryptFailed: return "DecryptFailed";
    case CryptoErrc::CommitMismatch: return "CommitMismatch";
    case CryptoErrc::BackendFailure: return "CryptoBackendFailure";
  }
  return "CryptoError";
}

Digest sha256(std::span<const std::uint8_t> data) {
  Digest out{};
  unsigned int len = 0;
  check(EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr), "sha256");
  return out;
}

Digest canonical_digest(std::span<const std::uint8_t> canonical_bytes) { return sha256(canonical_bytes); }

Digest canonical_digest(std::string_view canonical_text) {
  return sha256({reinterpret_cast<const std::uint8_t*>(canonical_text.data()), canonical_text.size()});
}

Digest tagged_digest(std::string_view tag, std::initializer_list<std::span<const std::uint8_t>> parts) {
  ByteWriter w;
  w.str(tag);
  for (auto part : parts) w.bytes(part);
  return sha256(w.data());
}

KeyPair keygen(const Digest& seed) {
  KeyPair kp;
  kp.secret_ = seed;
  PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size()));
  if (!key) throw CryptoError(CryptoErrc::BackendFailure, "ed25519 key");
  std::size_t len = kp.public_.size();
  check(EVP_PKEY_get_raw_public_key(key.get(), kp.public_.data(), &len), "public key");
  return kp;
}

AccountId account_of(const PublicKey& key) { return AccountId{tagged_digest("scynet/account", {key})}; }

AccountId KeyPair::account() const { return account_of(public_); }

Signature KeyPair::sign(std::span<const std::uint8_t> message) const {
  PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, secret_.data(), secret_.size()));
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!key || !ctx) throw CryptoError(CryptoErrc::BackendFailure, "sign setup");
  check(EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()), "sign init");
  Signature sig{};
  std::size_t len = sig.size();
  check(EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()), "sign");
  return sig;
}

bool verify(std::span<const std::uint8_t> message, const Signature& sig, const PublicKey& key) {
  PkeyPtr pkey(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, key.data(), key.size()));
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!pkey || !ctx) return false;
  if (EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) != 1) return false;
  return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), message.data(), message.size()) == 1;
}

bool verify_cached(std::span<const std::uint8_t> message, const Signature& sig, const PublicKey& key) {
  static std::mutex mutex;
  static std::set<Digest> verified;
  constexpr std::size_t kMaxEntries = 1 << 20;

  ByteWriter w;
  w.bytes(message).raw(sig).raw(key);
  const Digest id = sha256(std::move(w).take());
  {
    std::lock_guard lock(mutex);
    if (verified.count(id)) return true;
  }
  if (!verify(message, sig, key)) return false;
  std::lock_guard lock(mutex);
  if (verified.size() >= kMaxEntries) verified.clear();
  verified.insert(id);
  return true;
}

SealedEnvelope seal(std::span<const std::uint8_t> payload, const SymmetricKey& key, const Nonce& nonce) {
  return seal_with_commit(payload, key, nonce, sha256(payload));
}

SealedEnvelope seal_with_commit(std::span<const std::uint8_t> payload, const SymmetricKey& key,
                                const Nonce& nonce, const Digest& commit_hash) {
  return SealedEnvelope{nonce, gcm_encrypt(payload, key, nonce, commit_hash), commit_hash};
}

Bytes open(const SealedEnvelope& env, const SymmetricKey& key) {
  if (env.ciphertext.size() < kGcmTagSize) throw CryptoError(CryptoErrc::DecryptFailed, "short ciphertext");
  const std::size_t body = env.ciphertext.size() - kGcmTagSize;

  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw CryptoError(CryptoErrc::BackendFailure, "cipher ctx");
  check(EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr), "init");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(env.nonce.size()), nullptr),
        "ivlen");
  check(EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), env.nonce.data()), "key");
  int len = 0;
  check(EVP_DecryptUpdate(ctx.get(), nullptr, &len, env.commit_hash.data(),
                          static_cast<int>(env.commit_hash.size())),
        "aad");
  Bytes plain(body);
  if (body > 0) {
    check(EVP_DecryptUpdate(ctx.get(), plain.data(), &len, env.ciphertext.data(), static_cast<int>(body)),
          "update");
  }
  Bytes tag(env.ciphertext.end() - kGcmTagSize, env.ciphertext.end());
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kGcmTagSize, tag.data()), "set tag");
  int tail = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), plain.data() + body, &tail) != 1) {
    throw CryptoError(CryptoErrc::DecryptFailed);
  }
  if (sha256(plain) != env.commit_hash) throw CryptoError(CryptoErrc::CommitMismatch);
  return plain;
}

Bytes encode_envelope(const SealedEnvelope& env) {
  ByteWriter w;
  w.bytes(env.nonce).bytes(env.ciphertext).bytes(env.commit_hash);
  return std::move(w).take();
}

SealedEnvelope decode_envelope(std::span<const std::uint8_t> wire) {
  ByteReader r(wire);
  const Bytes nonce = r.bytes();
  Bytes ciphertext = r.bytes();
  const Bytes commit = r.bytes();
  r.expect_done();
  SealedEnvelope env;
  if (nonce.size() != env.nonce.size() || commit.size() != env.commit_hash.size()) {
    throw DecodeError(DecodeErrc::BadValue, "envelope field length");
  }
  std::copy(nonce.begin(), nonce.end(), env.nonce.begin());
  std::copy(commit.begin(), commit.end(), env.commit_hash.begin());
  env.ciphertext = std::move(ciphertext);
  return env;
}

Bytes encode_signal_payload(const SignalPayload& p) {
  ByteWriter w;
  w.bytes(p.signal).raw(p.author);
  return std::move(w).take();
}

SignalPayload decode_signal_payload(std::span<const std::uint8_t> wire) {
  ByteReader r(wire);
  SignalPayload p;
  p.signal = r.bytes();
  p.author = r.fixed<32>();
  r.expect_done();
  return p;
}

}  // namespace scynet
