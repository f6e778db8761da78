#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>

#include "scynet/crypto.hpp"

namespace scynet {

/// Content-addressed byte store standing in for dataset URLs. Keys are the
/// SHA-256 of the content. Safe for concurrent readers.
class BlobStore {
 public:
  Digest put(Bytes content) {
    const Digest ref = sha256(content);
    std::unique_lock lock(mutex_);
    blobs_.emplace(ref, std::move(content));
    return ref;
  }

  /// Stores content under an explicit reference. Used when replaying logs.
  void put_as(const Digest& ref, Bytes content) {
    std::unique_lock lock(mutex_);
    blobs_[ref] = std::move(content);
  }

  std::optional<Bytes> get(const Digest& ref) const {
    std::shared_lock lock(mutex_);
    const auto it = blobs_.find(ref);
    if (it == blobs_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(const Digest& ref) const {
    std::shared_lock lock(mutex_);
    return blobs_.count(ref) != 0;
  }

 private:
  mutable std::shared_mutex mutex_;
  std::map<Digest, Bytes> blobs_;
};

}  // namespace scynet
