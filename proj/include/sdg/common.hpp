#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sdg {

// Failure classes. The CLI maps these one-to-one onto process exit codes,
// so keep the numbering stable.
enum class Errc : int {
  usage = 2,
  config_not_found = 3,
  config_parse = 4,
  config_invalid = 5,
  domain = 6,       // bad argument to a pipeline operation
  frame = 7,        // part/sprite would be clipped by an image border
  annotation = 8,   // empty coverage mask, inconsistent labels
  io = 9,
  numeric = 10,     // non-finite values where finite ones are required
  training = 11,
  sampling = 12,
  spec_overlap = 13 // pseudo-real levels collide with training levels
};

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }
  int exit_code() const { return static_cast<int>(code_); }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

// FNV-1a, used for content hashes in the manifest and for config hashing.
inline std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace sdg
