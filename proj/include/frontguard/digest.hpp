#pragma once

// Addresses, digests and the commitment hash.
//
// make_commit hashes sender || 0x00 || payload, or
// sender || 0x00 || target || 0x00 || payload for commits routed through a
// container. Payload labels are NUL-free, so the layout parses uniquely.

#include <openssl/sha.h>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frontguard/error.hpp"

namespace frontguard {

using Address = std::array<std::uint8_t, 20>;
using Digest = std::array<std::uint8_t, 32>;

inline Digest sha256(std::span<const std::uint8_t> bytes) {
  Digest out;
  SHA256(bytes.data(), bytes.size(), out.data());
  return out;
}

template <std::size_t N>
std::string to_hex(const std::array<std::uint8_t, N>& bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * N);
  for (std::uint8_t b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0x0f]);
  }
  return out;
}

template <std::size_t N>
std::array<std::uint8_t, N> from_hex(std::string_view hex) {
  if (hex.size() != 2 * N) throw Error("hex string has the wrong length");
  auto nibble = [](char ch) -> std::uint8_t {
    if (ch >= '0' && ch <= '9') return static_cast<std::uint8_t>(ch - '0');
    if (ch >= 'a' && ch <= 'f') return static_cast<std::uint8_t>(ch - 'a' + 10);
    if (ch >= 'A' && ch <= 'F') return static_cast<std::uint8_t>(ch - 'A' + 10);
    throw Error("invalid hex digit");
  };
  std::array<std::uint8_t, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  return out;
}

inline Digest make_commit(const Address& sender, std::string_view payload,
                          const std::optional<Address>& target = std::nullopt) {
  if (payload.find('\0') != std::string_view::npos) throw Error("commit payload must not contain NUL bytes");
  std::vector<std::uint8_t> buf;
  buf.reserve(sender.size() + 2 + (target ? target->size() : 0) + payload.size());
  buf.insert(buf.end(), sender.begin(), sender.end());
  buf.push_back(0x00);
  if (target) {
    buf.insert(buf.end(), target->begin(), target->end());
    buf.push_back(0x00);
  }
  buf.insert(buf.end(), payload.begin(), payload.end());
  return sha256(buf);
}

}  // namespace frontguard
