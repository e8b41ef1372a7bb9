#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace chainprofiler {

/// Unsigned 256-bit integer amount in wei. Overflow throws.
using Wei = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<
    256, 256, boost::multiprecision::unsigned_magnitude, boost::multiprecision::checked, void>>;

/// Signed companion of Wei, wide enough to hold any difference of two Wei values.
using SignedWei = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<
    257, 257, boost::multiprecision::signed_magnitude, boost::multiprecision::checked, void>>;

inline constexpr std::uint64_t kGwei = 1'000'000'000ULL;
inline constexpr std::int64_t kSecondsPerDay = 86'400;

/// Parses a non-empty string of decimal digits. Returns nullopt on any other
/// character or on overflow past 2^256 - 1.
std::optional<Wei> parse_wei(std::string_view text);
std::string to_string(const Wei& value);

/// A 20-byte account address kept in canonical form: "0x" followed by 40
/// lowercase hex digits. EIP-55 mixed case is accepted on input.
class Address {
 public:
  Address() = default;

  static std::optional<Address> parse(std::string_view text);
  /// Throws InvalidArgument when text is not a valid address.
  static Address from_string(std::string_view text);

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const Address&, const Address&) = default;
  friend bool operator==(const Address&, const Address&) = default;

 private:
  explicit Address(std::string v) : value_(std::move(v)) {}
  std::string value_;
};

/// Normalizes a 32-byte hex transaction id to "0x" + 64 lowercase hex digits.
std::optional<std::string> parse_tx_hash(std::string_view text);

/// One on-chain transfer. Internal transactions share the hash of the
/// enclosing call and carry its gas price, but pay no fee themselves.
struct Transaction {
  std::string tx_hash;
  std::uint64_t block_number = 0;
  std::int64_t timestamp = 0;
  Address from_address;
  std::optional<Address> to_address;  // empty for contract creation
  Wei value = 0;
  Wei gas_price = 0;
  std::uint64_t gas_used = 0;
  bool is_internal = false;

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

/// Total order used for canonical corpus ordering: (block_number, tx_hash)
/// first, then the remaining fields so that internal traces sharing a hash
/// sort deterministically.
bool canonical_less(const Transaction& a, const Transaction& b);

/// Days since 1970-01-01 (UTC) containing the given unix timestamp.
std::int64_t utc_day(std::int64_t unix_seconds);
/// ISO date string "YYYY-MM-DD" for a day index.
std::string format_date(std::int64_t day);
std::optional<std::int64_t> parse_date(std::string_view text);

}  // namespace chainprofiler
