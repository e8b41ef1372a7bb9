#include "chainprofiler/chain.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <tuple>

#include "chainprofiler/errors.hpp"

namespace chainprofiler {
namespace {

bool is_hex(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

std::optional<std::string> parse_prefixed_hex(std::string_view text, std::size_t digits) {
  if (text.size() != digits + 2 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) {
    return std::nullopt;
  }
  std::string out = "0x";
  out.reserve(digits + 2);
  for (char c : text.substr(2)) {
    if (!is_hex(c)) return std::nullopt;
    out.push_back(static_cast<char>(c >= 'A' && c <= 'F' ? c - 'A' + 'a' : c));
  }
  return out;
}

}  // namespace

std::optional<Wei> parse_wei(std::string_view text) {
  if (text.empty()) return std::nullopt;
  Wei out = 0;
  try {
    for (char c : text) {
      if (c < '0' || c > '9') return std::nullopt;
      out = out * 10 + static_cast<unsigned>(c - '0');
    }
  } catch (const std::overflow_error&) {
    return std::nullopt;
  } catch (const std::range_error&) {
    return std::nullopt;
  }
  return out;
}

std::string to_string(const Wei& value) { return value.str(); }

std::optional<Address> Address::parse(std::string_view text) {
  auto hex = parse_prefixed_hex(text, 40);
  if (!hex) return std::nullopt;
  return Address(std::move(*hex));
}

Address Address::from_string(std::string_view text) {
  auto a = parse(text);
  if (!a) throw InvalidArgument("invalid address '" + std::string(text) + "'");
  return *a;
}

std::optional<std::string> parse_tx_hash(std::string_view text) { return parse_prefixed_hex(text, 64); }

bool canonical_less(const Transaction& a, const Transaction& b) {
  auto key = [](const Transaction& t) {
    return std::tie(t.block_number, t.tx_hash, t.is_internal, t.from_address, t.to_address, t.timestamp);
  };
  if (key(a) != key(b)) return key(a) < key(b);
  if (a.value != b.value) return a.value < b.value;
  if (a.gas_price != b.gas_price) return a.gas_price < b.gas_price;
  return a.gas_used < b.gas_used;
}

std::int64_t utc_day(std::int64_t unix_seconds) {
  std::int64_t d = unix_seconds / kSecondsPerDay;
  if (unix_seconds % kSecondsPerDay < 0) --d;
  return d;
}

std::string format_date(std::int64_t day) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{day}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::optional<std::int64_t> parse_date(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  std::string s(text);
  if (std::sscanf(s.c_str(), "%4d-%2u-%2u", &y, &m, &d) != 3) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd}.time_since_epoch().count();
}

}  // namespace chainprofiler
