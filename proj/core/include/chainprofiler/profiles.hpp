#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "chainprofiler/chain.hpp"

namespace chainprofiler::profiles {

struct FeatureConfig {
  int b_hour = 6;
  int b_gas = 50;
  double gas_clip = 5.0;

  /// Throws InvalidArgument unless b_hour in [1,24], b_gas >= 1, gas_clip > 0.
  void validate() const;
};

enum class FeatureKind { timeofday, gasprice, embedding, concat };

std::string to_string(FeatureKind kind);
std::optional<FeatureKind> parse_feature_kind(std::string_view text);

struct FeatureVector {
  Address address;
  FeatureKind kind = FeatureKind::timeofday;
  std::vector<double> values;
};

struct SummaryStats {
  double mean = 0;
  double median = 0;
  double stddev = 0;  // population
};

/// Mean, midpoint median and population standard deviation. Throws EmptyInput.
SummaryStats summarize(std::span<const double> sample);

/// Exact non-negative rational, used for daily averages in wei.
struct Ratio {
  Wei numerator = 0;
  Wei denominator = 1;

  double to_double() const;
  /// Fixed-point decimal with `digits` fractional digits (truncated).
  std::string to_decimal(int digits = 9) const;
  /// Parses "123" or "123.456".
  static std::optional<Ratio> parse_decimal(std::string_view text);
};

/// Per-UTC-day average gas price keyed by day index (days since epoch).
class DailyGasSeries {
 public:
  void set(std::int64_t day, Ratio average);
  std::optional<Ratio> get(std::int64_t day) const;
  std::size_t size() const noexcept { return days_.size(); }
  const std::map<std::int64_t, Ratio>& days() const noexcept { return days_; }

 private:
  std::map<std::int64_t, Ratio> days_;
};

/// Fractional UTC hour of day in [0, 24).
double hour_of_day(std::int64_t unix_seconds);

/// [mean, median, std] of the hours followed by a b_hour-bin normalized
/// histogram over [0, 24). Throws EmptyInput.
FeatureVector time_of_day_features(const Address& address, std::span<const Transaction> txs,
                                   const FeatureConfig& cfg);

/// Arithmetic mean of gas_price per UTC day over non-internal transactions
/// with a non-zero gas price.
DailyGasSeries daily_average_gas_price(std::span<const Transaction> corpus);

/// Gas price of each sent transaction divided by the day's average.
/// Internal and zero-price transactions are skipped. Ratios above gas_clip
/// count toward the statistics but not the histogram over [0, gas_clip].
/// Throws EmptyInput or MissingDay.
FeatureVector normalized_gas_features(const Address& address, std::span<const Transaction> sent,
                                      const DailyGasSeries& series, const FeatureConfig& cfg);

/// Builds one profile of `kind` (timeofday or gasprice) for each address.
/// Addresses without usable transactions are left out.
std::vector<FeatureVector> build_profiles(std::span<const Transaction> corpus, std::span<const Address> addresses,
                                          FeatureKind kind, const FeatureConfig& cfg,
                                          const DailyGasSeries* series = nullptr);

/// Per-address concatenation of several feature sets. Addresses missing from
/// any input are skipped.
std::vector<FeatureVector> concat_features(std::span<const std::vector<FeatureVector>> parts);

// features.csv: address,kind,v0,v1,...
void write_features_csv(std::ostream& out, std::span<const FeatureVector> features);
std::vector<FeatureVector> read_features_csv(std::istream& in, const std::string& source = "<stream>");

// daily_gas.csv: date,avg_gas_price_wei
void write_daily_gas_csv(std::ostream& out, const DailyGasSeries& series);
DailyGasSeries read_daily_gas_csv(std::istream& in, const std::string& source = "<stream>");

}  // namespace chainprofiler::profiles
