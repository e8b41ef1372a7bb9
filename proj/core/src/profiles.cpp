#include "chainprofiler/profiles.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "chainprofiler/csv.hpp"
#include "chainprofiler/errors.hpp"

namespace chainprofiler::profiles {
namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> normalized_histogram(std::span<const double> sample, int bins, double upper) {
  std::vector<double> hist(static_cast<std::size_t>(bins), 0.0);
  std::size_t kept = 0;
  for (double x : sample) {
    if (x < 0 || x > upper) continue;
    auto b = static_cast<int>(std::floor(x * bins / upper));
    b = std::clamp(b, 0, bins - 1);
    hist[static_cast<std::size_t>(b)] += 1.0;
    ++kept;
  }
  if (kept > 0) {
    for (auto& h : hist) h /= static_cast<double>(kept);
  }
  return hist;
}

FeatureVector assemble(const Address& address, FeatureKind kind, std::span<const double> sample,
                       std::vector<double> hist) {
  const auto s = summarize(sample);
  FeatureVector fv{address, kind, {s.mean, s.median, s.stddev}};
  fv.values.insert(fv.values.end(), hist.begin(), hist.end());
  return fv;
}

}  // namespace

void FeatureConfig::validate() const {
  if (b_hour < 1 || b_hour > 24) throw InvalidArgument("b_hour must be in [1, 24]");
  if (b_gas < 1) throw InvalidArgument("b_gas must be at least 1");
  if (!(gas_clip > 0) || !std::isfinite(gas_clip)) throw InvalidArgument("gas_clip must be positive");
}

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::timeofday: return "timeofday";
    case FeatureKind::gasprice: return "gasprice";
    case FeatureKind::embedding: return "embedding";
    case FeatureKind::concat: return "concat";
  }
  return "concat";
}

std::optional<FeatureKind> parse_feature_kind(std::string_view text) {
  if (text == "timeofday") return FeatureKind::timeofday;
  if (text == "gasprice") return FeatureKind::gasprice;
  if (text == "embedding") return FeatureKind::embedding;
  if (text == "concat") return FeatureKind::concat;
  return std::nullopt;
}

SummaryStats summarize(std::span<const double> sample) {
  if (sample.empty()) throw EmptyInput("cannot summarize an empty sample");
  const auto n = static_cast<double>(sample.size());
  SummaryStats s;
  s.mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
  double ss = 0;
  for (double x : sample) ss += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(ss / n);
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const auto mid = sorted.size() / 2;
  s.median = sorted.size() % 2 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;
  return s;
}

double Ratio::to_double() const {
  return static_cast<double>(numerator.convert_to<long double>() / denominator.convert_to<long double>());
}

std::string Ratio::to_decimal(int digits) const {
  Wei scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const Wei whole = numerator / denominator;
  const Wei frac = (numerator % denominator) * scale / denominator;
  if (digits == 0) return whole.str();
  std::string f = frac.str();
  f.insert(0, static_cast<std::size_t>(digits) - f.size(), '0');
  return whole.str() + "." + f;
}

std::optional<Ratio> Ratio::parse_decimal(std::string_view text) {
  const auto dot = text.find('.');
  if (dot == std::string_view::npos) {
    auto w = parse_wei(text);
    if (!w) return std::nullopt;
    return Ratio{*w, 1};
  }
  auto whole = text.substr(0, dot);
  auto frac = text.substr(dot + 1);
  if (frac.empty()) return std::nullopt;
  auto digits = parse_wei(std::string(whole.empty() ? "0" : whole) + std::string(frac));
  if (!digits) return std::nullopt;
  Wei den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  return Ratio{*digits, den};
}

void DailyGasSeries::set(std::int64_t day, Ratio average) {
  if (average.denominator == 0 || average.numerator == 0) {
    throw InvalidArgument("daily average gas price must be positive (" + format_date(day) + ")");
  }
  days_[day] = std::move(average);
}

std::optional<Ratio> DailyGasSeries::get(std::int64_t day) const {
  auto it = days_.find(day);
  if (it == days_.end()) return std::nullopt;
  return it->second;
}

double hour_of_day(std::int64_t unix_seconds) {
  auto sec = unix_seconds % kSecondsPerDay;
  if (sec < 0) sec += kSecondsPerDay;
  return static_cast<double>(sec) / 3600.0;
}

FeatureVector time_of_day_features(const Address& address, std::span<const Transaction> txs,
                                   const FeatureConfig& cfg) {
  cfg.validate();
  if (txs.empty()) throw EmptyInput("no transactions for " + address.str());
  std::vector<double> hours;
  hours.reserve(txs.size());
  for (const auto& tx : txs) hours.push_back(hour_of_day(tx.timestamp));
  return assemble(address, FeatureKind::timeofday, hours, normalized_histogram(hours, cfg.b_hour, 24.0));
}

DailyGasSeries daily_average_gas_price(std::span<const Transaction> corpus) {
  if (corpus.empty()) throw EmptyInput("empty corpus");
  std::map<std::int64_t, std::pair<Wei, std::uint64_t>> acc;
  for (const auto& tx : corpus) {
    if (tx.is_internal || tx.gas_price == 0) continue;
    auto& [sum, count] = acc[utc_day(tx.timestamp)];
    sum += tx.gas_price;
    ++count;
  }
  DailyGasSeries series;
  for (const auto& [day, sc] : acc) series.set(day, Ratio{sc.first, Wei(sc.second)});
  return series;
}

FeatureVector normalized_gas_features(const Address& address, std::span<const Transaction> sent,
                                      const DailyGasSeries& series, const FeatureConfig& cfg) {
  cfg.validate();
  std::vector<double> ratios;
  for (const auto& tx : sent) {
    if (tx.is_internal || tx.gas_price == 0) continue;
    const auto day = utc_day(tx.timestamp);
    auto avg = series.get(day);
    if (!avg) throw MissingDay(format_date(day));
    // gas_price / (num/den) = gas_price * den / num
    ratios.push_back(Ratio{tx.gas_price * avg->denominator, avg->numerator}.to_double());
  }
  if (ratios.empty()) throw EmptyInput("no priced transactions sent by " + address.str());
  return assemble(address, FeatureKind::gasprice, ratios, normalized_histogram(ratios, cfg.b_gas, cfg.gas_clip));
}

std::vector<FeatureVector> build_profiles(std::span<const Transaction> corpus, std::span<const Address> addresses,
                                          FeatureKind kind, const FeatureConfig& cfg,
                                          const DailyGasSeries* series) {
  if (kind != FeatureKind::timeofday && kind != FeatureKind::gasprice) {
    throw InvalidArgument("build_profiles supports timeofday and gasprice only");
  }
  std::map<Address, std::vector<Transaction>> by_address;
  for (const auto& a : addresses) by_address[a];
  for (const auto& tx : corpus) {
    if (auto it = by_address.find(tx.from_address); it != by_address.end()) it->second.push_back(tx);
    if (kind == FeatureKind::timeofday && tx.to_address && *tx.to_address != tx.from_address) {
      if (auto it = by_address.find(*tx.to_address); it != by_address.end()) it->second.push_back(tx);
    }
  }
  DailyGasSeries own;
  if (kind == FeatureKind::gasprice && series == nullptr) {
    own = daily_average_gas_price(corpus);
    series = &own;
  }
  std::vector<FeatureVector> out;
  for (const auto& [addr, txs] : by_address) {
    try {
      if (kind == FeatureKind::timeofday) {
        out.push_back(time_of_day_features(addr, txs, cfg));
      } else {
        out.push_back(normalized_gas_features(addr, txs, *series, cfg));
      }
    } catch (const EmptyInput&) {
      continue;
    }
  }
  return out;
}

std::vector<FeatureVector> concat_features(std::span<const std::vector<FeatureVector>> parts) {
  if (parts.empty()) return {};
  std::map<Address, std::pair<std::size_t, std::vector<double>>> acc;
  for (const auto& part : parts) {
    for (const auto& fv : part) {
      auto& [seen, values] = acc[fv.address];
      ++seen;
      values.insert(values.end(), fv.values.begin(), fv.values.end());
    }
  }
  std::vector<FeatureVector> out;
  for (auto& [addr, entry] : acc) {
    if (entry.first == parts.size()) out.push_back({addr, FeatureKind::concat, std::move(entry.second)});
  }
  return out;
}

void write_features_csv(std::ostream& out, std::span<const FeatureVector> features) {
  std::size_t width = 0;
  for (const auto& fv : features) width = std::max(width, fv.values.size());
  std::vector<std::string> header = {"address", "kind"};
  for (std::size_t i = 0; i < width; ++i) header.push_back("v" + std::to_string(i));
  csv::write_row(out, header);
  for (const auto& fv : features) {
    std::vector<std::string> row = {fv.address.str(), to_string(fv.kind)};
    for (double v : fv.values) row.push_back(format_double(v));
    csv::write_row(out, row);
  }
}

std::vector<FeatureVector> read_features_csv(std::istream& in, const std::string& source) {
  csv::Reader reader(in);
  std::vector<std::string> f;
  if (!reader.next(f)) throw EmptyFile(source);
  if (f.size() < 2 || f[0] != "address" || f[1] != "kind") {
    throw MalformedRow(reader.line(), "header must start with 'address,kind'");
  }
  std::vector<FeatureVector> out;
  while (reader.next(f)) {
    if (f.size() < 2) throw MalformedRow(reader.line(), "expected address,kind,values...");
    auto a = Address::parse(f[0]);
    auto kind = parse_feature_kind(f[1]);
    if (!a) throw MalformedRow(reader.line(), "address is not 0x + 40 hex digits");
    if (!kind) throw MalformedRow(reader.line(), "unknown feature kind '" + f[1] + "'");
    FeatureVector fv{*a, *kind, {}};
    for (std::size_t i = 2; i < f.size(); ++i) {
      if (f[i].empty()) continue;
      double v = 0;
      auto [ptr, ec] = std::from_chars(f[i].data(), f[i].data() + f[i].size(), v);
      if (ec != std::errc{} || ptr != f[i].data() + f[i].size() || !std::isfinite(v)) {
        throw MalformedRow(reader.line(), "value '" + f[i] + "' is not a finite number");
      }
      fv.values.push_back(v);
    }
    out.push_back(std::move(fv));
  }
  return out;
}

void write_daily_gas_csv(std::ostream& out, const DailyGasSeries& series) {
  csv::write_row(out, {"date", "avg_gas_price_wei"});
  for (const auto& [day, avg] : series.days()) csv::write_row(out, {format_date(day), avg.to_decimal()});
}

DailyGasSeries read_daily_gas_csv(std::istream& in, const std::string& source) {
  csv::Reader reader(in);
  csv::expect_header(reader, {"date", "avg_gas_price_wei"}, source);
  DailyGasSeries series;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() != 2) throw MalformedRow(reader.line(), "expected date,avg_gas_price_wei");
    auto day = parse_date(f[0]);
    auto avg = Ratio::parse_decimal(f[1]);
    if (!day) throw MalformedRow(reader.line(), "date must be YYYY-MM-DD");
    if (!avg || avg->numerator == 0) throw MalformedRow(reader.line(), "average must be a positive decimal");
    series.set(*day, *avg);
  }
  return series;
}

}  // namespace chainprofiler::profiles
