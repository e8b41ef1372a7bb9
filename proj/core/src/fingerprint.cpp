#include "chainprofiler/fingerprint.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <nlohmann/json.hpp>

#include "chainprofiler/errors.hpp"

namespace chainprofiler::fingerprint {
namespace {

bool multiple_of(const SignedWei& delta, std::uint64_t m) { return delta % m == 0; }

}  // namespace

void FingerprintModel::validate() const {
  if (digits < 1 || digits > 18) throw InvalidArgument("digits must be in [1, 18]");
  if (!(change_probability >= 0 && change_probability <= 1)) throw InvalidArgument("p must be in [0, 1]");
  if (!(exponent > 1)) throw InvalidArgument("power-law exponent must exceed 1");
}

std::uint64_t modulus(int digits) {
  if (digits < 1 || digits > 18) throw InvalidArgument("digits must be in [1, 18]");
  std::uint64_t m = 1;
  for (int i = 0; i < digits; ++i) m *= 10;
  return m;
}

std::uint64_t fingerprint(const Wei& balance, int digits) {
  return static_cast<std::uint64_t>(balance % modulus(digits));
}

std::map<Address, Wei> BalanceLedger::consistent_balances() const {
  std::map<Address, Wei> out;
  for (const auto& [a, steps] : accounts) {
    bool ok = true;
    for (const auto& s : steps) ok = ok && s.balance >= 0;
    if (ok && !steps.empty()) out[a] = static_cast<Wei>(steps.back().balance);
  }
  return out;
}

BalanceLedger replay_balances(std::span<const Transaction> corpus, const std::map<Address, Wei>& opening) {
  BalanceLedger ledger;
  std::map<Address, SignedWei> balance;
  for (const auto& [a, b] : opening) balance[a] = static_cast<SignedWei>(b);

  auto apply = [&](const Address& a, const Transaction& tx, bool sent, const SignedWei& delta) {
    auto& b = balance[a];
    b += delta;
    if (b < 0) ledger.approximate = true;
    ledger.accounts[a].push_back({tx.tx_hash, tx.timestamp, sent, tx.is_internal, delta, b});
  };

  for (const auto& tx : corpus) {
    const SignedWei fee = tx.is_internal ? SignedWei(0) : SignedWei(tx.gas_price) * tx.gas_used;
    const SignedWei value(tx.value);
    if (tx.to_address && *tx.to_address == tx.from_address) {
      apply(tx.from_address, tx, !tx.is_internal, -fee);
      continue;
    }
    apply(tx.from_address, tx, !tx.is_internal, -(value + fee));
    if (tx.to_address) apply(*tx.to_address, tx, false, value);
  }
  return ledger;
}

ChangeRate fingerprint_change_rate(const BalanceLedger& ledger, int digits, std::optional<std::size_t> cutoff) {
  if (ledger.accounts.empty()) throw EmptyLedger("ledger has no accounts");
  const auto m = modulus(digits);
  ChangeRate r;
  r.cutoff = cutoff;
  for (const auto& [a, steps] : ledger.accounts) {
    std::size_t sent = 0, changing = 0;
    for (const auto& s : steps) {
      if (!s.sent) continue;
      ++sent;
      if (!multiple_of(s.delta, m)) ++changing;
    }
    if (sent == 0 || (cutoff && sent > *cutoff)) continue;
    ++r.addresses;
    r.tx_count += sent;
    r.fingerprinting_tx_count += changing;
  }
  if (r.tx_count > 0) r.p = static_cast<double>(r.fingerprinting_tx_count) / static_cast<double>(r.tx_count);
  if (r.addresses > 0) r.avg_sent = static_cast<double>(r.tx_count) / static_cast<double>(r.addresses);
  return r;
}

double fit_power_law(std::span<const double> counts) {
  double log_sum = 0;
  std::size_t above = 0;
  for (double x : counts) {
    if (!(x >= 1) || !std::isfinite(x)) throw InvalidArgument("power-law samples must be finite and >= 1");
    if (x > 1) ++above;
    log_sum += std::log(x);
  }
  if (above == 0) throw DegenerateSample("all samples equal x_min");
  if (above < 10) throw DegenerateSample("need at least 10 samples above x_min, got " + std::to_string(above));
  return 1.0 + static_cast<double>(counts.size()) / log_sum;
}

double survival_probability_integral(double p, double k, bool normalized) {
  if (!(p >= 0 && p <= 1)) throw InvalidArgument("p must be in [0, 1]");
  if (!std::isfinite(k)) throw InvalidArgument("k must be finite");
  if (p == 0 && k <= 1) throw NonConvergent("integral of x^-k over [1, inf) diverges for k <= 1");
  if (normalized && !(k > 1)) throw InvalidArgument("normalization needs k > 1");
  const double scale = normalized ? k - 1 : 1.0;
  if (p == 1) return 0.0;
  if (p == 0) return scale / (k - 1);
  if (k < 0) throw InvalidArgument("k must be non-negative");

  const double lambda = -std::log1p(-p);
  auto f = [&](double x) { return std::exp(-k * std::log(x) - lambda * x); };
  // x^-k >= e^{-k(x-1)} on [1, inf), so the integral is at least f(1)/(lambda + k).
  const double lower_bound = f(1.0) / (lambda + k);
  auto tail = [&](double x) { return std::exp(-k * std::log(x) - lambda * x) / lambda; };
  double upper = 2.0;
  while (tail(upper) > 1e-13 * lower_bound) upper *= 2.0;

  using boost::math::quadrature::gauss_kronrod;
  double sum = 0;
  for (double a = 1.0; a < upper; a *= 2.0) {
    double err = 0;
    sum += gauss_kronrod<double, 61>::integrate(f, a, 2.0 * a, 15, 1e-14, &err);
  }
  return scale * sum;
}

double survival_probability_point(double p, double avg_x) {
  if (!(p >= 0 && p <= 1)) throw InvalidArgument("p must be in [0, 1]");
  if (!(avg_x > 0)) throw InvalidArgument("average transaction count must be positive");
  return std::pow(1.0 - p, avg_x);
}

FingerprintEntropy fingerprint_entropy(std::span<const Wei> balances, int digits, std::size_t bins) {
  if (balances.empty()) throw EmptyInput("no balances");
  if (bins < 1) throw InvalidArgument("bins must be at least 1");
  const auto m = modulus(digits);
  FingerprintEntropy out;
  out.bins = bins;
  out.histogram.assign(bins, 0);
  for (const auto& b : balances) {
    const auto fp = fingerprint(b, digits);
    const auto bin = static_cast<std::size_t>(Wei(fp) * bins / m);
    ++out.histogram[bin];
  }
  const auto n = static_cast<double>(balances.size());
  for (auto c : out.histogram) {
    if (c == 0) continue;
    const double q = static_cast<double>(c) / n;
    out.entropy_bits -= q * std::log2(q);
  }
  out.gain_bits = std::log2(static_cast<double>(bins)) - out.entropy_bits;
  return out;
}

std::vector<CutoffReport> cutoff_report(const BalanceLedger& ledger, int digits,
                                        std::span<const std::optional<std::size_t>> cutoffs,
                                        std::optional<double> exponent) {
  std::vector<CutoffReport> rows;
  for (const auto& c : cutoffs) {
    CutoffReport row;
    row.rate = fingerprint_change_rate(ledger, digits, c);
    row.survival_point = row.rate.addresses ? survival_probability_point(row.rate.p, row.rate.avg_sent) : 1.0;
    if (exponent && *exponent > 1) row.survival_integral = survival_probability_integral(row.rate.p, *exponent);
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json to_json(std::span<const CutoffReport> rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"cutoff", r.rate.cutoff ? nlohmann::json(*r.rate.cutoff) : nlohmann::json("all")},
                   {"addresses", r.rate.addresses},
                   {"txs", r.rate.tx_count},
                   {"fingerprinting_txs", r.rate.fingerprinting_tx_count},
                   {"avg_sent", r.rate.avg_sent},
                   {"p", r.rate.p},
                   {"survival_point", r.survival_point},
                   {"survival_integral",
                    r.survival_integral ? nlohmann::json(*r.survival_integral) : nlohmann::json(nullptr)}});
  }
  return out;
}

}  // namespace chainprofiler::fingerprint
