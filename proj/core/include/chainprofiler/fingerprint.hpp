#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "chainprofiler/chain.hpp"

namespace chainprofiler::fingerprint {

struct FingerprintModel {
  int digits = 9;
  double change_probability = 0;  // p
  double exponent = 2;            // k
  std::optional<std::size_t> cutoff;

  void validate() const;
};

/// 10^digits; digits must be in [1, 18].
std::uint64_t modulus(int digits);

/// balance mod 10^digits.
std::uint64_t fingerprint(const Wei& balance, int digits);

struct LedgerStep {
  std::string tx_hash;
  std::int64_t timestamp = 0;
  bool sent = false;      // address paid for this step
  bool internal = false;
  SignedWei delta = 0;    // change applied to the balance
  SignedWei balance = 0;  // balance after the step
};

/// Per-address balance trajectories rebuilt from value transfers and fees
/// (gas_used * gas_price, charged to senders of non-internal transactions).
struct BalanceLedger {
  std::map<Address, std::vector<LedgerStep>> accounts;
  /// Set when some balance went negative, i.e. the corpus does not hold the
  /// full history of that address.
  bool approximate = false;

  /// Final balances of accounts whose trajectory never went negative.
  std::map<Address, Wei> consistent_balances() const;
};

/// Replays the corpus in canonical order, starting from `opening` balances
/// (zero when absent).
BalanceLedger replay_balances(std::span<const Transaction> corpus, const std::map<Address, Wei>& opening = {});

struct ChangeRate {
  std::optional<std::size_t> cutoff;
  std::size_t addresses = 0;               // addresses with 1..cutoff sent txs
  std::size_t tx_count = 0;                // their sent transactions
  std::size_t fingerprinting_tx_count = 0; // those changing the low digits
  double p = 0;
  double avg_sent = 0;
};

/// Fraction of sent transactions whose balance change alters the last
/// `digits` digits, over addresses that sent between 1 and `cutoff`
/// transactions. A change alters the fingerprint exactly when its magnitude
/// is not a multiple of 10^digits, so partial ledgers are handled per step.
/// Throws EmptyLedger.
ChangeRate fingerprint_change_rate(const BalanceLedger& ledger, int digits, std::optional<std::size_t> cutoff);

/// Hill estimate k = 1 + n / sum ln(x_i) with x_min = 1. Throws
/// DegenerateSample when fewer than 10 samples exceed x_min.
double fit_power_law(std::span<const double> counts);

/// Integral of x^-k (1-p)^x over [1, inf). With `normalized`, multiplied by
/// (k - 1) so that the weights x^-k integrate to one. Throws NonConvergent
/// for p = 0 with k <= 1.
double survival_probability_integral(double p, double k, bool normalized = false);

/// (1 - p)^avg_x.
double survival_probability_point(double p, double avg_x);

struct FingerprintEntropy {
  std::size_t bins = 0;
  std::vector<std::size_t> histogram;
  double entropy_bits = 0;
  double gain_bits = 0;  // log2(bins) - entropy
};

/// Entropy of fingerprint values binned into `bins` equal ranges of [0, 10^digits).
FingerprintEntropy fingerprint_entropy(std::span<const Wei> balances, int digits, std::size_t bins = 256);

struct CutoffReport {
  ChangeRate rate;
  double survival_point = 0;
  std::optional<double> survival_integral;
};

/// One row per cutoff (nullopt = all addresses). The integral estimator uses
/// `exponent` when given.
std::vector<CutoffReport> cutoff_report(const BalanceLedger& ledger, int digits,
                                        std::span<const std::optional<std::size_t>> cutoffs,
                                        std::optional<double> exponent);

nlohmann::json to_json(std::span<const CutoffReport> rows);

}  // namespace chainprofiler::fingerprint
