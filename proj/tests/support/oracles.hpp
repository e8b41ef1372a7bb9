#pragma once

#include <chainprofiler/chain.hpp>
#include <chainprofiler/tornado.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <string>
#include <tuple>

namespace chainprofiler::oracle {

/// (deposit tx, withdraw tx, heuristic)
using LinkKey = std::tuple<std::string, std::string, int>;

inline std::multiset<LinkKey> link_keys(std::span<const tornado::Link> links) {
  std::multiset<LinkKey> out;
  for (const auto& l : links) out.emplace(l.deposit.tx_hash, l.withdraw.tx_hash, l.heuristic);
  return out;
}

/// Every (deposit, withdraw) pair checked against each heuristic's predicate directly.
inline std::multiset<LinkKey> heuristic_scan(std::span<const tornado::TornadoEvent> events,
                                             std::span<const Transaction> corpus) {
  using tornado::EventKind;
  std::multiset<LinkKey> out;
  for (const auto& d : events) {
    if (d.kind != EventKind::deposit) continue;
    for (const auto& w : events) {
      if (w.kind != EventKind::withdraw || w.mixer != d.mixer) continue;
      if (d.address == w.address) out.emplace(d.tx_hash, w.tx_hash, 1);

      if (d.gas_price == w.gas_price && d.gas_price % kGwei != 0 && d.timestamp < w.timestamp) {
        std::size_t deposits = 0, withdraws = 0;
        for (const auto& e : events) {
          if (e.mixer != d.mixer || e.gas_price != d.gas_price) continue;
          (e.kind == EventKind::deposit ? deposits : withdraws)++;
        }
        if (deposits == 1 && withdraws == 1) out.emplace(d.tx_hash, w.tx_hash, 2);
      }

      if (d.address != w.address) {
        for (const auto& tx : corpus) {
          if (!tx.to_address) continue;
          if ((tx.from_address == d.address && *tx.to_address == w.address) ||
              (tx.from_address == w.address && *tx.to_address == d.address)) {
            out.emplace(d.tx_hash, w.tx_hash, 3);
            break;
          }
        }
      }
    }
  }
  return out;
}

/// Integral of x^-k (1-p)^x over [1, inf) by the trapezoid rule in log space
/// (x = e^t), cut where (1-p)^x is negligible. Needs 0 < p < 1.
inline double trapezoid_survival(double p, double k, int steps = 400'000) {
  const double lambda = -std::log1p(-p);
  const double top = std::log(std::max(2.0, 60.0 / lambda));
  const double h = top / steps;
  auto g = [&](double t) { return std::exp((1 - k) * t - lambda * std::exp(t)); };
  double sum = 0.5 * (g(0) + g(top));
  for (int i = 1; i < steps; ++i) sum += g(i * h);
  return sum * h;
}

}  // namespace chainprofiler::oracle
