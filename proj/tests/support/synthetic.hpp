#pragma once

#include <chainprofiler/chain.hpp>
#include <chainprofiler/ingest.hpp>
#include <chainprofiler/rng.hpp>
#include <chainprofiler/tornado.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace chainprofiler::synthetic {

inline std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

inline Address make_address(std::uint64_t n) {
  const auto a = splitmix64(n ^ 0x5eed5eed5eedULL);
  return Address::from_string("0x" + hex64(a) + hex64(splitmix64(a)) + hex64(splitmix64(a + 1)).substr(0, 8));
}

inline std::string make_hash(std::uint64_t n) {
  const auto a = splitmix64(n ^ 0x7a57a57a5ULL);
  return "0x" + hex64(a) + hex64(splitmix64(a)) + hex64(splitmix64(a + 1)) + hex64(splitmix64(a + 2));
}

struct Config {
  std::size_t users = 250;  // two addresses each
  std::size_t services = 25;
  std::size_t days = 60;
  std::size_t min_txs = 6;
  std::size_t max_txs = 30;
  double ens_fraction = 0.4;
  double mixer_fraction = 0.2;
  std::uint64_t seed = 1;
};

struct Corpus {
  std::vector<Transaction> txs;
  std::vector<Address> user_addresses;  // 2 per user, consecutive
  std::vector<Address> services;
  std::vector<std::pair<std::string, Address>> ens_rows;
  std::vector<tornado::TornadoEvent> events;
  std::vector<std::pair<Address, ingest::ServiceLabel>> labels;
};

inline constexpr std::int64_t kGenesis = 1'577'836'800;  // 2020-01-01

/// Users with two addresses each. Both addresses share an hour-of-day habit,
/// a gas price habit and a few favourite services, so the pairs are
/// recoverable by every profiling method.
inline Corpus generate(const Config& cfg) {
  Rng rng(cfg.seed);
  Corpus c;
  std::uint64_t next_addr = 1;
  std::uint64_t next_tx = 1;
  for (std::size_t s = 0; s < cfg.services; ++s) c.services.push_back(make_address(next_addr++));
  for (std::size_t s = 0; s < cfg.services; ++s) {
    static const char* kCategories[] = {"exchange", "defi", "gambling", "nft", "bridge"};
    c.labels.push_back({c.services[s], {"service" + std::to_string(s), kCategories[s % 5]}});
  }

  auto base_gas = [](std::int64_t day) { return Wei(20 + day % 7) * kGwei; };
  auto add_tx = [&](const Address& from, const std::optional<Address>& to, std::int64_t t, Wei gas_price,
                    bool internal = false) {
    Transaction tx;
    tx.tx_hash = make_hash(next_tx++);
    tx.timestamp = t;
    tx.block_number = static_cast<std::uint64_t>((t - kGenesis) / 13 + 9'000'000);
    tx.from_address = from;
    tx.to_address = to;
    tx.value = Wei(rng.index(1'000'000) + 1) * 1'000'000'000'000ULL;
    if (rng.index(3) == 0) tx.value += rng.index(1'000'000'000);
    tx.gas_price = internal ? Wei(0) : gas_price;
    tx.gas_used = internal ? 0 : 21'000 + rng.index(50'000);
    tx.is_internal = internal;
    c.txs.push_back(tx);
    return tx;
  };

  struct User {
    double hour;
    double gas;
    std::vector<std::size_t> favourites;
  };
  std::vector<User> users;
  for (std::size_t u = 0; u < cfg.users; ++u) {
    User user{rng.uniform() * 24.0, 0.6 + rng.uniform() * 1.6, {}};
    for (int k = 0; k < 3; ++k) user.favourites.push_back(rng.index(cfg.services));
    users.push_back(user);
    c.user_addresses.push_back(make_address(next_addr++));
    c.user_addresses.push_back(make_address(next_addr++));
  }

  for (std::size_t u = 0; u < cfg.users; ++u) {
    const auto& user = users[u];
    for (int side = 0; side < 2; ++side) {
      const auto& self = c.user_addresses[2 * u + side];
      const auto n = cfg.min_txs + rng.index(cfg.max_txs - cfg.min_txs + 1);
      for (std::size_t i = 0; i < n; ++i) {
        const auto day = static_cast<std::int64_t>(rng.index(cfg.days));
        double hour = user.hour + (rng.uniform() - 0.5) * 4.0;
        hour = std::fmod(hour + 24.0, 24.0);
        const auto t = kGenesis + day * kSecondsPerDay + static_cast<std::int64_t>(hour * 3600.0);
        const double factor = user.gas * (0.9 + rng.uniform() * 0.2);
        Wei price = base_gas(day) * static_cast<std::uint64_t>(factor * 1000.0) / 1000;
        if (rng.index(4) == 0) price += rng.index(kGwei - 1) + 1;  // hand-typed price
        std::optional<Address> to;
        const auto pick = rng.index(10);
        if (pick < 7) {
          to = c.services[user.favourites[rng.index(user.favourites.size())]];
        } else if (pick < 9) {
          to = c.user_addresses[rng.index(c.user_addresses.size())];
          if (*to == self) to = c.services[user.favourites[0]];
        }
        add_tx(self, to, t, price);
        if (rng.index(8) == 0) {
          add_tx(c.services[user.favourites[0]], self, t + 30, 0, true);
        }
      }
    }
  }

  for (std::size_t u = 0; u < cfg.users; ++u) {
    if (rng.uniform() < cfg.ens_fraction) {
      const auto name = "user" + std::to_string(u) + ".eth";
      c.ens_rows.push_back({name, c.user_addresses[2 * u]});
      c.ens_rows.push_back({name, c.user_addresses[2 * u + 1]});
    }
  }

  const auto end = kGenesis + static_cast<std::int64_t>(cfg.days) * kSecondsPerDay;
  auto event = [&](tornado::Mixer m, tornado::EventKind k, const Address& a, std::int64_t t, Wei price) {
    c.events.push_back({m, k, a, t, price, make_hash(next_tx++)});
  };
  for (std::size_t u = 0; u < cfg.users; ++u) {
    if (rng.uniform() >= cfg.mixer_fraction) continue;
    const auto mixer = tornado::kMixers[rng.index(tornado::kMixers.size())];
    const auto& dep = c.user_addresses[2 * u];
    const auto& wd = c.user_addresses[2 * u + 1];
    const auto t0 = kGenesis + static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(end - kGenesis) / 2));
    const auto delay = static_cast<std::int64_t>(rng.index(3 * 7 * kSecondsPerDay)) + 60;
    switch (rng.index(4)) {
      case 0:  // address reuse
        event(mixer, tornado::EventKind::deposit, dep, t0, base_gas(0));
        event(mixer, tornado::EventKind::withdraw, dep, t0 + delay, base_gas(0));
        break;
      case 1: {  // unique hand-typed gas price
        const Wei price = base_gas(0) + 1000 + u;
        event(mixer, tornado::EventKind::deposit, dep, t0, price);
        event(mixer, tornado::EventKind::withdraw, wd, t0 + delay, price);
        break;
      }
      case 2:  // direct transfer between the two addresses
        event(mixer, tornado::EventKind::deposit, dep, t0, base_gas(1));
        event(mixer, tornado::EventKind::withdraw, wd, t0 + delay, base_gas(1));
        add_tx(dep, wd, t0 + delay + 3600, base_gas(1));
        break;
      default:  // unlinkable
        event(mixer, tornado::EventKind::deposit, dep, t0, base_gas(2));
        event(mixer, tornado::EventKind::withdraw, make_address(next_addr++), t0 + delay, base_gas(2));
        break;
    }
  }
  for (std::size_t i = 0; i < cfg.users / 2; ++i) {
    const auto mixer = tornado::kMixers[rng.index(tornado::kMixers.size())];
    const auto t = kGenesis + static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(end - kGenesis)));
    const auto kind = rng.index(2) ? tornado::EventKind::deposit : tornado::EventKind::withdraw;
    event(mixer, kind, make_address(next_addr++), t, base_gas(3));
  }

  ingest::canonicalize(c.txs);
  return c;
}

struct Files {
  std::filesystem::path transactions;
  std::filesystem::path ens;
  std::filesystem::path events;
  std::filesystem::path labels;
};

inline Files write_files(const Corpus& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Files f{dir / "transactions.csv", dir / "ens.csv", dir / "events.csv", dir / "labels.csv"};
  {
    std::ofstream out(f.transactions, std::ios::binary);
    ingest::write_transactions_csv(out, c.txs);
  }
  {
    std::ofstream out(f.ens, std::ios::binary);
    out << "ens_name,address\n";
    for (const auto& [name, a] : c.ens_rows) out << name << "," << a.str() << "\n";
  }
  {
    std::ofstream out(f.events, std::ios::binary);
    auto events = c.events;
    tornado::write_events_csv(out, events);
  }
  {
    std::ofstream out(f.labels, std::ios::binary);
    out << "address,service_name,category\n";
    for (const auto& [a, l] : c.labels) out << a.str() << "," << l.service_name << "," << l.category << "\n";
  }
  return f;
}

}  // namespace chainprofiler::synthetic
