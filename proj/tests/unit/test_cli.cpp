#include <chainprofiler/cli.hpp>
#include <doctest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "synthetic.hpp"

namespace fs = std::filesystem;
using namespace chainprofiler;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Small corpus written once per process.
struct Workspace {
  fs::path dir;
  synthetic::Files files;

  Workspace() {
    dir = fs::temp_directory_path() / ("chainprofiler_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    synthetic::Config cfg;
    cfg.users = 40;
    cfg.days = 20;
    files = synthetic::write_files(synthetic::generate(cfg), dir / "in");
  }
  ~Workspace() { fs::remove_all(dir); }

  fs::path features() {
    const auto p = dir / "features.csv";
    if (!fs::exists(p)) {
      const auto r = run({"features", "--transactions", files.transactions.string(), "--out", p.string()});
      REQUIRE(r.code == 0);
    }
    return p;
  }
};

Workspace& workspace() {
  static Workspace w;
  return w;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("evaluate writes metrics on valid inputs") {
    auto& w = workspace();
    const auto out = w.dir / "eval" / "m.json";
    const auto r = run({"evaluate", "--features", w.features().string(), "--pairs", w.files.ens.string(), "--out",
                        out.string()});
    CHECK(r.code == 0);
    REQUIRE(fs::exists(out));
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["methods"].size() >= 2);
    CHECK(fs::exists(w.dir / "eval" / "m.csv"));
    const auto meta = nlohmann::json::parse(slurp(out.string() + ".meta.json"));
    CHECK(meta["command"] == "evaluate");
    CHECK(meta["version"] == cli::version());
    CHECK(meta["inputs"].size() == 2);
    CHECK(meta["sha256"].get<std::string>().size() == 64);
  }

  TEST_CASE("a missing required flag exits 2 and names it") {
    auto& w = workspace();
    const auto r = run({"evaluate", "--features", w.features().string(), "--out", (w.dir / "x.json").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("--pairs") != std::string::npos);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
    CHECK_FALSE(fs::exists(w.dir / "x.json"));
  }

  TEST_CASE("unknown subcommands exit 2") {
    const auto r = run({"frobnicate"});
    CHECK(r.code == 2);
    CHECK(r.err.find("frobnicate") != std::string::npos);
    CHECK(run({}).code == 2);
  }

  TEST_CASE("help and version exit 0") {
    CHECK(run({"--help"}).code == 0);
    const auto v = run({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find(cli::version()) != std::string::npos);
  }

  TEST_CASE("config values apply unless a flag overrides them") {
    auto& w = workspace();
    const auto cfg = w.dir / "run.cfg";
    {
      std::ofstream out(cfg);
      out << "# fingerprint settings\ndigits = 6\nbins=16\n";
    }
    const auto a = w.dir / "fp_a.json";
    CHECK(run({"fingerprint", "--config", cfg.string(), "--transactions", w.files.transactions.string(), "--out",
               a.string()})
              .code == 0);
    auto j = nlohmann::json::parse(slurp(a));
    CHECK(j["digits"] == 6);
    CHECK(j["entropy"]["bins"] == 16);

    const auto b = w.dir / "fp_b.json";
    CHECK(run({"fingerprint", "--config", cfg.string(), "--digits", "8", "--transactions",
               w.files.transactions.string(), "--out", b.string()})
              .code == 0);
    j = nlohmann::json::parse(slurp(b));
    CHECK(j["digits"] == 8);
    CHECK(j["entropy"]["bins"] == 16);

    {
      std::ofstream out(cfg);
      out << "no_such_key = 1\n";
    }
    const auto c = run({"fingerprint", "--config", cfg.string(), "--transactions", w.files.transactions.string(),
                        "--out", (w.dir / "fp_c.json").string()});
    CHECK(c.code == 2);
    CHECK(c.err.find("no-such-key") != std::string::npos);
  }

  TEST_CASE("a failing command leaves no partial outputs") {
    auto& w = workspace();
    const auto out = w.dir / "partial" / "features.csv";
    const auto blocker = w.dir / "partial" / "blocked";
    fs::create_directories(blocker);
    const auto r = run({"features", "--transactions", w.files.transactions.string(), "--daily-gas-out",
                        blocker.string(), "--out", out.string()});
    CHECK(r.code != 0);
    CHECK_FALSE(fs::exists(out));
    CHECK_FALSE(fs::exists(out.string() + ".meta.json"));
  }

  TEST_CASE("inputs are never modified or overwritten") {
    auto& w = workspace();
    const auto before = slurp(w.files.transactions);
    const auto r = run({"graph", "--transactions", w.files.transactions.string(), "--out",
                        w.files.transactions.string()});
    CHECK(r.code == 2);
    CHECK(slurp(w.files.transactions) == before);
    CHECK(run({"graph", "--transactions", w.files.transactions.string(), "--out", (w.dir / "g.csv").string()}).code ==
          0);
    CHECK(slurp(w.files.transactions) == before);
  }

  TEST_CASE("malformed input exits 2 with one line") {
    auto& w = workspace();
    const auto bad = w.dir / "bad.csv";
    {
      std::ofstream out(bad);
      out << "this,is,not,a,transaction,file\n1,2,3,4,5,6\n";
    }
    const auto r = run({"graph", "--transactions", bad.string(), "--out", (w.dir / "bad_graph.csv").string()});
    CHECK(r.code == 2);
    CHECK(r.err.rfind("chainprofiler graph: ", 0) == 0);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  }

  TEST_CASE("embed without a seed draws and reports one") {
    auto& w = workspace();
    const auto out = w.dir / "emb.csv";
    const auto r = run({"embed", "--transactions", w.files.transactions.string(), "--method", "role2vec", "--dim", "4",
                        "--walks-per-node", "1", "--epochs", "1", "--out", out.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("seed: ") != std::string::npos);
    const auto meta = nlohmann::json::parse(slurp(out.string() + ".meta.json"));
    CHECK(meta["seed"].is_number_unsigned());
  }
}
