// Writes a synthetic corpus: make_corpus <dir> [users] [seed]
#include <cstdlib>
#include <iostream>

#include "synthetic.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_corpus <dir> [users] [seed]\n";
    return 2;
  }
  chainprofiler::synthetic::Config cfg;
  if (argc > 2) cfg.users = std::strtoull(argv[2], nullptr, 10);
  if (argc > 3) cfg.seed = std::strtoull(argv[3], nullptr, 10);
  const auto corpus = chainprofiler::synthetic::generate(cfg);
  const auto files = chainprofiler::synthetic::write_files(corpus, argv[1]);
  std::cout << corpus.txs.size() << " transactions, " << corpus.events.size() << " mixer events -> "
            << files.transactions.parent_path().string() << "\n";
}
