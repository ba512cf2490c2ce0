// pubrank-fixture: writes the synthetic data sets used by the test suites, so
// they can be inspected or fed to the pubrank CLI by hand.

#include <iostream>

#include <CLI11.hpp>

#include "pubrank/errors.hpp"
#include "pubrank/files.hpp"
#include "pubrank/testkit/e2e.hpp"
#include "pubrank/testkit/synthetic.hpp"

using namespace pubrank;

int main(int argc, char** argv) {
  CLI::App app{"Generate synthetic pubrank fixtures"};
  app.require_subcommand(1);

  std::string out;
  std::uint64_t seed = 11;
  std::size_t total = 1000;
  auto* pubmed = app.add_subcommand("pubmed", "PubMed-style XML with absent abstracts, duplicates and broken records");
  pubmed->add_option("--out", out)->required();
  pubmed->add_option("--seed", seed);
  pubmed->add_option("--records", total);

  std::string root;
  testkit::E2EOptions e2e_options;
  auto* e2e = app.add_subcommand("e2e", "Corpus, questions, index and recorded model exchanges");
  e2e->add_option("--out", root)->required();
  e2e->add_option("--dim", e2e_options.dimension);
  e2e->add_option("--retrieve-k", e2e_options.retrieve_k);

  std::size_t per_type = 11;
  auto* questions = app.add_subcommand("questions", "BioASQ-shaped questions with gold material");
  questions->add_option("--out", out)->required();
  questions->add_option("--seed", seed);
  questions->add_option("--per-type", per_type);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*pubmed) {
      if (total < 90) throw UsageError("--records must be at least 90");
      auto fx = testkit::make_ingest_fixture(seed, total);
      write_file(out, fx.xml);
      std::cout << fx.expected.records_seen << " records, " << fx.expected.kept << " expected to survive\n";
    } else if (*e2e) {
      auto fx = testkit::build_e2e_fixture(root, e2e_options);
      std::cout << "replay with: pubrank pipeline --config " << fx.config.string() << '\n';
    } else if (*questions) {
      write_file(out, dump_bioasq(testkit::make_questions(per_type, seed)));
    }
  } catch (const Error& e) {
    std::cerr << "pubrank-fixture: error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  }
  return 0;
}
