#ifdef DCA_CLI_PATH
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("dca_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Runs the CLI, captures stdout+stderr to `log`, returns the exit status.
int dca(const std::string& args, const std::string& log = "last.log") {
  const std::string cmd = std::string(DCA_CLI_PATH) + " " + args + " > " + (workdir() / log).string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string w(const std::string& name) { return (workdir() / name).string(); }

void ensure_corpus() {
  static bool done = false;
  if (done) return;
  REQUIRE(dca("generate --model dm --k 3 --j 30 --docs 80 --length 40 --seed 3 --out " + w("data")) == 0);
  done = true;
}

}  // namespace

TEST_CASE("cli: generate writes a self-describing corpus") {
  ensure_corpus();
  for (const char* f : {"docword.txt", "vocab.txt", "truth.json"}) CHECK(fs::exists(workdir() / "data" / f));
}

TEST_CASE("cli: fit is deterministic given the seed") {
  ensure_corpus();
  for (const std::string engine : {"variational", "collapsed"}) {
    const std::string base = "fit --corpus " + w("data/docword.txt") + " --model dm --k 3 --seed 7 --algorithm " + engine +
                             (engine == "collapsed" ? " --burn-in 20 --samples 30" : "");
    REQUIRE(dca(base + " --out " + w("run1_" + engine)) == 0);
    REQUIRE(dca(base + " --out " + w("run2_" + engine)) == 0);
    for (const char* f : {"model.json", "scores.tsv", "states.tsv"}) {
      const fs::path a = workdir() / ("run1_" + engine) / f, b = workdir() / ("run2_" + engine) / f;
      if (!fs::exists(a)) continue;
      CHECK_MESSAGE(slurp(a) == slurp(b), engine << " " << f);
    }
    const std::string scores = slurp(workdir() / ("run1_" + engine) / "scores.tsv");
    CHECK(scores.rfind("# dca scores version=1 family=dm engine=" + engine + " K=3 seed=7", 0) == 0);
  }
}

TEST_CASE("cli: eval with stored states reproduces the final bound") {
  ensure_corpus();
  REQUIRE(dca("fit --corpus " + w("data/docword.txt") + " --model dm --k 3 --seed 1 --out " + w("evalfit")) == 0);
  REQUIRE(dca("eval --corpus " + w("data/docword.txt") + " --model-file " + w("evalfit/model.json") + " --states " +
              w("evalfit/states.tsv"), "eval.log") == 0);
  auto last_value = [](const std::string& text, const std::string& key) {
    const auto pos = text.rfind(key);
    REQUIRE(pos != std::string::npos);
    return std::stod(text.substr(pos + key.size()));
  };
  const double total = last_value(slurp(workdir() / "eval.log"), "# total\t");
  const double final_bound = last_value(slurp(workdir() / "evalfit/report.tsv"), "# final\t");
  CHECK(std::abs(total - final_bound) <= 1e-6);
}

TEST_CASE("cli: k sweep") {
  ensure_corpus();
  REQUIRE(dca("eval --corpus " + w("data/docword.txt") + " --model dm --alpha 0.5 --k-sweep 2,3 --seed 2", "sweep.log") == 0);
  const std::string out = slurp(workdir() / "sweep.log");
  CHECK(out.find("K\tnll_bits\tnll_nats\tdocuments") != std::string::npos);
  CHECK(out.find("\n2\t") != std::string::npos);
  CHECK(out.find("\n3\t") != std::string::npos);
}

TEST_CASE("cli: topics") {
  ensure_corpus();
  REQUIRE(dca("fit --corpus " + w("data/docword.txt") + " --model dm --k 2 --seed 1 --out " + w("topicfit")) == 0);
  CHECK(dca("topics --model " + w("topicfit/model.json") + " --vocab " + w("data/vocab.txt") + " --top 0", "top0.log") == 0);
  const std::string header = slurp(workdir() / "top0.log");
  CHECK(std::count(header.begin(), header.end(), '\n') == 2);
  CHECK(dca("topics --model " + w("topicfit/model.json") + " --vocab " + w("data/vocab.txt") + " --top 3", "top3.log") == 0);
  const std::string top = slurp(workdir() / "top3.log");
  CHECK(std::count(top.begin(), top.end(), '\n') == 2 + 2 * 3);
  CHECK(dca("topics --model " + w("topicfit/model.json") + " --vocab " + w("missing.txt")) != 0);
}

TEST_CASE("cli: grouped roll-call corpus") {
  REQUIRE(dca("generate --model dm --k 2 --pairs 6 --docs 60 --seed 4 --out " + w("votes")) == 0);
  CHECK(fs::exists(workdir() / "votes" / "groups.txt"));
  REQUIRE(dca("fit --corpus " + w("votes/docword.txt") + " --groups " + w("votes/groups.txt") +
              " --model dm --k 2 --alpha 0.1 --seed 1 --out " + w("votefit")) == 0);
  REQUIRE(dca("topics --model " + w("votefit/model.json") + " --vocab " + w("votes/vocab.txt"), "members.log") == 0);
  const std::string table = slurp(workdir() / "members.log");
  CHECK(std::count(table.begin(), table.end(), '\n') == 2 + 2);
  const auto header = table.substr(table.find('\n') + 1);
  CHECK(std::count(header.begin(), header.begin() + static_cast<long>(header.find('\n')), '\t') == 6);
}

TEST_CASE("cli: exit codes") {
  ensure_corpus();
  const std::string corpus = " --corpus " + w("data/docword.txt");
  CHECK(dca("fit" + corpus + " --model gp --k 2 --rho 0.5") == 2);
  CHECK(dca("fit" + corpus + " --model dm --algorithm nmf --k 2") == 2);
  CHECK(dca("fit" + corpus + " --model cgp --algorithm variational --rho 0.2 --k 2") == 2);
  CHECK(dca("fit" + corpus + " --model dm --k 2 --beta 1") == 2);
  CHECK(dca("fit --model dm --k 2") == 2);
  CHECK(dca("no-such-command") == 2);

  std::ofstream(w("bad.txt")) << "1\n3\n1\n1 7 1\n";
  CHECK(dca("fit --corpus " + w("bad.txt") + " --model dm --k 2") == 3);

  // A document with a word id the model does not know.
  std::ofstream(w("oov.txt")) << "1\n40\n2\n1 2 1\n1 35 2\n";
  CHECK(dca("eval --corpus " + w("oov.txt") + " --model-file " + w("run1_variational/model.json"), "oov.log") == 3);
  CHECK(slurp(workdir() / "oov.log").find("35") != std::string::npos);

  REQUIRE(dca("fit" + corpus + " --model gp --algorithm nmf --k 2 --cycles 50 --out " + w("nmffit")) == 0);
  CHECK(slurp(workdir() / "nmffit/report.tsv").find("# divergence") != std::string::npos);
}
#endif
