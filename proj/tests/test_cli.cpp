#include <cstdlib>
#include <sys/wait.h>

#include "doctest.h"
#include "support.hpp"

namespace {

int run(const std::string& args, const std::string& log) {
  const std::string cmd = std::string("\"") + EVGRAPH_CLI + "\" " + args + " >\"" + log + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const std::string& s) { return "\"" + s + "\""; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("exit codes") {
    testing::TempDir dir("cli_codes");
    const auto log = dir.file("log.txt");
    CHECK(run("--help", log) == 0);
    CHECK(run("frobnicate", log) == 2);
    CHECK(run("retrieve --corpus", log) == 2);
    CHECK(run("ingest --corpus " + q(dir.file("missing.jsonl")), log) == 2);

    {
      std::ofstream bad(dir.file("bad.jsonl"));
      bad << "{\"id\": \"A\", \"sentences\": 3}\n";
    }
    CHECK(run("ingest --corpus " + q(dir.file("bad.jsonl")), log) == 3);
    CHECK(testing::slurp(log).find("line 1") != std::string::npos);

    CHECK(run("ingest --corpus " + q(testing::fixture("mini_corpus.jsonl")) + " --claims " +
                  q(testing::fixture("mini_claims.jsonl")),
              log) == 0);
    CHECK(testing::slurp(log).find("\"claims\":10") != std::string::npos);
  }

  TEST_CASE("stage by stage commands") {
    testing::TempDir dir("cli_stages");
    const auto log = dir.file("log.txt");
    const auto corpus = q(testing::fixture("mini_corpus.jsonl"));
    const auto claims = q(testing::fixture("mini_claims.jsonl"));
    const std::string provider = " --dim 64";

    REQUIRE(run("linearize --corpus " + corpus + " --page Scomadi --out " + q(dir.file("lin.jsonl")), log) == 0);
    CHECK(testing::slurp(dir.file("lin.jsonl")).find("Scomadi_sentence_0") != std::string::npos);

    REQUIRE(run("retrieve --corpus " + corpus + " --claims " + claims + " --k 3 --out " + q(dir.file("ret.jsonl")),
                log) == 0);
    REQUIRE(run("select --corpus " + corpus + " --claims " + claims + " --retrieval " + q(dir.file("ret.jsonl")) +
                    " --mode stl --out " + q(dir.file("sel.jsonl")) + provider,
                log) == 0);
    REQUIRE(run("augment --corpus " + corpus + " --claims " + claims +
                    " --reduction 5 --mutation 3 --seed 1 --out " + q(dir.file("aug.jsonl")),
                log) == 0);
    REQUIRE(run("build-graphs --corpus " + corpus + " --claims " + q(dir.file("aug.jsonl")) +
                    " --split train --k 3 --out " + q(dir.file("train.jsonl")) + provider,
                log) == 0);
    REQUIRE(run("build-graphs --corpus " + corpus + " --claims " + claims + " --split test --selection " +
                    q(dir.file("sel.jsonl")) + " --out " + q(dir.file("test.jsonl")) + " --dump " +
                    q(dir.file("dump.json")) + provider,
                log) == 0);
    REQUIRE(run("train --graphs " + q(dir.file("train.jsonl")) + " --out " + q(dir.file("m.ckpt")) + " --log " +
                    q(dir.file("steps.csv")) + " --steps 20 --lr 1e-3 --batch 8 --hidden 8 --mlp-hidden 8",
                log) == 0);
    CHECK(testing::slurp(dir.file("steps.csv")).rfind("step,", 0) == 0);
    REQUIRE(run("predict --graphs " + q(dir.file("test.jsonl")) + " --model " + q(dir.file("m.ckpt")) +
                    " --claims " + claims + " --out " + q(dir.file("pred.jsonl")),
                log) == 0);
    REQUIRE(run("evaluate --predictions " + q(dir.file("pred.jsonl")) + " --claims " + claims + " --out " +
                    q(dir.file("metrics.json")),
                log) == 0);
    CHECK(testing::slurp(dir.file("metrics.json")).find("\"feverous_score\"") != std::string::npos);

    REQUIRE(run("explain --graphs " + q(dir.file("test.jsonl")) + " --model " + q(dir.file("m.ckpt")) +
                    " --claim 1",
                log) == 0);
    CHECK(testing::slurp(log).find("claim 1 predicted") != std::string::npos);
    CHECK(run("explain --graphs " + q(dir.file("test.jsonl")) + " --model " + q(dir.file("m.ckpt")) +
                  " --claim 12345",
              log) == 3);
    CHECK(run("predict --graphs " + q(dir.file("test.jsonl")) + " --model " + q(dir.file("lin.jsonl")), log) == 3);
  }

  TEST_CASE("run with a config file") {
    testing::TempDir dir("cli_run");
    {
      std::ofstream cfg(dir.file("run.toml"));
      cfg << "[run]\ncorpus = \"" << testing::fixture("mini_corpus.jsonl") << "\"\nclaims = \""
          << testing::fixture("mini_claims.jsonl") << "\"\nout-dir = \"" << dir.file("out")
          << "\"\nreduction = 4\nmutation = 2\ndim = 64\nsteps = 10\nhidden = 8\n";
    }
    CHECK(run("--config " + q(dir.file("run.toml")) + " run", dir.file("log.txt")) == 0);
    CHECK(std::filesystem::exists(dir.file("out/metrics.json")));
  }
}
