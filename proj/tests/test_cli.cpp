#include <doctest.h>

#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>

#include "hq/cli.hpp"

using namespace hq;
using namespace hq::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) { fs::remove_all(path); }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int codeOf(const std::function<void()>& f) {
    try {
        f();
    } catch (const CliError& e) {
        return e.code;
    }
    return kExitOk;
}

}  // namespace

TEST_CASE("census for k = 3 and its checkpoint") {
    TempDir tmp("hq_cli_census");
    RunConfig cfg;
    cfg.k = 3;
    cfg.shards = 4;
    cfg.out = tmp.path;
    std::ostringstream log;
    CensusRow row = cmdCensus(cfg, log);
    CHECK(row.counts == CensusCounts{30, 2, 2, 0, 0});
    CHECK_FALSE(row.fromCheckpoint);
    CHECK(row.niceWitnesses.size() == 2);
    std::string report = slurp(tmp.path / "census" / "k3" / "report.txt");
    CHECK(report.find("k3.SND=2\n") != std::string::npos);

    // a completed checkpoint is reused as is
    CensusRow again = cmdCensus(cfg, log);
    CHECK(again.fromCheckpoint);
    CHECK(formatReport({{again}}) == formatReport({{row}}));
    CHECK(readCensus(tmp.path, 3).size() == 30);

    cfg.checkOnly = true;
    CHECK(cmdCensus(cfg, log).counts == row.counts);

    // a different shard count cannot resume this directory
    cfg.checkOnly = false;
    cfg.shards = 5;
    CHECK(codeOf([&] { cmdCensus(cfg, log); }) == kExitUsage);
}

TEST_CASE("an interrupted census resumes at shard granularity") {
    TempDir tmp("hq_cli_resume");
    RunConfig cfg;
    cfg.k = 4;
    cfg.shards = 3;
    cfg.out = tmp.path;
    std::ostringstream log;
    CensusRow full = cmdCensus(cfg, log);

    // drop the completion marker and one shard, as if killed mid-run
    fs::path dir = tmp.path / "census" / "k4";
    std::string manifest = slurp(dir / "MANIFEST");
    std::ofstream(dir / "MANIFEST") << manifest.substr(0, manifest.find("R="));
    fs::remove(dir / "shard1.txt");
    CensusRow resumed = cmdCensus(cfg, log);
    CHECK_FALSE(resumed.fromCheckpoint);
    CHECK(resumed.counts == full.counts);
    CHECK(formatReport({{resumed}}) == formatReport({{full}}));
    CHECK(fs::exists(dir / "shard1.txt"));
}

TEST_CASE("census argument errors") {
    RunConfig cfg;
    std::ostringstream log;
    cfg.k = 0;
    CHECK(codeOf([&] { cmdCensus(cfg, log); }) == kExitUsage);
    cfg.k = 3;
    cfg.jobs = 0;
    CHECK(codeOf([&] { cmdCensus(cfg, log); }) == kExitUsage);

    TempDir tmp("hq_cli_k6");
    cfg.jobs = 1;
    cfg.k = 6;
    cfg.out = tmp.path;
    CHECK(codeOf([&] { cmdCensus(cfg, log); }) == kExitUnsupported);
    cfg.k = 2;
    cfg.checkOnly = true;
    CHECK(codeOf([&] { cmdCensus(cfg, log); }) == kExitIo);
}

TEST_CASE("a solver that never answers stops the census") {
    TempDir tmp("hq_cli_unknown");
    RunConfig cfg;
    cfg.k = 3;
    cfg.out = tmp.path;
    cfg.solver = "true";
    std::ostringstream log;
    CHECK(codeOf([&] { cmdCensus(cfg, log); }) == kExitSolverUnknown);
}

TEST_CASE("table rendering") {
    Report r;
    r.rows.push_back({3, {30, 2, 2, 0, 0}, 0.5, false, {}, {}, {}});
    std::string t = renderTable1(r);
    CHECK(t.find("|co-N(k)|") != std::string::npos);
    CHECK(t.find(" 3          30           2           2           0           0\n") != std::string::npos);
    CHECK(formatReport(r).find("0.5") == std::string::npos);
}

TEST_CASE("inspect") {
    RunConfig cfg;
    std::ostringstream q9;
    TempDir tmp("hq_cli_inspect");
    fs::create_directories(tmp.path);
    CHECK(cmdInspect("(2|3)&(0|3)&(1|3)&(0|1|2)", std::nullopt, tmp.path / "q9.dot", cfg, q9) == kExitOk);
    CHECK(q9.str().find("mobius(bottom,top): 0\n") != std::string::npos);
    CHECK(q9.str().find("safe: yes\n") != std::string::npos);
    CHECK(q9.str().find("nice(phi): SAT\n") != std::string::npos);
    CHECK(q9.str().find("class: N\n") != std::string::npos);
    CHECK(slurp(tmp.path / "q9.dot").find("digraph") != std::string::npos);

    std::ostringstream diamond;
    cmdInspect("0&1", 1, std::nullopt, cfg, diamond);
    CHECK(diamond.str().find("mobius(bottom,top): 1\n") != std::string::npos);
    CHECK(diamond.str().find("safe: no\n") != std::string::npos);
    CHECK(diamond.str().find("nice(phi): UNSAT\n") != std::string::npos);

    std::ostringstream co;
    cmdInspect("24&034&013&12&15&05&35&23&02&25&014&45", 5, std::nullopt, cfg, co);
    CHECK(co.str().find("safe: yes\n") != std::string::npos);
    CHECK(co.str().find("nice(phi): UNSAT\n") != std::string::npos);
    CHECK(co.str().find("nice(not phi): SAT\n") != std::string::npos);
    CHECK(co.str().find("class: co-N\n") != std::string::npos);

    std::ostringstream degenerate;
    cmdInspect("0&1", 2, std::nullopt, cfg, degenerate);
    CHECK(degenerate.str().find("lattice: skipped (degenerate function)") != std::string::npos);

    std::ostringstream sink;
    CHECK(codeOf([&] { cmdInspect("0&|", std::nullopt, std::nullopt, cfg, sink); }) == kExitUsage);
    CHECK(codeOf([&] { cmdInspect("0", 13, std::nullopt, cfg, sink); }) == kExitUsage);
}

TEST_CASE("probability") {
    TempDir tmp("hq_cli_probability");
    fs::create_directories(tmp.path);
    RunConfig cfg;
    const std::string q9 = "(2|3)&(0|3)&(1|3)&(0|1|2)";

    std::ofstream(tmp.path / "half.txt") << "R a 1/2\nS1 a b 1/2\nS2 a b 1/2\nS3 a b 1/2\nT b 1/2\n";
    std::ostringstream half;
    CHECK(cmdProbability(q9, std::nullopt, tmp.path / "half.txt", tmp.path / "c.txt", cfg, half) == kExitOk);
    CHECK(half.str().find("probability: 3/16\n") != std::string::npos);
    CHECK(half.str().find("(agrees)") != std::string::npos);
    CHECK(slurp(tmp.path / "c.txt").find("output ") != std::string::npos);

    std::ofstream(tmp.path / "ones.txt") << "R a 1\nS1 a b 1\nS2 a b 1\nS3 a b 1\nT b 1\n";
    std::ostringstream ones;
    cmdProbability(q9, std::nullopt, tmp.path / "ones.txt", std::nullopt, cfg, ones);
    CHECK(ones.str().find("probability: 1\n") != std::string::npos);

    std::ofstream(tmp.path / "empty.txt") << "# nothing\n";
    std::ostringstream empty;
    cmdProbability(q9, std::nullopt, tmp.path / "empty.txt", std::nullopt, cfg, empty);
    CHECK(empty.str().find("probability: 0\n") != std::string::npos);

    std::ostringstream co;
    cmdProbability("24&034&013&12&15&05&35&23&02&25&014&45", 5, tmp.path / "empty.txt", std::nullopt, cfg, co);
    CHECK(co.str().find("route: co-nice\n") != std::string::npos);

    std::ofstream(tmp.path / "bad.txt") << "S4 a b 1\n";
    std::ostringstream sink;
    CHECK(codeOf([&] { cmdProbability(q9, std::nullopt, tmp.path / "bad.txt", std::nullopt, cfg, sink); }) ==
          kExitUsage);
    CHECK(codeOf([&] { cmdProbability(q9, std::nullopt, tmp.path / "missing.txt", std::nullopt, cfg, sink); }) ==
          kExitIo);
    cfg.nodeBudget = 5;
    CHECK(codeOf([&] { cmdProbability(q9, std::nullopt, tmp.path / "half.txt", std::nullopt, cfg, sink); }) ==
          kExitBudget);
}
