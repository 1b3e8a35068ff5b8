#include <CLI11.hpp>

#include <iostream>

#include "hq/census.hpp"
#include "hq/cli.hpp"

using namespace hq;
using namespace hq::cli;

namespace {

void addCommon(CLI::App* app, RunConfig& cfg) {
    app->add_option("--jobs", cfg.jobs, "worker threads")->check(CLI::PositiveNumber);
    app->add_option("--solver", cfg.solver, "`embedded` or a command running a DIMACS solver");
    app->add_option("--seed", cfg.seed, "seed for the embedded solver and sampling");
    app->add_option("--node-budget", cfg.nodeBudget, "maximum number of circuit gates");
}

void addCensusOptions(CLI::App* app, RunConfig& cfg) {
    app->add_option("--shards", cfg.shards, "shard count of the census files")->check(CLI::PositiveNumber);
    app->add_option("--out", cfg.out, "output directory");
    app->add_flag("--include-k6", cfg.includeK6, "allow the long k=6 run");
    app->add_flag("--check-only", cfg.checkOnly, "aggregate existing census files without solving");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Census, niceness and compilation of H-queries"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* census = app.add_subcommand("census", "enumerate and classify the canonical functions for one k");
    census->add_option("--k", cfg.k, "number of the last variable")->required();
    addCommon(census, cfg);
    addCensusOptions(census, cfg);

    auto* table1 = app.add_subcommand("table1", "census counts for k = 1..5 as a table");
    addCommon(table1, cfg);
    addCensusOptions(table1, cfg);

    std::string fnSpec;
    std::optional<int> k;
    std::optional<std::filesystem::path> dot, circuit;
    std::filesystem::path dbPath;

    auto* inspect = app.add_subcommand("inspect", "report on a single function");
    inspect->add_option("function", fnSpec, "clauses such as (2|3)&(0|3), or k:K table:HEX")->required();
    inspect->add_option("--k", k, "number of the last variable");
    inspect->add_option("--dot", dot, "write the Hasse diagram of the CNF lattice");
    addCommon(inspect, cfg);

    auto* probability = app.add_subcommand("probability", "exact probability of the H-query on a database");
    probability->add_option("function", fnSpec, "the query function")->required();
    probability->add_option("database", dbPath, "database file")->required();
    probability->add_option("--k", k, "number of the last variable");
    probability->add_option("--circuit", circuit, "write the compiled circuit");
    addCommon(probability, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (census->parsed()) {
            CensusRow row = cmdCensus(cfg, std::cerr);
            std::cout << formatReport({{row}});
            return kExitOk;
        }
        if (table1->parsed()) {
            Report report = cmdTable1(cfg, std::cerr);
            std::cout << renderTable1(report);
            for (const auto& row : report.rows)
                if (row.counts.bad > 0) std::cout << "*** BAD functions found for k=" << row.k << " ***\n";
            return kExitOk;
        }
        if (inspect->parsed()) return cmdInspect(fnSpec, k, dot, cfg, std::cout);
        if (probability->parsed()) return cmdProbability(fnSpec, k, dbPath, circuit, cfg, std::cout);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code;
    } catch (const BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBudget;
    } catch (const SolverUnknownError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolverUnknown;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitUsage;
}
