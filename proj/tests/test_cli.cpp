#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sparsex/cli.hpp"

using namespace sparsex;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() / "sparsex_cli_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("strong measure example passes its bound") {
    const auto r = run({"strong-measure", "--n", "14", "--k", "12", "--m", "4", "--delta", "0.015625", "--K", "20",
                        "--families", "200", "--seed", "1", "--assert"});
    CHECK(r.code == exit_ok);
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "experiment,n,k,m,s,p,K,c,delta,mode,mean_sd,std_err,bound,pass");
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        CHECK(line.size() > 5);
        CHECK(line.substr(line.size() - 5) == ",true");
    }
    CHECK(rows == 3);
}

TEST_CASE("asserted bound failure exits 1") {
    // Near-zero matrices collapse the output.
    const auto r = run({"strong-measure", "--families", "20", "--p", "0.001", "--assert"});
    CHECK(r.code == exit_bound_failed);
    CHECK(r.out.find(",false") != std::string::npos);
    const auto quiet = run({"strong-measure", "--families", "20", "--p", "0.001"});
    CHECK(quiet.code == exit_ok);
    CHECK(quiet.out == r.out);
}

TEST_CASE("verify appendices passes") {
    const auto r = run({"verify-appendices", "--seed", "1"});
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("false") == std::string::npos);
    CHECK(r.out.rfind("check,cases,violations,worst_margin,pass\n", 0) == 0);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run({"strong-measure", "--bogus", "1"}).code == exit_usage);
    CHECK(run({}).code == exit_usage);
    CHECK(run({"no-such-command"}).code == exit_usage);
    CHECK(run({"strong-measure", "--n", "abc"}).code == exit_usage);
    const auto bad = run({"strong-measure", "--m", "13", "--k", "12"});
    CHECK(bad.code == exit_usage);
    CHECK(bad.err.find("invalid parameter") != std::string::npos);
    CHECK(run({"lowerbound-sweep", "--source", "flat"}).code == exit_usage);
}

TEST_CASE("resource and construction errors have distinct codes") {
    CHECK(run({"lowerbound-sweep", "--n", "64", "--m", "20", "--weights", "1", "--matrices", "1", "--num-x", "16"}).code ==
          exit_resource);
    const auto r = run({"construct-b", "--m", "6", "--s", "3", "--row-weight", "1", "--max-tries", "200"});
    CHECK(r.code == exit_construction);
    CHECK(r.err.find("dependent") != std::string::npos);
}

TEST_CASE("help lists every flag with its default") {
    const auto top = run({"--help"});
    CHECK(top.code == exit_ok);
    for (const char* cmd : {"strong-measure", "weak-measure", "construct-b", "lowerbound-sweep", "prg-build",
                            "prg-eval", "verify-appendices", "baseline-pairwise"}) {
        CHECK(top.out.find(cmd) != std::string::npos);
    }
    const auto sm = run({"strong-measure", "--help"});
    CHECK(sm.code == exit_ok);
    for (const char* flag : {"--n", "--k", "--m", "--delta", "--K", "--families", "--seed", "--workers", "--out",
                             "--assert", "--tight-p", "--p"}) {
        CHECK(sm.out.find(flag) != std::string::npos);
    }
    CHECK(sm.out.find("[200]") != std::string::npos);
    CHECK(sm.out.find("[0.015625]") != std::string::npos);
    const auto lb = run({"lowerbound-sweep", "--help"});
    CHECK(lb.out.find("[1048576]") != std::string::npos);
    CHECK(lb.out.find("[truncated]") != std::string::npos);
    const auto pb = run({"prg-build", "--help"});
    for (const char* flag : {"--ell", "--k-blocks", "--t", "--s", "--extra", "--reduce-locality", "--per-column"}) {
        CHECK(pb.out.find(flag) != std::string::npos);
    }
}

TEST_CASE("reports are byte identical across reruns and worker counts") {
    const std::vector<std::vector<std::string>> cmds{
        {"strong-measure", "--families", "30", "--seed", "4"},
        {"baseline-pairwise", "--families", "30", "--seed", "4"},
        {"weak-measure", "--families", "30", "--seed", "4"},
        {"construct-b", "--m", "8", "--s", "5", "--seed", "4"},
        {"lowerbound-sweep", "--weights", "1,8", "--matrices", "2", "--num-x", "4096", "--seed", "4"},
        {"prg-build", "--seed", "4", "--reduce-locality"},
        {"verify-appendices", "--seed", "4"},
    };
    for (const auto& cmd : cmds) {
        const auto a = run(cmd);
        const auto b = run(cmd);
        CHECK(a.code == exit_ok);
        CHECK(a.out == b.out);
        CHECK_FALSE(a.out.empty());
    }
    auto with_workers = [](std::vector<std::string> cmd, const char* w) {
        cmd.push_back("--workers");
        cmd.push_back(w);
        return cmd;
    };
    for (std::size_t i : {0, 2, 4}) CHECK(run(with_workers(cmds[i], "1")).out == run(with_workers(cmds[i], "3")).out);
}

TEST_CASE("output directory override") {
    const auto dir = scratch_dir();
    ::setenv(out_dir_env, dir.c_str(), 1);
    const auto r = run({"construct-b", "--seed", "2", "--out", "sub/b.txt"});
    ::unsetenv(out_dir_env);
    CHECK(r.code == exit_ok);
    CHECK(r.out.empty());
    const auto text = slurp(dir / "sub" / "b.txt");
    CHECK(text.rfind("6 3\n", 0) == 0);
    CHECK(text == run({"construct-b", "--seed", "2"}).out);

    const auto abs = dir / "abs.csv";
    ::setenv(out_dir_env, "/nonexistent-dir", 1);
    CHECK(run({"verify-appendices", "--out", abs.string()}).code == exit_ok);
    ::unsetenv(out_dir_env);
    CHECK(std::filesystem::exists(abs));
}

TEST_CASE("prg build and eval round trip") {
    const auto dir = scratch_dir();
    const auto path = dir / "g.json";
    REQUIRE(run({"prg-build", "--seed", "3", "--out", path.string()}).code == exit_ok);
    const std::string zeros(60, '0');
    const auto r = run({"prg-eval", "--circuit", path.string(), "--input", zeros});
    CHECK(r.code == exit_ok);
    CHECK(r.out.size() == 192 / 4 + 1);
    CHECK(run({"prg-eval", "--circuit", path.string(), "--input", zeros}).out == r.out);
    CHECK(run({"prg-eval", "--circuit", path.string(), "--input", "00"}).code == exit_usage);
    CHECK(run({"prg-eval", "--circuit", (dir / "missing.json").string(), "--input", zeros}).code == exit_usage);
    CHECK(run({"prg-eval", "--input", zeros}).code == exit_usage);
}
