#include "sparsex/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <CLI11.hpp>

#include "sparsex/errors.hpp"
#include "sparsex/experiments.hpp"
#include "sparsex/lowerbound.hpp"
#include "sparsex/prg.hpp"

namespace sparsex {

namespace {

struct Common {
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool with_workers) {
    cmd->add_option("--seed", c.seed, "Master seed; every random choice derives from it");
    if (with_workers) {
        cmd->add_option("--workers", c.workers, "Worker threads (results do not depend on it)")
            ->check(CLI::Range(1U, 1024U));
    }
    cmd->add_option("--out", c.out, "Report path (stdout when empty); relative paths honour SPARSEX_OUT_DIR");
}

void emit(const std::string& report, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << report;
        return;
    }
    std::filesystem::path target(path);
    if (const char* dir = std::getenv(out_dir_env); dir != nullptr && *dir != '\0' && target.is_relative()) {
        target = std::filesystem::path(dir) / target;
    }
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    std::ofstream os(target, std::ios::binary);
    if (!os) throw ResourceError("cannot open report file " + target.string());
    os << report;
    if (!os) throw ResourceError("failed writing report file " + target.string());
}

std::string render(const std::vector<ReportRow>& rows) {
    std::string s = report_header() + "\n";
    for (const auto& r : rows) s += format_row(r) + "\n";
    return s;
}

bool all_pass(const std::vector<ReportRow>& rows) {
    return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidArgument("cannot read file " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse extractor families over GF(2): measurement, lower-bound sweeps, local PRG circuits"};
    app.name("sparsex");
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);

    Common common;
    std::function<int()> action;

    // strong-measure / baseline-pairwise
    StrongMeasureConfig strong;
    bool strong_assert = false;
    double strong_p = 0.0;
    auto* sm = app.add_subcommand("strong-measure", "Exact mean SD of the seedless sparse family over a flat source battery");
    auto* bp = app.add_subcommand("baseline-pairwise", "Same measurement with p = 1/2 against the leftover-hash bound");
    for (auto* cmd : {sm, bp}) {
        cmd->add_option("--n", strong.n, "Input length");
        cmd->add_option("--k", strong.k, "Min-entropy of the battery sources");
        cmd->add_option("--m", strong.m, "Output length");
        cmd->add_option("--delta", strong.delta, "Error parameter delta");
        cmd->add_option("--K", strong.K, "Family constant K");
        cmd->add_option("--families", strong.families, "Number of sampled members");
        cmd->add_flag("--assert", strong_assert, "Exit 1 if any row exceeds its bound by more than 4 std errors");
        add_common(cmd, common, true);
    }
    sm->add_flag("--tight-p", strong.tight_p, "Use the sharper bias valid for m <= k / (2 log2(m/delta))");
    sm->add_option("--p", strong_p, "Override the entry bias (0 keeps the derived value)")->check(CLI::Range(0.0, 0.5));
    auto strong_action = [&](bool baseline) {
        return [&, baseline] {
            strong.seed = common.seed;
            strong.workers = common.workers;
            if (strong_p > 0.0) strong.p = strong_p;
            const auto rows = baseline ? baseline_pairwise(strong) : strong_measure(strong);
            emit(render(rows), common.out, out);
            return strong_assert && !all_pass(rows) ? exit_bound_failed : exit_ok;
        };
    };
    sm->callback([&] { action = strong_action(false); });
    bp->callback([&] { action = strong_action(true); });

    // weak-measure
    WeakMeasureConfig weak;
    bool weak_assert = false;
    auto* wm = app.add_subcommand("weak-measure", "Exact mean SD of the seeded family Mx + Br over a flat source battery");
    wm->add_option("--n", weak.n, "Input length");
    wm->add_option("--k", weak.k, "Min-entropy of the battery sources");
    wm->add_option("--s", weak.s, "Seed length");
    wm->add_option("--m", weak.m, "Output length");
    wm->add_option("--c", weak.c, "Constant c > 1");
    wm->add_option("--K", weak.K, "Family constant K");
    wm->add_option("--t", weak.t, "Every t rows of B must be independent");
    wm->add_option("--row-weight", weak.row_weight, "Maximum row weight of B");
    wm->add_option("--families", weak.families, "Number of sampled members");
    wm->add_flag("--assert", weak_assert, "Exit 1 if any row exceeds its bound by more than 4 std errors");
    add_common(wm, common, true);
    wm->callback([&] {
        action = [&] {
            weak.seed = common.seed;
            weak.workers = common.workers;
            const auto rows = weak_measure(weak);
            emit(render(rows), common.out, out);
            return weak_assert && !all_pass(rows) ? exit_bound_failed : exit_ok;
        };
    });

    // construct-b
    ConstructBOptions cb;
    cb.m = 6;
    cb.s = 3;
    auto* cbc = app.add_subcommand("construct-b", "Sample a sparse full-rank B whose every t rows are independent");
    cbc->add_option("--m", cb.m, "Rows");
    cbc->add_option("--s", cb.s, "Columns (seed length)");
    cbc->add_option("--t", cb.t, "Independence order");
    cbc->add_option("--row-weight", cb.row_weight_target, "Maximum row weight");
    cbc->add_option("--max-tries", cb.max_tries, "Rejection sampling budget");
    add_common(cbc, common, false);
    cbc->callback([&] {
        action = [&] {
            cb.seed = common.seed;
            const auto res = construct_B(cb);
            std::ostringstream os;
            write_matrix(os, res.B);
            emit(os.str(), common.out, out);
            err << "accepted after " << res.tries << " tries\n";
            return exit_ok;
        };
    });

    // lowerbound-sweep
    std::size_t lb_n = 64;
    std::size_t lb_m = 8;
    double lb_beta = default_beta;
    SweepOptions sweep;
    sweep.row_weights = {1, 2, 4, 8, 16, 32};
    std::string lb_source = to_string(AdversarySource::truncated);
    bool lb_assert = false;
    auto* lb = app.add_subcommand("lowerbound-sweep", "Distinguishing advantage against sparse matrices by row weight");
    lb->add_option("--n", lb_n, "Input length");
    lb->add_option("--m", lb_m, "Output length (at most 16)");
    lb->add_option("--beta", lb_beta, "Adversary exponent beta in (0, 1/10)");
    lb->add_option("--weights", sweep.row_weights, "Comma-separated row weights")->delimiter(',');
    lb->add_option("--matrices", sweep.matrices, "Matrices per row weight");
    lb->add_option("--num-y", sweep.num_y, "Shifts y per matrix");
    lb->add_option("--num-x", sweep.num_x, "Samples per SD estimate");
    lb->add_option("--source", lb_source, "Shifted source: biased or truncated")
        ->check(CLI::IsMember({"biased", "truncated"}));
    lb->add_flag("--assert", lb_assert, "Exit 1 if the empirical SD column rises by more than 4 std errors");
    add_common(lb, common, true);
    lb->callback([&] {
        action = [&] {
            sweep.seed = common.seed;
            sweep.workers = common.workers;
            sweep.source = adversary_source_from_string(lb_source);
            const auto rows = sparsity_sweep(make_params(lb_n, lb_m, lb_beta), sweep);
            std::string s = sweep_header() + "\n";
            for (const auto& r : rows) s += format_sweep_row(r) + "\n";
            emit(s, common.out, out);
            return lb_assert && first_trend_violation(rows, "empirical_sd") ? exit_bound_failed : exit_ok;
        };
    });

    // prg-build
    PrgBuildConfig prg;
    bool reduce = false;
    auto* pb = app.add_subcommand("prg-build", "Build the local PRG circuit G (or G' with --reduce-locality) as JSON");
    pb->add_option("--n", prg.n, "Length of each string x_ij and of f's input");
    pb->add_option("--ell", prg.ell, "Locality of the toy function f");
    pb->add_option("--k-blocks", prg.k_blocks, "Strings per block");
    pb->add_option("--t", prg.t, "Number of blocks (weak family input length)");
    pb->add_option("--s", prg.s, "Seed length of each weak instance");
    pb->add_option("--extra", prg.extra, "Extra outputs: weak instances emit t/2 + s + extra bits");
    pb->add_option("--b-row-weight", prg.b_row_weight, "Maximum row weight of B");
    pb->add_option("--c", prg.c, "Weak family constant c");
    pb->add_option("--K", prg.K, "Weak family constant K");
    pb->add_flag("--per-column", prg.per_column, "Independent weak instance per column instead of one shared");
    pb->add_flag("--reduce-locality", reduce, "Emit G' with every output reading at most three terms");
    add_common(pb, common, false);
    pb->callback([&] {
        action = [&] {
            prg.seed = common.seed;
            auto bundle = build_prg(prg);
            const auto& circuit = reduce ? locality_reduce(bundle.G) : bundle.G;
            emit(circuit_to_json(circuit) + "\n", common.out, out);
            return exit_ok;
        };
    });

    // prg-eval
    std::string circuit_path;
    std::string input_hex;
    auto* pe = app.add_subcommand("prg-eval", "Evaluate a circuit on a little-endian hex input");
    pe->add_option("--circuit", circuit_path, "Circuit JSON file")->required();
    pe->add_option("--input", input_hex, "Input bits as hex (byte b holds bits 8b..8b+7)")->required();
    pe->add_option("--out", common.out, "Output path (stdout when empty)");
    pe->callback([&] {
        action = [&] {
            const auto circuit = circuit_from_json(read_file(circuit_path));
            const auto x = BitVector::from_hex(circuit.input_length, input_hex);
            emit(circuit.evaluate(x).to_hex() + "\n", common.out, out);
            return exit_ok;
        };
    });

    // verify-appendices
    auto* va = app.add_subcommand("verify-appendices", "Exact oracle checks of the collision, entropy and flip bounds");
    add_common(va, common, false);
    va->callback([&] {
        action = [&] {
            const auto checks = verify_appendices(common.seed);
            std::string s = appendix_header() + "\n";
            bool ok = true;
            for (const auto& c : checks) {
                s += format_appendix_row(c) + "\n";
                ok = ok && c.pass();
            }
            emit(s, common.out, out);
            return ok ? exit_ok : exit_bound_failed;
        };
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_usage;
    }

    try {
        return action();
    } catch (const ConstructionError& e) {
        err << "construction failed: " << e.what() << "\n";
        return exit_construction;
    } catch (const ResourceError& e) {
        err << "resource limit: " << e.what() << "\n";
        return exit_resource;
    } catch (const InvalidArgument& e) {
        err << "invalid parameter: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_internal;
    }
}

}  // namespace sparsex
