#include "sparsex/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sparsex/lowerbound.hpp"
#include "sparsex/rng.hpp"
#include "sparsex/sources.hpp"

namespace sparsex {

namespace {

// Stream tags under the experiment seed.
enum Stream : std::uint64_t { members = 0, battery = 1, b_matrix = 2, instances = 3 };

std::vector<ReportRow> measure_battery(const std::string& experiment, const std::vector<FamilyInstance>& family,
                                       std::size_t k, std::uint64_t seed, double bound, unsigned workers) {
    const auto& h = family.front();
    std::vector<ReportRow> rows;
    for (const auto& src : flat_source_battery(h.n, k, derive_seed(seed, battery))) {
        const auto rep = family_error(family, src.dist, workers);
        ReportRow r;
        r.experiment = experiment + "/" + src.name;
        r.n = h.n;
        r.k = k;
        r.m = h.m;
        r.s = h.s;
        r.p = h.p;
        r.K = h.K;
        r.c = h.c;
        r.delta = h.delta;
        r.mode = rep.mode;
        r.mean_sd = rep.mean_sd;
        r.std_err = rep.std_err;
        r.bound = bound;
        r.pass = rep.mean_sd <= bound + sigma_margin * rep.std_err;
        rows.push_back(r);
    }
    return rows;
}

std::vector<FamilyInstance> sample_strong_family(const StrongFamilySpec& spec, std::size_t count, std::uint64_t seed) {
    if (count == 0) throw InvalidArgument("families must be at least 1");
    std::vector<FamilyInstance> family;
    family.reserve(count);
    for (std::size_t f = 0; f < count; ++f) family.push_back(sample_strong(spec, derive_seed(seed, members, f)));
    return family;
}

void record(AppendixCheck& c, double margin) {
    ++c.cases;
    if (margin < 0.0) ++c.violations;
    c.worst_margin = std::min(c.worst_margin, margin);
}

AppendixCheck start(const std::string& name) {
    return {name, 0, 0, std::numeric_limits<double>::infinity()};
}

}  // namespace

std::vector<ReportRow> strong_measure(const StrongMeasureConfig& cfg) {
    const auto spec = cfg.p ? StrongFamilySpec::with_bias(cfg.n, cfg.m, cfg.k, cfg.delta, cfg.K, *cfg.p)
                            : StrongFamilySpec::make(cfg.n, cfg.m, cfg.k, cfg.delta, cfg.K, cfg.tight_p);
    const auto family = sample_strong_family(spec, cfg.families, cfg.seed);
    return measure_battery("strong", family, cfg.k, cfg.seed, theorem1_bound(cfg.delta, cfg.k, cfg.m, cfg.K),
                           cfg.workers);
}

std::vector<ReportRow> baseline_pairwise(const StrongMeasureConfig& cfg) {
    const auto spec = StrongFamilySpec::with_bias(cfg.n, cfg.m, cfg.k, cfg.delta, cfg.K, 0.5);
    const auto family = sample_strong_family(spec, cfg.families, cfg.seed);
    const double bound = 0.5 * std::sqrt(std::ldexp(1.0, static_cast<int>(cfg.m) - static_cast<int>(cfg.k)));
    return measure_battery("baseline", family, cfg.k, cfg.seed, bound, cfg.workers);
}

std::vector<ReportRow> weak_measure(const WeakMeasureConfig& cfg) {
    if (cfg.families == 0) throw InvalidArgument("families must be at least 1");
    const auto spec = WeakFamilySpec::make(cfg.n, cfg.m, cfg.s, cfg.k, cfg.c, cfg.K, cfg.t);
    ConstructBOptions opts;
    opts.m = cfg.m;
    opts.s = cfg.s;
    opts.t = cfg.t;
    opts.row_weight_target = cfg.row_weight;
    opts.seed = derive_seed(cfg.seed, b_matrix);
    const auto B = construct_B(opts).B;
    std::vector<FamilyInstance> family;
    family.reserve(cfg.families);
    for (std::size_t f = 0; f < cfg.families; ++f) family.push_back(sample_weak(spec, B, derive_seed(cfg.seed, members, f)));
    return measure_battery("weak", family, cfg.k, cfg.seed, theorem3_bound(cfg.c, cfg.k, cfg.s, cfg.m), cfg.workers);
}

// ---------------------------------------------------------------- appendices

AppendixCheck check_collision_bound(std::uint64_t seed, std::size_t configs) {
    auto c = start("collision_bound");
    for (std::size_t i = 0; i < configs; ++i) {
        CounterRng rng(derive_seed(seed, i));
        const std::size_t n = 4 + rng.below(9);
        const std::size_t m = 1 + rng.below(std::min<std::size_t>(6, n));
        const std::size_t k = 1 + rng.below(n);
        const double p = i % 4 == 0 ? 0.5 : 0.05 + 0.45 * rng.uniform();
        const auto spec = StrongFamilySpec::with_bias(n, m, std::max(k, m), 0.5, default_family_constant, p);
        std::vector<FamilyInstance> family;
        for (std::size_t f = 0; f < 32; ++f) family.push_back(sample_strong(spec, derive_seed(seed, i, f)));
        const auto battery = flat_source_battery(n, k, derive_seed(seed, i, 1000));
        const auto& D = battery[i % battery.size()].dist;
        const double sd = family_error(family, D).mean_sd;
        const double cp = collision_probability(family, D).cp;
        record(c, cp_sd_bound(cp, m) + 1e-12 - sd);
    }
    return c;
}

AppendixCheck check_entropy_sandwich(std::size_t grid_points) {
    auto c = start("entropy_sandwich");
    const double lo = std::log(1e-3);
    const double hi = std::log(0.5);
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double p = i + 1 == grid_points ? 0.5
                                              : std::exp(lo + (hi - lo) * static_cast<double>(i) /
                                                                  static_cast<double>(grid_points - 1));
        const auto b = entropy_inverse_bounds(p);
        record(c, std::min(p - b.lower, b.upper - p));
    }
    return c;
}

AppendixCheck check_truncated_closed_form() {
    auto c = start("truncated_min_entropy_n24");
    const std::size_t n = 24;
    const std::size_t m = 4;
    const double p = solve_bias(EntropyValue(2.0 * m / n));
    record(c, std::ldexp(1.0, -6) - truncated_max_probability(n, p));
    return c;
}

AppendixCheck check_truncated_tables() {
    auto c = start("truncated_tables_n16");
    const std::size_t n = 16;
    for (double m : {1.0, 1.5, 2.0, 2.5}) {
        const double p = solve_bias(EntropyValue(2.0 * m / static_cast<double>(n)));
        const auto D = truncated_biased_source(n, p);
        const double table_max = D.max_probability();
        const double closed = truncated_max_probability(n, p);
        record(c, 1e-12 - std::abs(table_max - closed) / closed);
        record(c, min_entropy(D).bits - 1.5 * m);
    }
    return c;
}

AppendixCheck check_flip_bound(std::uint64_t seed, std::size_t functions) {
    auto c = start("flip_probability");
    for (std::size_t i = 0; i < functions; ++i) {
        CounterRng rng(derive_seed(seed, i));
        const std::size_t d = 1 + rng.below(10);
        std::vector<std::uint8_t> table(std::size_t{1} << d);
        for (auto& v : table) v = static_cast<std::uint8_t>(rng() & 1U);
        const auto counts = flip_counts_by_weight(table, d);
        for (double p : {0.05, 0.11, 0.25}) {
            record(c, flip_probability_bound(d, p) + 1e-12 - flip_probability(counts, d, p));
        }
    }
    return c;
}

AppendixCheck check_bias_window() {
    auto c = start("bias_window");
    for (int e = 12; e <= 24; ++e) {
        const auto n = static_cast<std::size_t>(std::lround(std::exp2(e / 2.0)));
        std::vector<std::size_t> ms;
        for (std::size_t m = 1; 6 * m <= n; m *= 2) ms.push_back(m);
        ms.push_back(n / 6);
        for (auto m : ms) {
            const double p = solve_bias(EntropyValue(2.0 * m / static_cast<double>(n)));
            const auto w = bias_window(n, m);
            record(c, std::min(p - w.lower, w.upper - p));
        }
    }
    return c;
}

std::vector<AppendixCheck> verify_appendices(std::uint64_t seed) {
    return {check_collision_bound(derive_seed(seed, 0)), check_entropy_sandwich(), check_truncated_closed_form(),
            check_truncated_tables(), check_flip_bound(derive_seed(seed, 1)), check_bias_window()};
}

std::string appendix_header() { return "check,cases,violations,worst_margin,pass"; }

std::string format_appendix_row(const AppendixCheck& c) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.10g,%s", c.name.c_str(), c.cases, c.violations, c.worst_margin,
                  c.pass() ? "true" : "false");
    return buf;
}

std::optional<std::size_t> first_trend_violation(const std::vector<SweepRow>& rows, const std::string& mode,
                                                 double sigmas) {
    const SweepRow* prev = nullptr;
    for (const auto& r : rows) {
        if (r.mode != mode) continue;
        if (prev && r.advantage > prev->advantage + sigmas * std::hypot(r.stderr_, prev->stderr_)) return r.row_weight;
        prev = &r;
    }
    return std::nullopt;
}

// ----------------------------------------------------------------------- prg

PrgBundle build_prg(const PrgBuildConfig& cfg) {
    auto f = LocalFunction::random(cfg.n, cfg.ell, derive_seed(cfg.seed, 0));
    auto layout = BlockLayout::with_random_offsets(cfg.n, cfg.k_blocks, cfg.t, derive_seed(cfg.seed, 1));
    const std::size_t m_out = cfg.t / 2 + cfg.s + cfg.extra;
    const auto spec = WeakFamilySpec::make(cfg.t, m_out, cfg.s, cfg.t, cfg.c, cfg.K, 2);
    ConstructBOptions opts;
    opts.m = m_out;
    opts.s = cfg.s;
    opts.t = 2;
    opts.row_weight_target = cfg.b_row_weight;
    opts.seed = derive_seed(cfg.seed, 2);
    const auto B = construct_B(opts).B;
    const std::size_t count = cfg.per_column ? layout.m_cols() : 1;
    std::vector<FamilyInstance> insts;
    insts.reserve(count);
    for (std::size_t j = 0; j < count; ++j) insts.push_back(sample_weak(spec, B, derive_seed(cfg.seed, instances, j)));
    auto G = build_G(f, layout, insts);
    return {std::move(f), std::move(layout), std::move(insts), std::move(G)};
}

}  // namespace sparsex
