#include "sparsex/lowerbound.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sparsex/families.hpp"
#include "sparsex/parallel.hpp"
#include "sparsex/rng.hpp"
#include "sparsex/sources.hpp"

namespace sparsex {

namespace {

constexpr std::size_t max_sampled_outputs = 16;

std::size_t radius_in_bits(const AdversaryParams& params) {
    // Relative distance <= radius  <=>  Hamming distance <= floor(radius * m).
    const double r = params.distance_radius * static_cast<double>(params.m);
    return static_cast<std::size_t>(std::floor(r + 1e-12));
}

// Candidate outputs h(x0, y1) for every heavy assignment x0.
std::vector<std::uint64_t> candidate_outputs(const BitVector& y, const Gf2Matrix& M, const Partition& part) {
    if (y.size() != M.cols()) throw DimensionError("shift length does not match matrix columns");
    if (M.rows() > 64) throw ResourceError("test evaluation supports at most 64 outputs");
    if (part.heavy.size() > max_heavy_inputs) {
        throw ResourceError("heavy set of size " + std::to_string(part.heavy.size()) + " exceeds the 2^" +
                            std::to_string(max_heavy_inputs) + " enumeration cap");
    }
    BitVector base = y;
    for (auto i : part.heavy) base.set(i, false);
    std::vector<std::uint64_t> heavy_cols;
    for (auto i : part.heavy) heavy_cols.push_back(M.column(i).to_index());
    std::vector<std::uint64_t> out;
    out.reserve(std::size_t{1} << part.heavy.size());
    std::uint64_t cur = matvec(M, base).to_index();
    out.push_back(cur);
    for (std::uint64_t g = 1; g < (std::uint64_t{1} << part.heavy.size()); ++g) {
        cur ^= heavy_cols[static_cast<std::size_t>(std::countr_zero(g))];
        out.push_back(cur);
    }
    return out;
}

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;
};

MeanVar mean_and_variance(std::span<const double> xs) {
    MeanVar mv;
    for (double x : xs) mv.mean += x;
    mv.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        for (double x : xs) mv.var += (x - mv.mean) * (x - mv.mean);
        mv.var /= static_cast<double>(xs.size() - 1);
    }
    return mv;
}

}  // namespace

BiasWindow bias_window(std::size_t n, std::size_t m) {
    const double nn = static_cast<double>(n);
    const double mm = static_cast<double>(m);
    const double lower = mm / (3.0 * nn * std::log2(nn / mm));
    const double log_upper = std::log2(nn / (2.0 * mm));
    const double upper = log_upper > 0.0 ? 2.0 * mm / (nn * log_upper) : std::numeric_limits<double>::infinity();
    return {lower, upper};
}

AdversaryParams make_params(std::size_t n, std::size_t m, double beta) {
    if (n == 0 || m == 0 || 2 * m > n) throw InvalidArgument("adversary parameters need 1 <= m <= n/2");
    if (!(beta > 0.0 && beta < 0.1)) throw InvalidArgument("beta must lie in (0, 1/10)");
    AdversaryParams a;
    a.n = n;
    a.m = m;
    a.beta = beta;
    a.p = solve_bias(EntropyValue(2.0 * static_cast<double>(m) / static_cast<double>(n)));
    const double mm = static_cast<double>(m);
    a.heavy_threshold = std::pow(mm, 2.0 - 6.0 * beta) / (a.p * static_cast<double>(n));
    a.distance_radius = 0.5 - std::pow(mm, -beta) / 4.0;
    a.window = bias_window(n, m);
    a.in_asymptotic_range = 6 * m <= n;
    return a;
}

std::vector<std::size_t> participation_counts(const Gf2Matrix& M) {
    std::vector<std::size_t> counts(M.cols(), 0);
    for (std::size_t i = 0; i < M.rows(); ++i) {
        for (auto j : M.row(i).support()) ++counts[j];
    }
    return counts;
}

Partition heavy_light_partition(const Gf2Matrix& M, const AdversaryParams& params) {
    Partition part;
    const auto counts = participation_counts(M);
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (static_cast<double>(counts[j]) >= params.heavy_threshold) {
            part.heavy.push_back(j);
        } else {
            part.light.push_back(j);
        }
    }
    return part;
}

bool test_membership(const BitVector& z, const BitVector& y, const Gf2Matrix& M, const Partition& part,
                     const AdversaryParams& params) {
    if (z.size() != M.rows()) throw DimensionError("test_membership: z length does not match output length");
    const auto zi = z.to_index();
    const auto radius = radius_in_bits(params);
    for (auto c : candidate_outputs(y, M, part)) {
        if (static_cast<std::size_t>(std::popcount(c ^ zi)) <= radius) return true;
    }
    return false;
}

std::vector<bool> test_region(const BitVector& y, const Gf2Matrix& M, const Partition& part,
                              const AdversaryParams& params) {
    if (M.rows() > 24) throw ResourceError("test_region: 2^m table exceeds budget");
    const std::size_t m = M.rows();
    const auto radius = radius_in_bits(params);
    std::vector<std::uint64_t> ball;
    for (std::uint64_t e = 0; e < (std::uint64_t{1} << m); ++e) {
        if (static_cast<std::size_t>(std::popcount(e)) <= radius) ball.push_back(e);
    }
    std::vector<bool> region(std::size_t{1} << m, false);
    for (auto c : candidate_outputs(y, M, part)) {
        for (auto e : ball) region[c ^ e] = true;
    }
    return region;
}

std::string to_string(AdversarySource src) { return src == AdversarySource::biased ? "biased" : "truncated"; }

AdversarySource adversary_source_from_string(const std::string& name) {
    if (name == "biased") return AdversarySource::biased;
    if (name == "truncated") return AdversarySource::truncated;
    throw InvalidArgument("unknown adversary source '" + name + "' (expected biased or truncated)");
}

AdvantageEstimate distinguishing_advantage(const Gf2Matrix& M, const AdversaryParams& params,
                                           const AdvantageOptions& opts) {
    if (M.cols() != params.n || M.rows() != params.m) throw DimensionError("matrix does not match adversary (m, n)");
    if (params.m > max_sampled_outputs) throw ResourceError("distinguishing_advantage supports m <= 16");
    if (opts.num_y == 0 || opts.num_x == 0) throw InvalidArgument("num_y and num_x must be positive");
    const std::size_t m = params.m;
    const auto part = heavy_light_partition(M, params);

    AdvantageEstimate est;
    est.sd_per_shift.resize(opts.num_y);
    est.test_per_shift.resize(opts.num_y);
    std::vector<double> test_var(opts.num_y, 0.0);

    for (std::size_t j = 0; j < opts.num_y; ++j) {
        CounterRng yrng(derive_seed(opts.seed, j, 0));
        const auto y = BitVector::random(params.n, yrng);
        const std::uint64_t source_seed = derive_seed(opts.seed, j, 1);
        const auto base = opts.source == AdversarySource::biased
                              ? SourceSampler::biased(params.n, params.p, source_seed)
                              : SourceSampler::truncated_biased(params.n, params.p, source_seed);
        const auto source = SourceSampler::shifted(base, y);

        // Chunked so per-worker histograms merge by integer addition.
        const std::size_t chunks = std::max(1U, opts.workers);
        std::vector<std::vector<std::uint64_t>> partial(chunks, std::vector<std::uint64_t>(std::size_t{1} << m, 0));
        parallel_for(chunks, opts.workers, [&](std::size_t c) {
            const std::size_t begin = opts.num_x * c / chunks;
            const std::size_t end = opts.num_x * (c + 1) / chunks;
            std::vector<std::uint64_t> x((params.n + 63) / 64);
            auto& counts = partial[c];
            for (std::size_t i = begin; i < end; ++i) {
                source.draw_words(i, x);
                ++counts[matvec_packed(M, x)];
            }
        });
        std::vector<std::uint64_t> counts(std::size_t{1} << m, 0);
        for (const auto& p : partial) {
            for (std::size_t z = 0; z < counts.size(); ++z) counts[z] += p[z];
        }

        const double total = static_cast<double>(opts.num_x);
        const double u = 1.0 / static_cast<double>(counts.size());
        double l1 = 0.0;
        for (auto c : counts) l1 += std::abs(static_cast<double>(c) / total - u);
        est.sd_per_shift[j] = 0.5 * l1;

        if (opts.with_test) {
            const auto region = test_region(y, M, part, params);
            std::uint64_t inside = 0;
            std::uint64_t region_size = 0;
            for (std::size_t z = 0; z < region.size(); ++z) {
                if (region[z]) {
                    inside += counts[z];
                    ++region_size;
                }
            }
            const double hit = static_cast<double>(inside) / total;
            est.test_per_shift[j] = hit - static_cast<double>(region_size) * u;
            test_var[j] = hit * (1.0 - hit) / total;
        }
    }

    const auto sd = mean_and_variance(est.sd_per_shift);
    const double ny = static_cast<double>(opts.num_y);
    est.empirical_sd = sd.mean;
    est.sd_stderr = std::sqrt(sd.var / ny + std::ldexp(1.0, static_cast<int>(m)) / static_cast<double>(opts.num_x) / ny);
    if (opts.with_test) {
        const auto tv = mean_and_variance(est.test_per_shift);
        double binom = 0.0;
        for (double v : test_var) binom += v;
        est.test_advantage = tv.mean;
        est.test_stderr = std::sqrt(tv.var / ny + binom / (ny * ny));
    }
    return est;
}

double output_bias(std::size_t row_weight, double p) { return std::pow(1.0 - 2.0 * p, static_cast<double>(row_weight)); }

double flip_probability_bound(std::size_t d, double p) { return 0.5 - 0.5 * output_bias(d, p); }

std::vector<std::uint64_t> flip_counts_by_weight(std::span<const std::uint8_t> truth_table, std::size_t d) {
    if (d > 20) throw ResourceError("flip_counts_by_weight supports d <= 20");
    const std::size_t size = std::size_t{1} << d;
    if (truth_table.size() != size) throw DimensionError("truth table must have 2^d entries");
    std::vector<std::uint64_t> counts(d + 1, 0);
    for (std::size_t x = 0; x < size; ++x) {
        std::uint64_t flips = 0;
        for (std::size_t y = 0; y < size; ++y) flips += (truth_table[x ^ y] != truth_table[y]) ? 1 : 0;
        counts[static_cast<std::size_t>(std::popcount(x))] += flips;
    }
    return counts;
}

double flip_probability(std::span<const std::uint64_t> counts_by_weight, std::size_t d, double p) {
    if (counts_by_weight.size() != d + 1) throw DimensionError("need one count per weight 0..d");
    double acc = 0.0;
    for (std::size_t w = 0; w <= d; ++w) {
        const double px = std::pow(p, static_cast<double>(w)) * std::pow(1.0 - p, static_cast<double>(d - w));
        acc += px * static_cast<double>(counts_by_weight[w]);
    }
    return acc / std::ldexp(1.0, static_cast<int>(d));
}

double product_output_sd(std::span<const std::size_t> row_weights, double p) {
    const std::size_t m = row_weights.size();
    if (m == 0 || m > 24) throw ResourceError("product_output_sd supports 1 <= m <= 24");
    std::vector<double> one(m);
    for (std::size_t i = 0; i < m; ++i) one[i] = 0.5 - 0.5 * output_bias(row_weights[i], p);
    const double u = std::ldexp(1.0, -static_cast<int>(m));
    double l1 = 0.0;
    for (std::uint64_t z = 0; z < (std::uint64_t{1} << m); ++z) {
        double pz = 1.0;
        for (std::size_t i = 0; i < m; ++i) pz *= ((z >> i) & 1U) ? one[i] : 1.0 - one[i];
        l1 += std::abs(pz - u);
    }
    return 0.5 * l1;
}

std::vector<SweepRow> sparsity_sweep(const AdversaryParams& params, const SweepOptions& opts) {
    if (opts.matrices == 0) throw InvalidArgument("sweep needs at least one matrix per weight");
    std::vector<SweepRow> rows;
    for (auto w : opts.row_weights) {
        if (w == 0 || w > params.n) throw InvalidArgument("row weight must lie in [1, n]");
        std::vector<double> sds;
        std::vector<double> tests;
        double test_noise = 0.0;
        for (std::size_t j = 0; j < opts.matrices; ++j) {
            const auto M = sample_row_weight_matrix(params.m, params.n, w, derive_seed(opts.seed, w, 2 * j));
            AdvantageOptions a;
            a.num_y = opts.num_y;
            a.num_x = opts.num_x;
            a.seed = derive_seed(opts.seed, w, 2 * j + 1);
            a.source = opts.source;
            a.workers = opts.workers;
            const auto est = distinguishing_advantage(M, params, a);
            sds.push_back(est.empirical_sd);
            tests.push_back(est.test_advantage);
            test_noise += est.test_stderr * est.test_stderr;
        }
        const double count = static_cast<double>(opts.matrices);
        const auto sd = mean_and_variance(sds);
        const auto tv = mean_and_variance(tests);
        // Spread across matrices, plus the plug-in bound sqrt(2^m / N) shrunk
        // by the number of independent histograms averaged.
        const double plug_in = std::ldexp(1.0, static_cast<int>(params.m)) / static_cast<double>(opts.num_x) /
                               (count * static_cast<double>(opts.num_y));
        SweepRow base;
        base.n = params.n;
        base.m = params.m;
        base.row_weight = w;
        base.sparsity = params.m * w;
        base.p = params.p;
        base.beta = params.beta;

        SweepRow sd_row = base;
        sd_row.mode = "empirical_sd";
        sd_row.advantage = sd.mean;
        sd_row.stderr_ = std::sqrt(sd.var / count + plug_in);
        rows.push_back(sd_row);

        SweepRow test_row = base;
        test_row.mode = "test";
        test_row.advantage = tv.mean;
        test_row.stderr_ = std::sqrt(tv.var / count + test_noise / (count * count));
        rows.push_back(test_row);
    }
    return rows;
}

std::string sweep_header() { return "n,m,row_weight,sparsity,p,beta,mode,advantage,stderr"; }

std::string format_sweep_row(const SweepRow& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%zu,%.10g,%.10g,%s,%.10g,%.10g", r.n, r.m, r.row_weight, r.sparsity,
                  r.p, r.beta, r.mode.c_str(), r.advantage, r.stderr_);
    return buf;
}

}  // namespace sparsex
