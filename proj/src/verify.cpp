#include "sparsex/verify.hpp"

#include <bit>
#include <cmath>
#include <cstdio>

#include "sparsex/parallel.hpp"
#include "sparsex/rng.hpp"

namespace sparsex {

namespace {

// Packed image of each column; requires at most 64 rows.
std::vector<std::uint64_t> column_images(const Gf2Matrix& A) {
    if (A.rows() > 64) throw ResourceError("packed evaluation supports at most 64 output bits");
    std::vector<std::uint64_t> cols(A.cols(), 0);
    for (std::size_t i = 0; i < A.rows(); ++i) {
        for (auto j : A.row(i).support()) cols[j] |= std::uint64_t{1} << i;
    }
    return cols;
}

std::uint64_t apply_images(std::span<const std::uint64_t> images, std::uint64_t x) {
    std::uint64_t y = 0;
    while (x != 0) {
        y ^= images[static_cast<std::size_t>(std::countr_zero(x))];
        x &= x - 1;
    }
    return y;
}

// Br for every r in {0,1}^s.
std::vector<std::uint64_t> seed_offsets(const FamilyInstance& h) {
    if (h.kind == FamilyKind::strong) return {0};
    if (h.s > 30) throw ResourceError("seed length too large for exact enumeration");
    const auto images = column_images(*h.B);
    std::vector<std::uint64_t> out(std::size_t{1} << h.s);
    for (std::uint64_t r = 0; r < out.size(); ++r) out[r] = apply_images(images, r);
    return out;
}

void check_instance(const FamilyInstance& h) {
    if (h.M.rows() != h.m || h.M.cols() != h.n) throw DimensionError("family instance: M does not match (m, n)");
    if (h.kind == FamilyKind::weak && (!h.B || h.B->rows() != h.m || h.B->cols() != h.s)) {
        throw DimensionError("family instance: B does not match (m, s)");
    }
}

double sd_from_counts(std::span<const std::uint64_t> counts, std::uint64_t total) {
    const double u = 1.0 / static_cast<double>(counts.size());
    double acc = 0.0;
    for (auto c : counts) acc += std::abs(static_cast<double>(c) / static_cast<double>(total) - u);
    return 0.5 * acc;
}

struct MeanVar {
    double mean;
    double var;
};

MeanVar mean_and_variance(std::span<const double> xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    if (xs.size() > 1) {
        for (double x : xs) var += (x - mean) * (x - mean);
        var /= static_cast<double>(xs.size() - 1);
    }
    return {mean, var};
}

}  // namespace

std::string to_string(MeasureMode mode) { return mode == MeasureMode::exact ? "exact" : "monte_carlo"; }

ExplicitDistribution output_distribution(const FamilyInstance& h, const ExplicitDistribution& D) {
    check_instance(h);
    if (D.bits() != h.n) throw DimensionError("output_distribution: source length differs from family input length");
    if (h.m > max_output_bits) throw ResourceError("output_distribution: 2^m table exceeds budget");
    const auto images = column_images(h.M);
    const auto offsets = seed_offsets(h);
    const auto support = D.support();
    if (static_cast<double>(support.size()) * static_cast<double>(offsets.size()) >
        static_cast<double>(max_pushforward_pairs)) {
        throw ResourceError("output_distribution: |support| * 2^s exceeds the enumeration budget");
    }
    std::vector<double> out(std::size_t{1} << h.m, 0.0);
    const double seed_weight = 1.0 / static_cast<double>(offsets.size());
    for (auto x : support) {
        const std::uint64_t hx = apply_images(images, x);
        const double mass = D.prob(x) * seed_weight;
        for (auto br : offsets) out[hx ^ br] += mass;
    }
    return {h.m, std::move(out)};
}

double statistical_distance(const ExplicitDistribution& A, const ExplicitDistribution& B) {
    if (A.bits() != B.bits()) throw DimensionError("statistical_distance: distributions over different lengths");
    double acc = 0.0;
    for (std::uint64_t a = 0; a < A.size(); ++a) acc += std::abs(A.prob(a) - B.prob(a));
    return std::min(1.0, 0.5 * acc);
}

double distance_from_uniform(const ExplicitDistribution& D) {
    const double u = 1.0 / static_cast<double>(D.size());
    double acc = 0.0;
    for (double v : D.table()) acc += std::abs(v - u);
    return std::min(1.0, 0.5 * acc);
}

ErrorReport family_error(std::span<const FamilyInstance> family, const ExplicitDistribution& D, unsigned workers) {
    if (family.empty()) throw InvalidArgument("family_error: empty family");
    ErrorReport rep;
    rep.mode = MeasureMode::exact;
    rep.family_size = family.size();
    rep.per_function_sds.resize(family.size());
    parallel_for(family.size(), workers, [&](std::size_t f) {
        rep.per_function_sds[f] = distance_from_uniform(output_distribution(family[f], D));
    });
    const auto [mean, var] = mean_and_variance(rep.per_function_sds);
    rep.mean_sd = mean;
    rep.std_err = std::sqrt(var / static_cast<double>(family.size()));
    return rep;
}

ErrorReport family_error_mc(std::span<const FamilyInstance> family, const SourceSampler& X, std::size_t samples,
                            std::uint64_t seed, unsigned workers) {
    if (family.empty()) throw InvalidArgument("family_error_mc: empty family");
    if (samples == 0) throw InvalidArgument("family_error_mc: need at least one sample");
    ErrorReport rep;
    rep.mode = MeasureMode::monte_carlo;
    rep.family_size = family.size();
    rep.samples_per_function = samples;
    rep.per_function_sds.resize(family.size());
    const std::size_t m = family.front().m;
    parallel_for(family.size(), workers, [&](std::size_t f) {
        const auto& h = family[f];
        check_instance(h);
        if (h.m != m) throw DimensionError("family_error_mc: members differ in output length");
        if (X.bits() != h.n) throw DimensionError("family_error_mc: source length differs from family input length");
        if (h.m > max_output_bits) throw ResourceError("family_error_mc: 2^m histogram exceeds budget");
        const auto source = X.reseeded(derive_seed(seed, f, 0));
        std::optional<std::vector<std::uint64_t>> seed_images;
        if (h.kind == FamilyKind::weak) seed_images = column_images(*h.B);
        CounterRng seeds(derive_seed(seed, f, 1));
        const std::uint64_t seed_mask = h.s >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << h.s) - 1);
        std::vector<std::uint64_t> counts(std::size_t{1} << h.m, 0);
        std::vector<std::uint64_t> x((h.n + 63) / 64);
        for (std::size_t i = 0; i < samples; ++i) {
            source.draw_words(i, x);
            std::uint64_t y = matvec_packed(h.M, x);
            if (seed_images) y ^= apply_images(*seed_images, seeds() & seed_mask);
            ++counts[y];
        }
        rep.per_function_sds[f] = sd_from_counts(counts, samples);
    });
    const auto [mean, var] = mean_and_variance(rep.per_function_sds);
    rep.mean_sd = mean;
    rep.std_err = std::sqrt(var / static_cast<double>(family.size()) +
                            std::ldexp(1.0, static_cast<int>(m)) / static_cast<double>(samples));
    return rep;
}

CollisionReport collision_probability(std::span<const FamilyInstance> family, const ExplicitDistribution& D) {
    if (family.empty()) throw InvalidArgument("collision_probability: empty family");
    double acc = 0.0;
    for (const auto& h : family) {
        const auto out = output_distribution(h, D);
        double cp = 0.0;
        for (double v : out.table()) cp += v * v;
        acc += cp;
    }
    return {acc / static_cast<double>(family.size()), 0.0, MeasureMode::exact, 0};
}

CollisionReport collision_probability_mc(std::span<const FamilyInstance> family, const SourceSampler& X,
                                         std::size_t pairs, std::uint64_t seed) {
    if (family.empty()) throw InvalidArgument("collision_probability_mc: empty family");
    if (pairs == 0) throw InvalidArgument("collision_probability_mc: need at least one pair");
    const auto source = X.reseeded(derive_seed(seed, 0));
    CounterRng rng(derive_seed(seed, 1));
    std::vector<std::uint64_t> x((X.bits() + 63) / 64);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pairs; ++i) {
        const auto& h = family[rng.below(family.size())];
        check_instance(h);
        source.draw_words(2 * i, x);
        BitVector a = BitVector::from_words(h.n, x);
        source.draw_words(2 * i + 1, x);
        BitVector b = BitVector::from_words(h.n, x);
        std::optional<BitVector> r;
        std::optional<BitVector> r2;
        if (h.kind == FamilyKind::weak) {
            r = BitVector::random(h.s, rng);
            r2 = BitVector::random(h.s, rng);
        }
        if (evaluate(h, a, r) == evaluate(h, b, r2)) ++hits;
    }
    const double cp = static_cast<double>(hits) / static_cast<double>(pairs);
    return {cp, std::sqrt(cp * (1.0 - cp) / static_cast<double>(pairs)), MeasureMode::monte_carlo, pairs};
}

double cp_sd_bound(double cp, std::size_t m) {
    return 0.5 * std::sqrt(std::max(std::ldexp(cp, static_cast<int>(m)) - 1.0, 0.0));
}

double theorem1_bound(double delta, std::size_t k, std::size_t m, double K) {
    return 0.5 * std::sqrt(delta + K * std::ldexp(1.0, static_cast<int>(m) - static_cast<int>(k)));
}

double theorem3_bound(double c, std::size_t k, std::size_t s, std::size_t m) {
    if (!(c > 1.0)) throw InvalidArgument("theorem3_bound: c must exceed 1");
    return 0.5 * std::sqrt(c * std::ldexp(1.0, static_cast<int>(m) - static_cast<int>(k) - static_cast<int>(s)));
}

std::string report_header() { return "experiment,n,k,m,s,p,K,c,delta,mode,mean_sd,std_err,bound,pass"; }

std::string format_row(const ReportRow& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%zu,%zu,%.10g,%.10g,%.10g,%.10g,%s,%.10g,%.10g,%.10g,%s",
                  r.experiment.c_str(), r.n, r.k, r.m, r.s, r.p, r.K, r.c, r.delta, to_string(r.mode).c_str(),
                  r.mean_sd, r.std_err, r.bound, r.pass ? "true" : "false");
    return buf;
}

}  // namespace sparsex
