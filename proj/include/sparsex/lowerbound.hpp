#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sparsex/gf2.hpp"

namespace sparsex {

inline constexpr double default_beta = 0.08;
/// Largest heavy set for which test membership enumerates all assignments.
inline constexpr std::size_t max_heavy_inputs = 20;

/// Bias window implied by H(p) = 2m/n:
/// m / (3 n log2(n/m)) <= p <= 2m / (n log2(n / 2m)).
struct BiasWindow {
    double lower;
    double upper;  // +inf once n <= 2m
    bool contains(double p) const noexcept { return lower <= p && p <= upper; }
};

BiasWindow bias_window(std::size_t n, std::size_t m);

struct AdversaryParams {
    std::size_t n = 0;
    std::size_t m = 0;
    double beta = default_beta;
    double p = 0.0;                // H(p) = 2m/n
    double heavy_threshold = 0.0;  // m^(2 - 6 beta) / (p n)
    double distance_radius = 0.0;  // 1/2 - m^(-beta) / 4
    BiasWindow window{};
    /// m <= n/6. Outside it (up to m <= n/2) parameters are still produced
    /// for desk-scale experiments but asymptotic guarantees do not apply.
    bool in_asymptotic_range = false;
};

/// Throws InvalidArgument when 2m/n is outside (0, 1] or beta outside (0, 1/10).
AdversaryParams make_params(std::size_t n, std::size_t m, double beta = default_beta);

struct Partition {
    std::vector<std::size_t> heavy;
    std::vector<std::size_t> light;
};

/// Number of outputs each input participates in (column weights).
std::vector<std::size_t> participation_counts(const Gf2Matrix& M);

/// Heavy inputs are those with participation >= heavy_threshold.
Partition heavy_light_partition(const Gf2Matrix& M, const AdversaryParams& params);

/// Whether z lies within relative distance `distance_radius` of h(x0, y1)
/// for some assignment x0 to the heavy inputs, with y1 the light part of y.
bool test_membership(const BitVector& z, const BitVector& y, const Gf2Matrix& M, const Partition& part,
                     const AdversaryParams& params);

/// Indicator table of T_y over all 2^m strings (m <= 24).
std::vector<bool> test_region(const BitVector& y, const Gf2Matrix& M, const Partition& part,
                              const AdversaryParams& params);

/// Source the shifted samples come from: the plain p-biased distribution or
/// the truncated variant of min-entropy >= 1.5m.
enum class AdversarySource { biased, truncated };

std::string to_string(AdversarySource src);
AdversarySource adversary_source_from_string(const std::string& name);

struct AdvantageEstimate {
    /// Mean over shifts y of the plug-in SD between h(X + y) and U_m.
    double empirical_sd = 0.0;
    double sd_stderr = 0.0;
    /// Mean over y of Pr[h(X + y) in T_y] - Pr[U in T_y].
    double test_advantage = 0.0;
    double test_stderr = 0.0;
    std::vector<double> sd_per_shift;
    std::vector<double> test_per_shift;
};

struct AdvantageOptions {
    std::size_t num_y = 1;
    std::size_t num_x = std::size_t{1} << 16;
    std::uint64_t seed = 0;
    AdversarySource source = AdversarySource::truncated;
    bool with_test = true;
    unsigned workers = 1;
};

/// Requires m <= 16. Draw i of shift j depends only on (seed, j, i).
AdvantageEstimate distinguishing_advantage(const Gf2Matrix& M, const AdversaryParams& params,
                                           const AdvantageOptions& opts);

/// (1 - 2p)^w: the bias of an XOR of w independent p-biased bits.
double output_bias(std::size_t row_weight, double p);
/// 1/2 - 1/2 (1 - 2p)^d.
double flip_probability_bound(std::size_t d, double p);

/// For f: {0,1}^d -> {0,1} given as a truth table (entry a = f(a)), the
/// number of pairs (x, y) with |x| = w and f(x + y) != f(y), for each w.
std::vector<std::uint64_t> flip_counts_by_weight(std::span<const std::uint8_t> truth_table, std::size_t d);
/// Exact Pr[f(X + Y) != f(Y)] for X p-biased, Y uniform, from the counts.
double flip_probability(std::span<const std::uint64_t> counts_by_weight, std::size_t d, double p);

/// Exact SD from uniform of m independent bits where bit i is the XOR of
/// row_weights[i] p-biased bits (m <= 24).
double product_output_sd(std::span<const std::size_t> row_weights, double p);

struct SweepOptions {
    std::vector<std::size_t> row_weights;
    std::size_t matrices = 20;
    std::size_t num_y = 1;
    std::size_t num_x = std::size_t{1} << 20;
    std::uint64_t seed = 0;
    AdversarySource source = AdversarySource::truncated;
    unsigned workers = 1;
};

struct SweepRow {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t row_weight = 0;
    std::size_t sparsity = 0;
    double p = 0.0;
    double beta = 0.0;
    std::string mode;  // "empirical_sd" or "test"
    double advantage = 0.0;
    double stderr_ = 0.0;
};

/// For each row weight, samples `matrices` m x n matrices with that exact
/// row weight and averages their advantage estimates. Emits one row per
/// (weight, mode).
std::vector<SweepRow> sparsity_sweep(const AdversaryParams& params, const SweepOptions& opts);

std::string sweep_header();
std::string format_sweep_row(const SweepRow& row);

}  // namespace sparsex
