#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sparsex/families.hpp"
#include "sparsex/sources.hpp"

namespace sparsex {

enum class MeasureMode { exact, monte_carlo };

std::string to_string(MeasureMode mode);

/// Mean statistical distance of a sampled family from uniform.
struct ErrorReport {
    double mean_sd = 0.0;
    double std_err = 0.0;
    std::vector<double> per_function_sds;
    std::size_t family_size = 0;
    MeasureMode mode = MeasureMode::exact;
    std::size_t samples_per_function = 0;  // monte_carlo only
};

struct CollisionReport {
    double cp = 0.0;
    double std_err = 0.0;  // zero in exact mode
    MeasureMode mode = MeasureMode::exact;
    std::size_t samples = 0;
};

/// Largest table output_distribution will build (2^m entries) and the
/// largest number of (x, r) pairs it will push forward.
inline constexpr std::size_t max_output_bits = 24;
inline constexpr std::uint64_t max_pushforward_pairs = std::uint64_t{1} << 34;

/// Exact distribution of h(X) (strong) or h(X, R) with R uniform (weak).
ExplicitDistribution output_distribution(const FamilyInstance& h, const ExplicitDistribution& D);

/// Half the L1 distance. Throws DimensionError on a length mismatch.
double statistical_distance(const ExplicitDistribution& A, const ExplicitDistribution& B);
double distance_from_uniform(const ExplicitDistribution& D);

/// Exact: mean over members of SD(h(X, U_s), U_m). std_err is the standard
/// error of that mean as an estimate over the family distribution.
ErrorReport family_error(std::span<const FamilyInstance> family, const ExplicitDistribution& D, unsigned workers = 1);

/// Monte Carlo: each member sees `samples` draws of X (and fresh seeds) and
/// is scored by the plug-in SD of the empirical output histogram. std_err
/// combines the spread across members with the plug-in error bound
/// sqrt(2^m / samples).
ErrorReport family_error_mc(std::span<const FamilyInstance> family, const SourceSampler& X, std::size_t samples,
                            std::uint64_t seed, unsigned workers = 1);

/// Exact Pr[H(X, R) = H(X', R')] with H uniform over `family`.
CollisionReport collision_probability(std::span<const FamilyInstance> family, const ExplicitDistribution& D);
CollisionReport collision_probability_mc(std::span<const FamilyInstance> family, const SourceSampler& X,
                                         std::size_t pairs, std::uint64_t seed);

/// (1/2) sqrt(max(2^m cp - 1, 0)): bounds SD((H, H(X)), (H, U)).
double cp_sd_bound(double cp, std::size_t m);

/// (1/2) sqrt(delta + K 2^(m-k)).
double theorem1_bound(double delta, std::size_t k, std::size_t m, double K);
/// (1/2) sqrt(c 2^(m-k-s)).
double theorem3_bound(double c, std::size_t k, std::size_t s, std::size_t m);

/// One line of the experiment report
/// `experiment,n,k,m,s,p,K,c,delta,mode,mean_sd,std_err,bound,pass`.
struct ReportRow {
    std::string experiment;
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t m = 0;
    std::size_t s = 0;
    double p = 0.0;
    double K = 0.0;
    double c = 0.0;
    double delta = 0.0;
    MeasureMode mode = MeasureMode::exact;
    double mean_sd = 0.0;
    double std_err = 0.0;
    double bound = 0.0;
    bool pass = false;
};

std::string report_header();
std::string format_row(const ReportRow& row);

}  // namespace sparsex
