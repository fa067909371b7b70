#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparsex/families.hpp"
#include "sparsex/lowerbound.hpp"
#include "sparsex/prg.hpp"
#include "sparsex/verify.hpp"

namespace sparsex {

/// Multiplier on std_err allowed above a bound before a row fails.
inline constexpr double sigma_margin = 4.0;

struct StrongMeasureConfig {
    std::size_t n = 14;
    std::size_t k = 12;
    std::size_t m = 4;
    double delta = 1.0 / 64.0;
    double K = default_family_constant;
    std::size_t families = 200;
    std::uint64_t seed = 1;
    bool tight_p = false;
    std::optional<double> p;  // overrides the derived bias
    unsigned workers = 1;
};

/// One row per battery source: exact mean SD over `families` members
/// against theorem1_bound.
std::vector<ReportRow> strong_measure(const StrongMeasureConfig& cfg);

/// strong_measure with p = 1/2 against (1/2) 2^((m-k)/2).
std::vector<ReportRow> baseline_pairwise(const StrongMeasureConfig& cfg);

struct WeakMeasureConfig {
    std::size_t n = 14;
    std::size_t k = 10;
    std::size_t s = 3;
    std::size_t m = 6;
    double c = 2.0;
    double K = default_family_constant;
    std::size_t t = 2;
    std::size_t row_weight = 2;
    std::size_t families = 200;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

/// One B from construct_B shared by all members; one row per battery source
/// against theorem3_bound.
std::vector<ReportRow> weak_measure(const WeakMeasureConfig& cfg);

struct AppendixCheck {
    std::string name;
    std::size_t cases = 0;
    std::size_t violations = 0;
    /// Smallest (bound - value) seen; negative means a violation.
    double worst_margin = 0.0;
    bool pass() const noexcept { return violations == 0 && cases > 0; }
};

AppendixCheck check_collision_bound(std::uint64_t seed, std::size_t configs = 100);
AppendixCheck check_entropy_sandwich(std::size_t grid_points = 1000);
AppendixCheck check_truncated_closed_form();
AppendixCheck check_truncated_tables();
AppendixCheck check_flip_bound(std::uint64_t seed, std::size_t functions = 200);
AppendixCheck check_bias_window();

/// All of the above, in that order.
std::vector<AppendixCheck> verify_appendices(std::uint64_t seed);

std::string appendix_header();
std::string format_appendix_row(const AppendixCheck& c);

/// Rows of `mode` in input order: each advantage is at most the previous one
/// plus `sigmas` combined standard errors. Returns the first offending row
/// weight, or nullopt.
std::optional<std::size_t> first_trend_violation(const std::vector<SweepRow>& rows, const std::string& mode,
                                                 double sigmas = sigma_margin);

struct PrgBuildConfig {
    std::size_t n = 6;
    std::size_t ell = 3;
    std::size_t k_blocks = 3;
    std::size_t t = 8;
    std::size_t s = 4;
    std::size_t extra = 0;
    std::size_t b_row_weight = 2;
    double c = 2.0;
    double K = default_family_constant;
    std::uint64_t seed = 1;
    bool per_column = false;
};

struct PrgBundle {
    LocalFunction f;
    BlockLayout layout;
    std::vector<FamilyInstance> instances;
    PrgCircuit G;
};

/// Weak instances have t-bit inputs and t/2 + s + extra outputs.
PrgBundle build_prg(const PrgBuildConfig& cfg);

}  // namespace sparsex
