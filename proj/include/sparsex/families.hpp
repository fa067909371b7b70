#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "sparsex/gf2.hpp"

namespace sparsex {

inline constexpr double default_family_constant = 20.0;

/// Parameters of the seedless family H(x) = Mx with Bernoulli(p) entries.
struct StrongFamilySpec {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t k = 0;
    double delta = 0.0;
    double K = default_family_constant;
    double p = 0.0;

    /// Validates 1 <= m <= k <= n and 0 < delta < 1, then derives p.
    /// With `tight_p`, uses the sharper (1/k) log2(m/delta) ln(15n/k), which
    /// is only available when m <= k / (2 log2(m/delta)).
    static StrongFamilySpec make(std::size_t n, std::size_t m, std::size_t k, double delta,
                                 double K = default_family_constant, bool tight_p = false);
    /// Same validation but with p fixed by the caller (e.g. p = 1/2).
    static StrongFamilySpec with_bias(std::size_t n, std::size_t m, std::size_t k, double delta, double K, double p);
};

/// Parameters of the seeded family H(x, r) = Mx + Br.
struct WeakFamilySpec {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t s = 0;
    std::size_t k = 0;
    double c = 2.0;
    double K = default_family_constant;
    double p = 0.0;
    std::size_t t = 0;  // every t rows of B must be independent

    /// Validates 1 <= s < m, 1 <= k <= n, c > 1 and derives p. `t` defaults
    /// to floor(m / 2K), which is 0 (vacuous) at small m.
    static WeakFamilySpec make(std::size_t n, std::size_t m, std::size_t s, std::size_t k, double c,
                               double K = default_family_constant, std::optional<std::size_t> t = std::nullopt);
};

/// min{ (1/m) log2(m/delta) ln(K n / m), 1/2 }.
double strong_bias(std::size_t n, std::size_t m, double delta, double K);
/// min{ (1/k) log2(m/delta) ln(15 n / k), 1/2 }, valid when m <= k / (2 log2(m/delta)).
double strong_bias_tight(std::size_t n, std::size_t m, std::size_t k, double delta);
/// min{ (K/m) ln(n / ln c), 1/2 }.
double weak_bias(std::size_t n, std::size_t m, double c, double K);

enum class FamilyKind { strong, weak };

/// One sampled member of a family, with the parameters it was drawn under.
struct FamilyInstance {
    FamilyKind kind = FamilyKind::strong;
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t s = 0;
    std::size_t k = 0;
    double p = 0.0;
    double K = default_family_constant;
    double c = 0.0;
    double delta = 0.0;
    std::size_t t = 0;
    std::uint64_t seed = 0;
    Gf2Matrix M;
    std::optional<Gf2Matrix> B;
};

/// m x n matrix with i.i.d. Bernoulli(p) entries.
Gf2Matrix sample_bernoulli_matrix(std::size_t rows, std::size_t cols, double p, std::uint64_t seed);
/// rows x cols matrix whose rows each have exactly `weight` ones.
Gf2Matrix sample_row_weight_matrix(std::size_t rows, std::size_t cols, std::size_t weight, std::uint64_t seed);

FamilyInstance sample_strong(const StrongFamilySpec& spec, std::uint64_t seed);

struct ConstructBOptions {
    std::size_t m = 0;
    std::size_t s = 0;
    std::size_t row_weight_target = 2;
    std::size_t t = 2;
    std::uint64_t seed = 0;
    std::size_t max_tries = 100000;
};

struct ConstructBResult {
    Gf2Matrix B;
    std::size_t tries = 0;
};

/// Rejection-samples a sparse m x s matrix of full column rank in which
/// every set of at most t rows is independent. Row weights are uniform in
/// [1, row_weight_target] with uniformly chosen supports. The accepted
/// matrix is re-verified with rank() and min_weight_left_kernel(). Throws
/// ConstructionError naming the most frequent violated condition.
ConstructBResult construct_B(const ConstructBOptions& opts);

/// Checks rank(B) == s and that no <= t rows are dependent. Returns an
/// empty string when B qualifies, otherwise the first violated condition.
std::string check_B(const Gf2Matrix& B, std::size_t s, std::size_t t);

/// Throws InvalidArgument when B does not match `spec`.
FamilyInstance sample_weak(const WeakFamilySpec& spec, const Gf2Matrix& B, std::uint64_t seed);

/// Mx for strong members, Mx + Br for weak ones.
BitVector evaluate(const FamilyInstance& inst, const BitVector& x, const std::optional<BitVector>& r = std::nullopt);

std::string to_string(FamilyKind kind);

/// One-line JSON header followed by the M block and, for weak members, the
/// B block, both in the matrix text format.
void write_instance(std::ostream& os, const FamilyInstance& inst);
FamilyInstance read_instance(std::istream& is);

}  // namespace sparsex
