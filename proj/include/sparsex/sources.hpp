#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparsex/gf2.hpp"

namespace sparsex {

/// A quantity of entropy in bits; never negative.
struct EntropyValue {
    double bits = 0.0;

    explicit EntropyValue(double b);
    friend auto operator<=>(const EntropyValue&, const EntropyValue&) = default;
};

/// Exact probability table over {0,1}^n, indexed so that bit i of the index
/// is bit i of the string. Limited to n <= max_bits.
class ExplicitDistribution {
public:
    static constexpr std::size_t max_bits = 24;
    static constexpr double sum_tolerance = 1e-9;

    ExplicitDistribution(std::size_t n, std::vector<double> table);

    static ExplicitDistribution uniform(std::size_t n);
    static ExplicitDistribution point_mass(const BitVector& a);

    std::size_t bits() const noexcept { return n_; }
    std::size_t size() const noexcept { return table_.size(); }
    double prob(std::uint64_t index) const { return table_[index]; }
    double prob(const BitVector& a) const;
    std::span<const double> table() const noexcept { return table_; }
    double max_probability() const noexcept;
    /// Indices with nonzero probability, ascending.
    std::vector<std::uint64_t> support() const;

private:
    std::size_t n_;
    std::vector<double> table_;
};

EntropyValue binary_entropy(double p);

struct EntropyInverseBounds {
    double lower;
    double upper;  // +inf when H(p) == 1
};

/// H(p)/(6 log2(2/H(p))) <= p <= H(p)/log2(1/H(p)) for p in (0, 1/2].
EntropyInverseBounds entropy_inverse_bounds(double p);

/// The unique p in (0, 1/2] with |H(p) - target| <= 1e-12, by bisection.
double solve_bias(EntropyValue target);

EntropyValue min_entropy(const ExplicitDistribution& D);

ExplicitDistribution flat_source(std::span<const BitVector> support);
ExplicitDistribution flat_source(std::size_t n, std::span<const std::uint64_t> support);

/// Each bit independently 1 with probability p.
ExplicitDistribution biased_source(std::size_t n, double p);

/// Weight below which a p-biased string is resampled uniformly: 0.9*p*n.
/// Strings of weight >= threshold (real comparison, ties kept) pass through.
double truncation_threshold(std::size_t n, double p);
bool truncation_keeps(std::size_t weight, std::size_t n, double p);
/// Pr[Bin(n,p) < 0.9pn], the mass redistributed uniformly.
double truncated_deficit_mass(std::size_t n, double p);
/// Closed-form max_a Pr[Xbar = a]; valid for any n (no table).
double truncated_max_probability(std::size_t n, double p);
ExplicitDistribution truncated_biased_source(std::size_t n, double p);

/// P'[a] = P[a xor y].
ExplicitDistribution shift_distribution(const ExplicitDistribution& D, const BitVector& y);

/// CSV with header "bits,prob"; bits as a 0/1 string, character i = bit i.
void write_distribution_csv(std::ostream& os, const ExplicitDistribution& D);
ExplicitDistribution read_distribution_csv(std::istream& is);

// ------------------------------------------------------------ flat batteries

/// 2^k distinct strings chosen uniformly at random.
std::vector<std::uint64_t> random_flat_support(std::size_t n, std::size_t k, std::uint64_t seed);
/// The 2^k strings of lowest Hamming weight (ties broken by index).
std::vector<std::uint64_t> low_weight_support(std::size_t n, std::size_t k);
/// A uniformly random affine subspace a + V with dim V = k.
std::vector<std::uint64_t> affine_support(std::size_t n, std::size_t k, std::uint64_t seed);

struct NamedSource {
    std::string name;
    ExplicitDistribution dist;
};

/// random flat, low-weight flat, and affine flat sources of min-entropy k.
std::vector<NamedSource> flat_source_battery(std::size_t n, std::size_t k, std::uint64_t seed);

// ------------------------------------------------------------------ sampler

enum class SourceKind { uniform, flat, biased, truncated_biased };

std::string to_string(SourceKind kind);
SourceKind source_kind_from_string(const std::string& name);

/// Seeded generator of n-bit strings. Draw i depends only on (seed, i), so
/// parallel consumers reproduce the same stream regardless of scheduling.
class SourceSampler {
public:
    static SourceSampler uniform(std::size_t n, std::uint64_t seed);
    static SourceSampler flat(std::vector<BitVector> support, std::uint64_t seed);
    static SourceSampler biased(std::size_t n, double p, std::uint64_t seed);
    static SourceSampler truncated_biased(std::size_t n, double p, std::uint64_t seed);
    /// y + inner. Shifts compose by xor.
    static SourceSampler shifted(const SourceSampler& inner, const BitVector& y);

    std::size_t bits() const noexcept { return n_; }
    SourceKind kind() const noexcept { return kind_; }
    double bias() const noexcept { return p_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const std::optional<BitVector>& shift() const noexcept { return shift_; }
    const std::vector<BitVector>& flat_support() const noexcept { return support_; }

    /// Returns the same sampler with a different seed.
    SourceSampler reseeded(std::uint64_t seed) const;

    BitVector draw(std::uint64_t index) const;
    /// Writes draw `index` into ceil(n/64) words.
    void draw_words(std::uint64_t index, std::span<std::uint64_t> out) const;

    /// Key/value form {kind, n, p, seed, shift[, support]}.
    std::string to_json() const;
    static SourceSampler from_json(const std::string& text);

private:
    SourceSampler(SourceKind kind, std::size_t n, double p, std::uint64_t seed);

    SourceKind kind_;
    std::size_t n_;
    double p_;
    std::uint64_t seed_;
    std::vector<BitVector> support_;
    std::optional<BitVector> shift_;
};

}  // namespace sparsex
