#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sparsex/errors.hpp"

namespace sparsex {

class CounterRng;

/// Packed vector over GF(2). Bit i lives in word i/64 at position i%64;
/// padding bits past `size()` are always zero.
class BitVector {
public:
    using word_type = std::uint64_t;
    static constexpr std::size_t word_bits = 64;

    BitVector() = default;
    explicit BitVector(std::size_t length);

    /// Parses a string of '0'/'1' characters; character i becomes bit i.
    static BitVector from_string(std::string_view bits);
    /// Bit i of the result is bit i of `value`. Requires length <= 64.
    static BitVector from_index(std::size_t length, std::uint64_t value);
    static BitVector from_words(std::size_t length, std::span<const word_type> words);
    /// Little-endian hex: byte b carries bits 8b..8b+7, least significant first.
    static BitVector from_hex(std::size_t length, std::string_view hex);
    static BitVector random(std::size_t length, CounterRng& rng);
    static BitVector unit(std::size_t length, std::size_t position);

    std::size_t size() const noexcept { return length_; }
    bool empty() const noexcept { return length_ == 0; }

    bool get(std::size_t i) const { return (words_[i / word_bits] >> (i % word_bits)) & 1U; }
    bool operator[](std::size_t i) const { return get(i); }
    void set(std::size_t i, bool value = true);
    void flip(std::size_t i) { words_[i / word_bits] ^= word_type{1} << (i % word_bits); }

    std::size_t weight() const noexcept;
    bool is_zero() const noexcept;
    /// Parity of the AND with `other`, i.e. the GF(2) inner product.
    bool dot(const BitVector& other) const;
    std::vector<std::size_t> support() const;

    BitVector& operator^=(const BitVector& other);
    friend BitVector operator^(BitVector lhs, const BitVector& rhs) { return lhs ^= rhs; }
    friend bool operator==(const BitVector&, const BitVector&) = default;

    /// Integer with bit i equal to bit i of the vector. Requires size() <= 64.
    std::uint64_t to_index() const;
    std::string to_string() const;
    std::string to_hex() const;

    std::span<const word_type> words() const noexcept { return words_; }
    std::span<word_type> words() noexcept { return words_; }

private:
    void check_same_size(const BitVector& other) const;

    std::size_t length_ = 0;
    std::vector<word_type> words_;
};

std::ostream& operator<<(std::ostream& os, const BitVector& v);

/// Minimum weight of a nonzero left-kernel vector, or "exceeds cap".
struct KernelWeight {
    std::optional<std::size_t> weight;  // nullopt: every nonzero kernel vector is heavier than cap
    std::size_t cap = 0;

    bool exceeds() const noexcept { return !weight.has_value(); }
    static KernelWeight exceeds_cap(std::size_t cap) { return {std::nullopt, cap}; }
    static KernelWeight found(std::size_t w, std::size_t cap) { return {w, cap}; }
    friend bool operator==(const KernelWeight&, const KernelWeight&) = default;
};

struct SparsityReport {
    std::size_t total_ones = 0;
    std::size_t max_row_weight = 0;  // output locality
    std::size_t max_col_weight = 0;  // per-input fan-out
    friend bool operator==(const SparsityReport&, const SparsityReport&) = default;
};

/// Dense m x n matrix over GF(2), stored as packed rows.
class Gf2Matrix {
public:
    Gf2Matrix() = default;
    Gf2Matrix(std::size_t rows, std::size_t cols);
    explicit Gf2Matrix(std::vector<BitVector> rows);

    static Gf2Matrix identity(std::size_t n);
    static Gf2Matrix ones(std::size_t rows, std::size_t cols);
    /// Rows given as '0'/'1' strings, e.g. {"110", "011"}.
    static Gf2Matrix from_rows(std::initializer_list<std::string_view> rows);
    static Gf2Matrix from_coordinates(std::size_t rows, std::size_t cols,
                                      std::span<const std::pair<std::size_t, std::size_t>> ones);

    std::size_t rows() const noexcept { return rows_.size(); }
    std::size_t cols() const noexcept { return cols_; }

    bool get(std::size_t i, std::size_t j) const { return rows_[i].get(j); }
    void set(std::size_t i, std::size_t j, bool value = true) { rows_[i].set(j, value); }
    const BitVector& row(std::size_t i) const { return rows_[i]; }
    BitVector& row(std::size_t i) { return rows_[i]; }
    BitVector column(std::size_t j) const;

    /// Lexicographically sorted (row, col) positions of the ones.
    std::vector<std::pair<std::size_t, std::size_t>> coordinates() const;

    Gf2Matrix transpose() const;
    bool is_zero() const noexcept;

    friend bool operator==(const Gf2Matrix&, const Gf2Matrix&) = default;

private:
    std::size_t cols_ = 0;
    std::vector<BitVector> rows_;
};

/// Mx. Throws DimensionError unless x.size() == M.cols().
BitVector matvec(const Gf2Matrix& M, const BitVector& x);
/// Mx + Br.
BitVector matvec_add(const Gf2Matrix& M, const BitVector& x, const Gf2Matrix& B, const BitVector& r);

/// Packed Mx for M with at most 64 rows: bit j of the result is output j.
/// `x` must hold ceil(M.cols()/64) words.
std::uint64_t matvec_packed(const Gf2Matrix& M, std::span<const std::uint64_t> x);

std::size_t rank(const Gf2Matrix& M);

/// Basis of { c : c^T M = 0 }, each vector of length M.rows().
std::vector<BitVector> left_kernel_basis(const Gf2Matrix& M);

/// Kernel dimension up to which min_weight_left_kernel enumerates the whole
/// kernel; above it, row subsets of size <= cap are searched instead.
inline constexpr std::size_t kernel_enumeration_limit = 24;
inline constexpr std::uint64_t default_subset_budget = std::uint64_t{1} << 30;

/// Minimum Hamming weight of a nonzero c with c^T M = 0, reported only when
/// it is <= cap. Equivalently: exceeds() iff every set of at most cap rows
/// is linearly independent. Throws ResourceError when the subset search
/// would visit more than `subset_budget` subsets.
KernelWeight min_weight_left_kernel(const Gf2Matrix& M, std::size_t cap,
                                    std::uint64_t subset_budget = default_subset_budget);

SparsityReport sparsity_and_locality(const Gf2Matrix& M);

/// Text format: "rows cols" then one "i j" line per one (0-based, sorted),
/// terminated by a blank line.
void write_matrix(std::ostream& os, const Gf2Matrix& M);
/// Reads one blank-line-terminated (or EOF-terminated) matrix block.
Gf2Matrix read_matrix(std::istream& is);

}  // namespace sparsex
