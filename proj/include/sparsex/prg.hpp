#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sparsex/families.hpp"
#include "sparsex/gf2.hpp"

namespace sparsex {

/// f: {0,1}^n_in -> {0,1}^n_out where output j reads gates[j].inputs
/// through the truth table gates[j].table (entry a: input q is bit q of a).
class LocalFunction {
public:
    struct Gate {
        std::vector<std::uint32_t> inputs;
        std::vector<std::uint8_t> table;  // 2^arity entries, each 0 or 1
    };

    LocalFunction(std::size_t n_in, std::vector<Gate> gates);

    /// Each output reads `ell` distinct inputs through a random truth table.
    static LocalFunction random(std::size_t n, std::size_t ell, std::uint64_t seed);
    static LocalFunction identity(std::size_t n);
    static LocalFunction constant_zero(std::size_t n);

    std::size_t input_length() const noexcept { return n_in_; }
    std::size_t output_length() const noexcept { return gates_.size(); }
    /// Largest gate arity.
    std::size_t locality() const noexcept;
    const std::vector<Gate>& gates() const noexcept { return gates_; }

    BitVector operator()(const BitVector& x) const;

private:
    std::size_t n_in_;
    std::vector<Gate> gates_;
};

/// t blocks, each built from k_blocks strings of n bits. Block i drops its
/// first offsets[i] bits and its last 2n - offsets[i] bits, leaving
/// m_cols() = 2(k_blocks - 1)n bits for every offset in [1, n].
struct BlockLayout {
    std::size_t n = 0;
    std::size_t k_blocks = 0;
    std::size_t t = 0;
    std::vector<std::size_t> offsets;

    std::size_t m_cols() const noexcept { return 2 * (k_blocks - 1) * n; }

    static BlockLayout make(std::size_t n, std::size_t k_blocks, std::size_t t, std::vector<std::size_t> offsets);
    static BlockLayout with_random_offsets(std::size_t n, std::size_t k_blocks, std::size_t t, std::uint64_t seed);
};

/// z_i from f(x_i1) o x_i1 o ... o f(x_ik) o x_ik; x_strings is t x k_blocks
/// in row-major order (x_strings[i * k_blocks + j] = x_ij).
std::vector<BitVector> build_blocks(const LocalFunction& f, const BlockLayout& layout,
                                    std::span<const BitVector> x_strings);

/// X_j = z_1j z_2j ... z_tj. Throws DimensionError on ragged blocks.
std::vector<BitVector> transpose_blocks(std::span<const BitVector> z);

struct CircuitTerm {
    enum class Kind : std::uint8_t { input, gate };
    Kind kind = Kind::input;
    std::uint32_t index = 0;
    friend bool operator==(const CircuitTerm&, const CircuitTerm&) = default;
};

/// An output bit: constant xor the xor of its terms. `deps` lists exactly
/// the inputs the bit depends on.
struct OutputRule {
    std::vector<CircuitTerm> terms;
    bool constant = false;
    std::vector<std::uint32_t> deps;
};

struct InputSegment {
    std::string name;
    std::size_t offset = 0;
    std::size_t length = 0;
};

struct CircuitAccounting {
    std::size_t total_sparsity = 0;
    std::size_t max_locality = 0;
    std::ptrdiff_t stretch = 0;  // outputs - inputs
};

/// Dependency-explicit affine-over-gates circuit for G and G'.
struct PrgCircuit {
    std::size_t input_length = 0;
    std::size_t ell = 0;
    std::vector<InputSegment> segments;
    std::vector<LocalFunction::Gate> gates;  // inputs are global input indices
    std::vector<OutputRule> outputs;
    /// For each output, the index of the G output it came from (identity for G).
    std::vector<std::size_t> origin;
    // Metadata, refreshed by refresh_metadata().
    std::size_t locality = 0;
    std::size_t total_sparsity = 0;

    std::size_t output_length() const noexcept { return outputs.size(); }
    BitVector evaluate(const BitVector& input) const;
    /// Recomputes every deps list from the rules and the derived metadata.
    void refresh_metadata();
    /// Throws InvalidArgument if any index is out of range or metadata is stale.
    void validate() const;
};

/// Exact dependency set of one rule: an input is listed iff some assignment
/// changes the output when only that input flips.
std::vector<std::uint32_t> rule_dependencies(const OutputRule& rule, std::span<const LocalFunction::Gate> gates);

/// G(x, r) = (H_1(X_1, r_1), ..., H_m(X_m, r_m)). `instances` holds either
/// one weak member shared by every column or one per column; each takes
/// t-bit inputs. Inputs: segment "x" (x_ij bit b at (i k + j) n + b), then
/// segment "r" (column j's seed at n k t + j s).
PrgCircuit build_G(const LocalFunction& f, const BlockLayout& layout, std::span<const FamilyInstance> instances);

/// Direct evaluation of G from the same inputs, without the circuit.
BitVector evaluate_G_directly(const LocalFunction& f, const BlockLayout& layout,
                              std::span<const FamilyInstance> instances, const BitVector& input);

/// Replaces each output with T >= 4 terms by the chain
/// (a1 + a2 + r3, r3 + a3 + r4, ..., r(T-1) + a(T-1) + aT) over T - 3 fresh
/// inputs (segment "aux"). The xor of each chain equals the original bit.
PrgCircuit locality_reduce(const PrgCircuit& G);

CircuitAccounting accounting(const PrgCircuit& circuit);

std::string circuit_to_json(const PrgCircuit& circuit);
PrgCircuit circuit_from_json(const std::string& text);

}  // namespace sparsex
