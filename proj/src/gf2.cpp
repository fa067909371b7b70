#include "sparsex/gf2.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "sparsex/rng.hpp"

namespace sparsex {

namespace {

std::size_t words_for(std::size_t bits) { return (bits + BitVector::word_bits - 1) / BitVector::word_bits; }

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

// ---------------------------------------------------------------- BitVector

BitVector::BitVector(std::size_t length) : length_(length), words_(words_for(length), 0) {}

BitVector BitVector::from_string(std::string_view bits) {
    BitVector v(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1') {
            v.set(i);
        } else if (bits[i] != '0') {
            throw InvalidArgument("bit string may only contain '0' and '1': " + std::string(bits));
        }
    }
    return v;
}

BitVector BitVector::from_index(std::size_t length, std::uint64_t value) {
    if (length > word_bits) throw InvalidArgument("from_index requires length <= 64");
    BitVector v(length);
    if (length > 0) {
        const word_type mask = length == word_bits ? ~word_type{0} : ((word_type{1} << length) - 1);
        v.words_[0] = value & mask;
    }
    return v;
}

BitVector BitVector::from_words(std::size_t length, std::span<const word_type> words) {
    BitVector v(length);
    if (words.size() < v.words_.size()) throw DimensionError("from_words: too few words for length");
    std::copy_n(words.begin(), v.words_.size(), v.words_.begin());
    if (length % word_bits != 0 && !v.words_.empty()) {
        v.words_.back() &= (word_type{1} << (length % word_bits)) - 1;
    }
    return v;
}

BitVector BitVector::from_hex(std::size_t length, std::string_view hex) {
    if (hex.size() % 2 != 0) throw InvalidArgument("hex input must have an even number of digits");
    if (hex.size() * 4 < length) throw DimensionError("hex input shorter than the required bit length");
    BitVector v(length);
    for (std::size_t b = 0; b < hex.size() / 2; ++b) {
        const int hi = hex_digit(hex[2 * b]);
        const int lo = hex_digit(hex[2 * b + 1]);
        if (hi < 0 || lo < 0) throw InvalidArgument("invalid hex digit in: " + std::string(hex));
        const unsigned byte = static_cast<unsigned>(hi * 16 + lo);
        for (std::size_t k = 0; k < 8; ++k) {
            const std::size_t bit = 8 * b + k;
            if ((byte >> k) & 1U) {
                if (bit >= length) throw InvalidArgument("hex input sets bits beyond the bit length");
                v.set(bit);
            }
        }
    }
    return v;
}

BitVector BitVector::random(std::size_t length, CounterRng& rng) {
    BitVector v(length);
    for (auto& w : v.words_) w = rng();
    if (length % word_bits != 0 && !v.words_.empty()) {
        v.words_.back() &= (word_type{1} << (length % word_bits)) - 1;
    }
    return v;
}

BitVector BitVector::unit(std::size_t length, std::size_t position) {
    BitVector v(length);
    v.set(position);
    return v;
}

void BitVector::set(std::size_t i, bool value) {
    const word_type mask = word_type{1} << (i % word_bits);
    if (value) {
        words_[i / word_bits] |= mask;
    } else {
        words_[i / word_bits] &= ~mask;
    }
}

std::size_t BitVector::weight() const noexcept {
    std::size_t w = 0;
    for (auto word : words_) w += static_cast<std::size_t>(std::popcount(word));
    return w;
}

bool BitVector::is_zero() const noexcept {
    return std::all_of(words_.begin(), words_.end(), [](word_type w) { return w == 0; });
}

bool BitVector::dot(const BitVector& other) const {
    check_same_size(other);
    word_type acc = 0;
    for (std::size_t k = 0; k < words_.size(); ++k) acc ^= words_[k] & other.words_[k];
    return std::popcount(acc) & 1;
}

std::vector<std::size_t> BitVector::support() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < words_.size(); ++k) {
        word_type w = words_[k];
        while (w != 0) {
            out.push_back(k * word_bits + static_cast<std::size_t>(std::countr_zero(w)));
            w &= w - 1;
        }
    }
    return out;
}

BitVector& BitVector::operator^=(const BitVector& other) {
    check_same_size(other);
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] ^= other.words_[k];
    return *this;
}

std::uint64_t BitVector::to_index() const {
    if (length_ > word_bits) throw InvalidArgument("to_index requires length <= 64");
    return words_.empty() ? 0 : words_[0];
}

std::string BitVector::to_string() const {
    std::string s(length_, '0');
    for (std::size_t i = 0; i < length_; ++i) {
        if (get(i)) s[i] = '1';
    }
    return s;
}

std::string BitVector::to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    const std::size_t bytes = (length_ + 7) / 8;
    std::string s;
    s.reserve(2 * bytes);
    for (std::size_t b = 0; b < bytes; ++b) {
        const auto byte = static_cast<unsigned>((words_[b / 8] >> (8 * (b % 8))) & 0xffU);
        s.push_back(digits[byte >> 4]);
        s.push_back(digits[byte & 0xfU]);
    }
    return s;
}

void BitVector::check_same_size(const BitVector& other) const {
    if (length_ != other.length_) {
        throw DimensionError("bit vector length mismatch: " + std::to_string(length_) + " vs " +
                             std::to_string(other.length_));
    }
}

std::ostream& operator<<(std::ostream& os, const BitVector& v) { return os << v.to_string(); }

// ---------------------------------------------------------------- Gf2Matrix

Gf2Matrix::Gf2Matrix(std::size_t rows, std::size_t cols) : cols_(cols), rows_(rows, BitVector(cols)) {
    if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be positive");
}

Gf2Matrix::Gf2Matrix(std::vector<BitVector> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw DimensionError("matrix needs at least one row");
    cols_ = rows_.front().size();
    if (cols_ == 0) throw DimensionError("matrix needs at least one column");
    for (const auto& r : rows_) {
        if (r.size() != cols_) throw DimensionError("ragged matrix rows");
    }
}

Gf2Matrix Gf2Matrix::identity(std::size_t n) {
    Gf2Matrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I.set(i, i);
    return I;
}

Gf2Matrix Gf2Matrix::ones(std::size_t rows, std::size_t cols) {
    Gf2Matrix A(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) A.set(i, j);
    }
    return A;
}

Gf2Matrix Gf2Matrix::from_rows(std::initializer_list<std::string_view> rows) {
    std::vector<BitVector> packed;
    packed.reserve(rows.size());
    for (auto r : rows) packed.push_back(BitVector::from_string(r));
    return Gf2Matrix(std::move(packed));
}

Gf2Matrix Gf2Matrix::from_coordinates(std::size_t rows, std::size_t cols,
                                      std::span<const std::pair<std::size_t, std::size_t>> ones) {
    Gf2Matrix A(rows, cols);
    for (auto [i, j] : ones) {
        if (i >= rows || j >= cols) throw DimensionError("coordinate outside matrix bounds");
        A.set(i, j);
    }
    return A;
}

BitVector Gf2Matrix::column(std::size_t j) const {
    BitVector c(rows());
    for (std::size_t i = 0; i < rows(); ++i) {
        if (get(i, j)) c.set(i);
    }
    return c;
}

std::vector<std::pair<std::size_t, std::size_t>> Gf2Matrix::coordinates() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < rows(); ++i) {
        for (auto j : rows_[i].support()) out.emplace_back(i, j);
    }
    return out;
}

Gf2Matrix Gf2Matrix::transpose() const {
    Gf2Matrix T(cols_, rows());
    for (std::size_t i = 0; i < rows(); ++i) {
        for (auto j : rows_[i].support()) T.set(j, i);
    }
    return T;
}

bool Gf2Matrix::is_zero() const noexcept {
    return std::all_of(rows_.begin(), rows_.end(), [](const BitVector& r) { return r.is_zero(); });
}

// ---------------------------------------------------------------- operations

BitVector matvec(const Gf2Matrix& M, const BitVector& x) {
    if (x.size() != M.cols()) {
        throw DimensionError("matvec: x has length " + std::to_string(x.size()) + ", matrix has " +
                             std::to_string(M.cols()) + " columns");
    }
    BitVector y(M.rows());
    for (std::size_t j = 0; j < M.rows(); ++j) {
        if (M.row(j).dot(x)) y.set(j);
    }
    return y;
}

BitVector matvec_add(const Gf2Matrix& M, const BitVector& x, const Gf2Matrix& B, const BitVector& r) {
    if (M.rows() != B.rows()) throw DimensionError("matvec_add: M and B have different row counts");
    auto y = matvec(M, x);
    y ^= matvec(B, r);
    return y;
}

std::uint64_t matvec_packed(const Gf2Matrix& M, std::span<const std::uint64_t> x) {
    std::uint64_t out = 0;
    for (std::size_t j = 0; j < M.rows(); ++j) {
        const auto row = M.row(j).words();
        std::uint64_t acc = 0;
        for (std::size_t k = 0; k < row.size(); ++k) acc ^= row[k] & x[k];
        out |= static_cast<std::uint64_t>(std::popcount(acc) & 1) << j;
    }
    return out;
}

namespace {

// Row-reduces `rows` in place; `tags` (if nonempty) receive the same row
// operations. Returns the number of pivot rows, which end up first.
std::size_t eliminate(std::vector<BitVector>& rows, std::vector<BitVector>* tags, std::size_t cols) {
    std::size_t pivot_row = 0;
    for (std::size_t c = 0; c < cols && pivot_row < rows.size(); ++c) {
        std::size_t sel = pivot_row;
        while (sel < rows.size() && !rows[sel].get(c)) ++sel;
        if (sel == rows.size()) continue;
        std::swap(rows[sel], rows[pivot_row]);
        if (tags != nullptr) std::swap((*tags)[sel], (*tags)[pivot_row]);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i != pivot_row && rows[i].get(c)) {
                rows[i] ^= rows[pivot_row];
                if (tags != nullptr) (*tags)[i] ^= (*tags)[pivot_row];
            }
        }
        ++pivot_row;
    }
    return pivot_row;
}

// Visits every size-`size` subset of {0..n-1} in lexicographic order;
// stops early when `visit` returns true.
template <typename Visit>
bool for_each_subset(std::size_t n, std::size_t size, Visit&& visit) {
    if (size > n) return false;
    std::vector<std::size_t> idx(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    while (true) {
        if (visit(std::span<const std::size_t>(idx))) return true;
        std::size_t i = size;
        while (i > 0 && idx[i - 1] == n - size + (i - 1)) --i;
        if (i == 0) return false;
        ++idx[i - 1];
        for (std::size_t k = i; k < size; ++k) idx[k] = idx[k - 1] + 1;
    }
}

std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        acc = acc * (n - k + i) / i;
        if (acc > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(acc);
}

}  // namespace

std::size_t rank(const Gf2Matrix& M) {
    std::vector<BitVector> rows;
    rows.reserve(M.rows());
    for (std::size_t i = 0; i < M.rows(); ++i) rows.push_back(M.row(i));
    return eliminate(rows, nullptr, M.cols());
}

std::vector<BitVector> left_kernel_basis(const Gf2Matrix& M) {
    std::vector<BitVector> rows;
    std::vector<BitVector> tags;
    rows.reserve(M.rows());
    tags.reserve(M.rows());
    for (std::size_t i = 0; i < M.rows(); ++i) {
        rows.push_back(M.row(i));
        tags.push_back(BitVector::unit(M.rows(), i));
    }
    const std::size_t r = eliminate(rows, &tags, M.cols());
    // Rows past the pivots reduced to zero; their tags record the combination.
    return {std::make_move_iterator(tags.begin() + static_cast<std::ptrdiff_t>(r)),
            std::make_move_iterator(tags.end())};
}

KernelWeight min_weight_left_kernel(const Gf2Matrix& M, std::size_t cap, std::uint64_t subset_budget) {
    const auto basis = left_kernel_basis(M);
    if (basis.empty() || cap == 0) return KernelWeight::exceeds_cap(cap);

    if (basis.size() <= kernel_enumeration_limit) {
        // Gray-code walk over every nonzero kernel vector.
        BitVector current(M.rows());
        std::size_t best = M.rows() + 1;
        const std::uint64_t count = std::uint64_t{1} << basis.size();
        for (std::uint64_t g = 1; g < count; ++g) {
            current ^= basis[static_cast<std::size_t>(std::countr_zero(g))];
            best = std::min(best, current.weight());
        }
        return best <= cap ? KernelWeight::found(best, cap) : KernelWeight::exceeds_cap(cap);
    }

    const std::size_t max_size = std::min(cap, M.rows());
    std::uint64_t planned = 0;
    for (std::size_t w = 1; w <= max_size; ++w) {
        planned += binomial_saturating(M.rows(), w);
        if (planned > subset_budget) {
            throw ResourceError("min_weight_left_kernel: kernel dimension " + std::to_string(basis.size()) +
                                " too large to enumerate and row-subset search up to size " +
                                std::to_string(cap) + " exceeds the budget of " + std::to_string(subset_budget));
        }
    }
    BitVector acc(M.cols());
    for (std::size_t w = 1; w <= max_size; ++w) {
        const bool hit = for_each_subset(M.rows(), w, [&](std::span<const std::size_t> idx) {
            acc = M.row(idx[0]);
            for (std::size_t k = 1; k < idx.size(); ++k) acc ^= M.row(idx[k]);
            return acc.is_zero();
        });
        if (hit) return KernelWeight::found(w, cap);
    }
    return KernelWeight::exceeds_cap(cap);
}

SparsityReport sparsity_and_locality(const Gf2Matrix& M) {
    SparsityReport rep;
    std::vector<std::size_t> col_weight(M.cols(), 0);
    for (std::size_t i = 0; i < M.rows(); ++i) {
        const auto supp = M.row(i).support();
        rep.total_ones += supp.size();
        rep.max_row_weight = std::max(rep.max_row_weight, supp.size());
        for (auto j : supp) ++col_weight[j];
    }
    for (auto w : col_weight) rep.max_col_weight = std::max(rep.max_col_weight, w);
    return rep;
}

void write_matrix(std::ostream& os, const Gf2Matrix& M) {
    os << M.rows() << ' ' << M.cols() << '\n';
    for (auto [i, j] : M.coordinates()) os << i << ' ' << j << '\n';
    os << '\n';
}

Gf2Matrix read_matrix(std::istream& is) {
    std::string line;
    while (std::getline(is, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
    }
    if (!is && line.empty()) throw InvalidArgument("read_matrix: missing header line");
    std::size_t rows = 0;
    std::size_t cols = 0;
    {
        std::istringstream header(line);
        if (!(header >> rows >> cols) || rows == 0 || cols == 0) {
            throw InvalidArgument("read_matrix: bad header '" + line + "'");
        }
    }
    Gf2Matrix M(rows, cols);
    std::pair<std::size_t, std::size_t> prev{0, 0};
    bool first = true;
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) break;
        std::istringstream entry(line);
        std::size_t i = 0;
        std::size_t j = 0;
        if (!(entry >> i >> j)) throw InvalidArgument("read_matrix: bad entry '" + line + "'");
        if (i >= rows || j >= cols) throw DimensionError("read_matrix: entry outside bounds '" + line + "'");
        const std::pair<std::size_t, std::size_t> cur{i, j};
        if (!first && !(prev < cur)) throw InvalidArgument("read_matrix: entries not strictly sorted at '" + line + "'");
        M.set(i, j);
        prev = cur;
        first = false;
    }
    return M;
}

}  // namespace sparsex
