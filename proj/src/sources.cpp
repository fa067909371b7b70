#include "sparsex/sources.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "sparsex/rng.hpp"

namespace sparsex {

namespace {

void check_table_bits(std::size_t n) {
    if (n == 0 || n > ExplicitDistribution::max_bits) {
        throw ResourceError("explicit distributions support 1 <= n <= " +
                            std::to_string(ExplicitDistribution::max_bits) + " bits, got " + std::to_string(n));
    }
}

void check_bias(double p) {
    if (!(p > 0.0 && p <= 0.5)) throw InvalidArgument("bias p must lie in (0, 1/2], got " + std::to_string(p));
}

double log_binomial_pmf(std::size_t n, std::size_t w, double p) {
    const auto nn = static_cast<double>(n);
    const auto ww = static_cast<double>(w);
    return std::lgamma(nn + 1) - std::lgamma(ww + 1) - std::lgamma(nn - ww + 1) + ww * std::log(p) +
           (nn - ww) * std::log1p(-p);
}

// p^w (1-p)^(n-w) for every w in [0, n].
std::vector<double> point_probabilities(std::size_t n, double p) {
    std::vector<double> out(n + 1);
    for (std::size_t w = 0; w <= n; ++w) {
        out[w] = std::exp(static_cast<double>(w) * std::log(p) + static_cast<double>(n - w) * std::log1p(-p));
    }
    return out;
}

std::uint64_t low_mask(std::size_t bits) {
    return bits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
}

void fill_uniform(std::span<std::uint64_t> out, std::size_t n, CounterRng& rng) {
    for (auto& w : out) w = rng();
    if (n % 64 != 0) out.back() &= low_mask(n % 64);
}

// Bernoulli(p) bits via geometric gaps between ones.
void fill_biased(std::span<std::uint64_t> out, std::size_t n, double p, CounterRng& rng) {
    if (p == 0.5) {
        fill_uniform(out, n, rng);
        return;
    }
    std::fill(out.begin(), out.end(), 0);
    const double log_q = std::log1p(-p);
    std::size_t pos = 0;
    while (true) {
        const double gap = std::floor(std::log(rng.uniform_open_zero()) / log_q);
        if (gap >= static_cast<double>(n - pos)) break;
        pos += static_cast<std::size_t>(gap);
        out[pos / 64] |= std::uint64_t{1} << (pos % 64);
        ++pos;
        if (pos >= n) break;
    }
}

std::size_t popcount_words(std::span<const std::uint64_t> words) {
    std::size_t w = 0;
    for (auto x : words) w += static_cast<std::size_t>(std::popcount(x));
    return w;
}

}  // namespace

EntropyValue::EntropyValue(double b) : bits(b) {
    if (!(b >= 0.0)) throw InvalidArgument("entropy must be nonnegative, got " + std::to_string(b));
}

// ------------------------------------------------------ ExplicitDistribution

ExplicitDistribution::ExplicitDistribution(std::size_t n, std::vector<double> table) : n_(n), table_(std::move(table)) {
    check_table_bits(n);
    if (table_.size() != (std::size_t{1} << n)) throw DimensionError("probability table size must be 2^n");
    double sum = 0.0;
    for (double v : table_) {
        if (!(v >= 0.0)) throw InvalidArgument("negative or NaN probability in table");
        sum += v;
    }
    if (std::abs(sum - 1.0) > sum_tolerance) {
        throw InvalidArgument("probabilities sum to " + std::to_string(sum) + ", not 1");
    }
}

ExplicitDistribution ExplicitDistribution::uniform(std::size_t n) {
    check_table_bits(n);
    return {n, std::vector<double>(std::size_t{1} << n, std::ldexp(1.0, -static_cast<int>(n)))};
}

ExplicitDistribution ExplicitDistribution::point_mass(const BitVector& a) {
    check_table_bits(a.size());
    std::vector<double> t(std::size_t{1} << a.size(), 0.0);
    t[a.to_index()] = 1.0;
    return {a.size(), std::move(t)};
}

double ExplicitDistribution::prob(const BitVector& a) const {
    if (a.size() != n_) throw DimensionError("string length does not match distribution");
    return table_[a.to_index()];
}

double ExplicitDistribution::max_probability() const noexcept {
    return *std::max_element(table_.begin(), table_.end());
}

std::vector<std::uint64_t> ExplicitDistribution::support() const {
    std::vector<std::uint64_t> out;
    for (std::uint64_t a = 0; a < table_.size(); ++a) {
        if (table_[a] > 0.0) out.push_back(a);
    }
    return out;
}

// ---------------------------------------------------------- entropy helpers

EntropyValue binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("binary_entropy: p must lie in [0, 1], got " + std::to_string(p));
    if (p == 0.0 || p == 1.0) return EntropyValue(0.0);
    return EntropyValue(-p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p));
}

EntropyInverseBounds entropy_inverse_bounds(double p) {
    check_bias(p);
    const double h = binary_entropy(p).bits;
    const double lower = h / (6.0 * std::log2(2.0 / h));
    const double upper = h >= 1.0 ? std::numeric_limits<double>::infinity() : h / std::log2(1.0 / h);
    return {lower, upper};
}

double solve_bias(EntropyValue target) {
    if (!(target.bits > 0.0 && target.bits <= 1.0)) {
        throw InvalidArgument("solve_bias: target entropy must lie in (0, 1], got " + std::to_string(target.bits));
    }
    if (target.bits == 1.0) return 0.5;
    // H is strictly increasing on (0, 1/2].
    double lo = 0.0;
    double hi = 0.5;
    for (int iter = 0; iter < 200 && hi - lo > 0.0; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (binary_entropy(mid).bits < target.bits) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double e_lo = std::abs(binary_entropy(lo > 0.0 ? lo : hi).bits - target.bits);
    const double e_hi = std::abs(binary_entropy(hi).bits - target.bits);
    return (lo > 0.0 && e_lo < e_hi) ? lo : hi;
}

EntropyValue min_entropy(const ExplicitDistribution& D) {
    return EntropyValue(std::max(0.0, -std::log2(D.max_probability())));
}

// ------------------------------------------------------------ distributions

ExplicitDistribution flat_source(std::span<const BitVector> support) {
    if (support.empty()) throw InvalidArgument("flat_source: support must be nonempty");
    const std::size_t n = support.front().size();
    std::vector<std::uint64_t> idx;
    idx.reserve(support.size());
    for (const auto& a : support) {
        if (a.size() != n) throw DimensionError("flat_source: support strings differ in length");
        check_table_bits(n);
        idx.push_back(a.to_index());
    }
    return flat_source(n, idx);
}

ExplicitDistribution flat_source(std::size_t n, std::span<const std::uint64_t> support) {
    check_table_bits(n);
    if (support.empty()) throw InvalidArgument("flat_source: support must be nonempty");
    std::vector<double> t(std::size_t{1} << n, 0.0);
    const double mass = 1.0 / static_cast<double>(support.size());
    for (auto a : support) {
        if (a >= t.size()) throw DimensionError("flat_source: support element out of range");
        if (t[a] != 0.0) throw InvalidArgument("flat_source: duplicate support element " + std::to_string(a));
        t[a] = mass;
    }
    return {n, std::move(t)};
}

ExplicitDistribution biased_source(std::size_t n, double p) {
    check_table_bits(n);
    check_bias(p);
    const auto by_weight = point_probabilities(n, p);
    std::vector<double> t(std::size_t{1} << n);
    for (std::uint64_t a = 0; a < t.size(); ++a) t[a] = by_weight[static_cast<std::size_t>(std::popcount(a))];
    return {n, std::move(t)};
}

double truncation_threshold(std::size_t n, double p) { return 0.9 * p * static_cast<double>(n); }

bool truncation_keeps(std::size_t weight, std::size_t n, double p) {
    return static_cast<double>(weight) >= truncation_threshold(n, p);
}

double truncated_deficit_mass(std::size_t n, double p) {
    check_bias(p);
    double q = 0.0;
    for (std::size_t w = 0; w <= n && !truncation_keeps(w, n, p); ++w) q += std::exp(log_binomial_pmf(n, w, p));
    return q;
}

double truncated_max_probability(std::size_t n, double p) {
    check_bias(p);
    std::size_t w = 0;
    while (!truncation_keeps(w, n, p)) ++w;
    // p <= 1/2 makes p^w (1-p)^(n-w) non-increasing in w, so the lightest
    // kept weight carries the largest point mass.
    const double kept = std::exp(static_cast<double>(w) * std::log(p) + static_cast<double>(n - w) * std::log1p(-p));
    return kept + truncated_deficit_mass(n, p) * std::ldexp(1.0, -static_cast<int>(n));
}

ExplicitDistribution truncated_biased_source(std::size_t n, double p) {
    check_table_bits(n);
    check_bias(p);
    const auto by_weight = point_probabilities(n, p);
    const double spread = truncated_deficit_mass(n, p) * std::ldexp(1.0, -static_cast<int>(n));
    std::vector<double> t(std::size_t{1} << n);
    for (std::uint64_t a = 0; a < t.size(); ++a) {
        const auto w = static_cast<std::size_t>(std::popcount(a));
        t[a] = (truncation_keeps(w, n, p) ? by_weight[w] : 0.0) + spread;
    }
    return {n, std::move(t)};
}

ExplicitDistribution shift_distribution(const ExplicitDistribution& D, const BitVector& y) {
    if (y.size() != D.bits()) throw DimensionError("shift_distribution: shift length does not match distribution");
    const std::uint64_t s = y.to_index();
    std::vector<double> t(D.size());
    for (std::uint64_t a = 0; a < t.size(); ++a) t[a] = D.prob(a ^ s);
    return {D.bits(), std::move(t)};
}

void write_distribution_csv(std::ostream& os, const ExplicitDistribution& D) {
    os << "bits,prob\n";
    char buf[32];
    for (std::uint64_t a = 0; a < D.size(); ++a) {
        std::snprintf(buf, sizeof buf, "%.17g", D.prob(a));
        os << BitVector::from_index(D.bits(), a).to_string() << ',' << buf << '\n';
    }
}

ExplicitDistribution read_distribution_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "bits,prob") throw InvalidArgument("distribution CSV must start with 'bits,prob'");
    std::size_t n = 0;
    std::vector<double> t;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InvalidArgument("distribution CSV: missing comma in '" + line + "'");
        const auto a = BitVector::from_string(line.substr(0, comma));
        if (t.empty()) {
            n = a.size();
            check_table_bits(n);
            t.assign(std::size_t{1} << n, 0.0);
        } else if (a.size() != n) {
            throw DimensionError("distribution CSV: inconsistent string lengths");
        }
        t[a.to_index()] = std::stod(line.substr(comma + 1));
    }
    if (t.empty()) throw InvalidArgument("distribution CSV has no rows");
    return {n, std::move(t)};
}

// --------------------------------------------------------------- batteries

std::vector<std::uint64_t> random_flat_support(std::size_t n, std::size_t k, std::uint64_t seed) {
    check_table_bits(n);
    if (k > n) throw InvalidArgument("random_flat_support: k must not exceed n");
    const std::uint64_t universe = std::uint64_t{1} << n;
    const std::uint64_t want = std::uint64_t{1} << k;
    CounterRng rng(seed);
    std::vector<std::uint64_t> out;
    out.reserve(want);
    if (2 * want >= universe) {
        std::vector<std::uint64_t> all(universe);
        std::iota(all.begin(), all.end(), 0);
        for (std::uint64_t i = 0; i < want; ++i) {
            std::swap(all[i], all[i + rng.below(universe - i)]);
        }
        out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(want));
    } else {
        std::vector<bool> seen(universe, false);
        while (out.size() < want) {
            const auto a = rng.below(universe);
            if (!seen[a]) {
                seen[a] = true;
                out.push_back(a);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::uint64_t> low_weight_support(std::size_t n, std::size_t k) {
    check_table_bits(n);
    if (k > n) throw InvalidArgument("low_weight_support: k must not exceed n");
    const std::uint64_t want = std::uint64_t{1} << k;
    // Largest weight needed, and how many strings of that weight to keep.
    std::uint64_t below = 0;
    std::size_t top = 0;
    std::uint64_t binom = 1;  // C(n, top)
    while (below + binom < want) {
        below += binom;
        binom = binom * (n - top) / (top + 1);
        ++top;
    }
    std::uint64_t top_quota = want - below;
    std::vector<std::uint64_t> light;
    std::vector<std::uint64_t> border;
    for (std::uint64_t a = 0; a < (std::uint64_t{1} << n); ++a) {
        const auto w = static_cast<std::size_t>(std::popcount(a));
        if (w < top) {
            light.push_back(a);
        } else if (w == top && top_quota > 0) {
            border.push_back(a);
            --top_quota;
        }
    }
    light.insert(light.end(), border.begin(), border.end());
    std::sort(light.begin(), light.end());
    return light;
}

std::vector<std::uint64_t> affine_support(std::size_t n, std::size_t k, std::uint64_t seed) {
    check_table_bits(n);
    if (k > n) throw InvalidArgument("affine_support: k must not exceed n");
    CounterRng rng(seed);
    const std::uint64_t mask = low_mask(n);
    std::vector<std::uint64_t> basis;    // as drawn
    std::vector<std::uint64_t> reduced;  // echelon copy for independence tests
    while (basis.size() < k) {
        const std::uint64_t v = rng() & mask;
        std::uint64_t r = v;
        for (auto b : reduced) r = std::min(r, r ^ b);
        if (r == 0) continue;
        basis.push_back(v);
        reduced.push_back(r);
        std::sort(reduced.begin(), reduced.end(), std::greater<>());
    }
    const std::uint64_t offset = rng() & mask;
    std::vector<std::uint64_t> out;
    out.reserve(std::size_t{1} << k);
    std::uint64_t cur = offset;
    out.push_back(cur);
    for (std::uint64_t g = 1; g < (std::uint64_t{1} << k); ++g) {
        cur ^= basis[static_cast<std::size_t>(std::countr_zero(g))];
        out.push_back(cur);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<NamedSource> flat_source_battery(std::size_t n, std::size_t k, std::uint64_t seed) {
    std::vector<NamedSource> out;
    out.push_back({"random_flat", flat_source(n, random_flat_support(n, k, derive_seed(seed, 1)))});
    out.push_back({"low_weight_flat", flat_source(n, low_weight_support(n, k))});
    out.push_back({"affine_flat", flat_source(n, affine_support(n, k, derive_seed(seed, 2)))});
    return out;
}

// ------------------------------------------------------------------ sampler

std::string to_string(SourceKind kind) {
    switch (kind) {
        case SourceKind::uniform: return "uniform";
        case SourceKind::flat: return "flat";
        case SourceKind::biased: return "biased";
        case SourceKind::truncated_biased: return "truncated_biased";
    }
    return "unknown";
}

SourceKind source_kind_from_string(const std::string& name) {
    if (name == "uniform") return SourceKind::uniform;
    if (name == "flat") return SourceKind::flat;
    if (name == "biased") return SourceKind::biased;
    if (name == "truncated_biased") return SourceKind::truncated_biased;
    throw InvalidArgument("unknown source kind '" + name + "'");
}

SourceSampler::SourceSampler(SourceKind kind, std::size_t n, double p, std::uint64_t seed)
    : kind_(kind), n_(n), p_(p), seed_(seed) {
    if (n == 0) throw InvalidArgument("sampler bit length must be positive");
}

SourceSampler SourceSampler::uniform(std::size_t n, std::uint64_t seed) {
    return {SourceKind::uniform, n, 0.5, seed};
}

SourceSampler SourceSampler::flat(std::vector<BitVector> support, std::uint64_t seed) {
    if (support.empty()) throw InvalidArgument("flat sampler needs a nonempty support");
    SourceSampler s(SourceKind::flat, support.front().size(), 0.0, seed);
    for (const auto& a : support) {
        if (a.size() != s.n_) throw DimensionError("flat sampler: support strings differ in length");
    }
    auto sorted = support;
    std::sort(sorted.begin(), sorted.end(), [](const BitVector& a, const BitVector& b) {
        return std::lexicographical_compare(a.words().begin(), a.words().end(), b.words().begin(), b.words().end());
    });
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InvalidArgument("flat sampler: support contains duplicates");
    }
    s.support_ = std::move(support);
    return s;
}

SourceSampler SourceSampler::biased(std::size_t n, double p, std::uint64_t seed) {
    check_bias(p);
    return {SourceKind::biased, n, p, seed};
}

SourceSampler SourceSampler::truncated_biased(std::size_t n, double p, std::uint64_t seed) {
    check_bias(p);
    return {SourceKind::truncated_biased, n, p, seed};
}

SourceSampler SourceSampler::shifted(const SourceSampler& inner, const BitVector& y) {
    if (y.size() != inner.n_) throw DimensionError("shift length does not match sampler");
    SourceSampler s = inner;
    if (s.shift_) {
        *s.shift_ ^= y;
    } else {
        s.shift_ = y;
    }
    return s;
}

SourceSampler SourceSampler::reseeded(std::uint64_t seed) const {
    SourceSampler s = *this;
    s.seed_ = seed;
    return s;
}

void SourceSampler::draw_words(std::uint64_t index, std::span<std::uint64_t> out) const {
    const std::size_t words = (n_ + 63) / 64;
    if (out.size() < words) throw DimensionError("draw_words: output buffer too small");
    out = out.first(words);
    CounterRng rng(derive_seed(seed_, index));
    switch (kind_) {
        case SourceKind::uniform:
            fill_uniform(out, n_, rng);
            break;
        case SourceKind::flat: {
            const auto& a = support_[rng.below(support_.size())];
            std::copy(a.words().begin(), a.words().end(), out.begin());
            break;
        }
        case SourceKind::biased:
            fill_biased(out, n_, p_, rng);
            break;
        case SourceKind::truncated_biased:
            fill_biased(out, n_, p_, rng);
            if (!truncation_keeps(popcount_words(out), n_, p_)) fill_uniform(out, n_, rng);
            break;
    }
    if (shift_) {
        const auto y = shift_->words();
        for (std::size_t k = 0; k < words; ++k) out[k] ^= y[k];
    }
}

BitVector SourceSampler::draw(std::uint64_t index) const {
    std::vector<std::uint64_t> buf((n_ + 63) / 64);
    draw_words(index, buf);
    return BitVector::from_words(n_, buf);
}

std::string SourceSampler::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = to_string(kind_);
    j["n"] = n_;
    j["p"] = p_;
    j["seed"] = seed_;
    j["shift"] = shift_ ? shift_->to_string() : std::string();
    if (kind_ == SourceKind::flat) {
        auto& arr = j["support"] = nlohmann::ordered_json::array();
        for (const auto& a : support_) arr.push_back(a.to_string());
    }
    return j.dump();
}

SourceSampler SourceSampler::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument(std::string("sampler config is not valid JSON: ") + e.what());
    }
    try {
        const auto kind = source_kind_from_string(j.at("kind").get<std::string>());
        const auto n = j.at("n").get<std::size_t>();
        const auto seed = j.at("seed").get<std::uint64_t>();
        std::optional<SourceSampler> s;
        switch (kind) {
            case SourceKind::uniform: s = uniform(n, seed); break;
            case SourceKind::biased: s = biased(n, j.at("p").get<double>(), seed); break;
            case SourceKind::truncated_biased: s = truncated_biased(n, j.at("p").get<double>(), seed); break;
            case SourceKind::flat: {
                std::vector<BitVector> support;
                for (const auto& a : j.at("support")) support.push_back(BitVector::from_string(a.get<std::string>()));
                s = flat(std::move(support), seed);
                if (s->n_ != n) throw DimensionError("sampler config: support length differs from n");
                break;
            }
        }
        const auto shift = j.value("shift", std::string());
        if (!shift.empty()) s = shifted(*s, BitVector::from_string(shift));
        return *s;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("sampler config: ") + e.what());
    }
}

}  // namespace sparsex
