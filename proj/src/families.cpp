#include "sparsex/families.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "sparsex/rng.hpp"
#include "sparsex/sources.hpp"

namespace sparsex {

namespace {

void check_strong_ranges(std::size_t n, std::size_t m, std::size_t k, double delta) {
    if (!(1 <= m && m <= k && k <= n)) {
        throw InvalidArgument("strong family requires 1 <= m <= k <= n (got n=" + std::to_string(n) +
                              ", k=" + std::to_string(k) + ", m=" + std::to_string(m) + ")");
    }
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("strong family requires 0 < delta < 1");
}

}  // namespace

double strong_bias(std::size_t n, std::size_t m, double delta, double K) {
    if (m == 0 || n == 0) throw InvalidArgument("strong_bias: n and m must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("strong_bias: delta must lie in (0, 1)");
    if (!(K > 0.0)) throw InvalidArgument("strong_bias: K must be positive");
    const double mm = static_cast<double>(m);
    const double raw = (1.0 / mm) * std::log2(mm / delta) * std::log(K * static_cast<double>(n) / mm);
    if (!(raw > 0.0)) throw InvalidArgument("strong_bias: parameters give a nonpositive bias (K n / m must exceed 1)");
    return std::min(raw, 0.5);
}

double strong_bias_tight(std::size_t n, std::size_t m, std::size_t k, double delta) {
    check_strong_ranges(n, m, k, delta);
    const double kk = static_cast<double>(k);
    const double lg = std::log2(static_cast<double>(m) / delta);
    if (static_cast<double>(m) > kk / (2.0 * lg)) {
        throw InvalidArgument("tight bias requires m <= k / (2 log2(m/delta))");
    }
    const double raw = (1.0 / kk) * lg * std::log(15.0 * static_cast<double>(n) / kk);
    return std::min(raw, 0.5);
}

double weak_bias(std::size_t n, std::size_t m, double c, double K) {
    if (!(c > 1.0)) throw InvalidArgument("weak_bias: c must exceed 1");
    if (m == 0 || n == 0) throw InvalidArgument("weak_bias: n and m must be positive");
    const double ratio = static_cast<double>(n) / std::log(c);
    if (!(ratio > 1.0)) throw InvalidArgument("weak_bias: n / ln c must exceed 1");
    return std::min((K / static_cast<double>(m)) * std::log(ratio), 0.5);
}

StrongFamilySpec StrongFamilySpec::make(std::size_t n, std::size_t m, std::size_t k, double delta, double K,
                                        bool tight_p) {
    check_strong_ranges(n, m, k, delta);
    const double p = tight_p ? strong_bias_tight(n, m, k, delta) : strong_bias(n, m, delta, K);
    return {n, m, k, delta, K, p};
}

StrongFamilySpec StrongFamilySpec::with_bias(std::size_t n, std::size_t m, std::size_t k, double delta, double K,
                                             double p) {
    check_strong_ranges(n, m, k, delta);
    if (!(p >= 0.0 && p <= 0.5)) throw InvalidArgument("bias must lie in [0, 1/2]");
    return {n, m, k, delta, K, p};
}

WeakFamilySpec WeakFamilySpec::make(std::size_t n, std::size_t m, std::size_t s, std::size_t k, double c, double K,
                                    std::optional<std::size_t> t) {
    if (!(1 <= s && s < m)) throw InvalidArgument("weak family requires 1 <= s < m");
    if (!(1 <= k && k <= n)) throw InvalidArgument("weak family requires 1 <= k <= n");
    WeakFamilySpec spec;
    spec.n = n;
    spec.m = m;
    spec.s = s;
    spec.k = k;
    spec.c = c;
    spec.K = K;
    spec.p = weak_bias(n, m, c, K);
    spec.t = t.value_or(static_cast<std::size_t>(std::floor(static_cast<double>(m) / (2.0 * K))));
    if (spec.t >= m) throw InvalidArgument("weak family requires t < m");
    return spec;
}

Gf2Matrix sample_bernoulli_matrix(std::size_t rows, std::size_t cols, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 0.5)) throw InvalidArgument("entry probability must lie in [0, 1/2]");
    Gf2Matrix A(rows, cols);
    if (p == 0.0) return A;
    const auto sampler = SourceSampler::biased(cols, p, seed);
    for (std::size_t i = 0; i < rows; ++i) A.row(i) = sampler.draw(i);
    return A;
}

Gf2Matrix sample_row_weight_matrix(std::size_t rows, std::size_t cols, std::size_t weight, std::uint64_t seed) {
    if (weight > cols) throw InvalidArgument("row weight exceeds column count");
    Gf2Matrix A(rows, cols);
    std::vector<std::size_t> perm(cols);
    for (std::size_t i = 0; i < rows; ++i) {
        CounterRng rng(derive_seed(seed, i));
        for (std::size_t j = 0; j < cols; ++j) perm[j] = j;
        for (std::size_t j = 0; j < weight; ++j) {
            std::swap(perm[j], perm[j + rng.below(cols - j)]);
            A.set(i, perm[j]);
        }
    }
    return A;
}

FamilyInstance sample_strong(const StrongFamilySpec& spec, std::uint64_t seed) {
    FamilyInstance inst;
    inst.kind = FamilyKind::strong;
    inst.n = spec.n;
    inst.m = spec.m;
    inst.k = spec.k;
    inst.p = spec.p;
    inst.K = spec.K;
    inst.delta = spec.delta;
    inst.seed = seed;
    inst.M = sample_bernoulli_matrix(spec.m, spec.n, spec.p, seed);
    return inst;
}

std::string check_B(const Gf2Matrix& B, std::size_t s, std::size_t t) {
    if (B.cols() != s) return "B has " + std::to_string(B.cols()) + " columns, expected " + std::to_string(s);
    if (B.rows() <= s) return "B must have more rows than columns";
    if (const auto r = rank(B); r != s) {
        return "rank(B) = " + std::to_string(r) + " < s = " + std::to_string(s);
    }
    if (const auto kw = min_weight_left_kernel(B, t); !kw.exceeds()) {
        return "a set of " + std::to_string(*kw.weight) + " rows is linearly dependent (t = " + std::to_string(t) + ")";
    }
    return {};
}

ConstructBResult construct_B(const ConstructBOptions& o) {
    if (!(o.s >= 1 && o.s < o.m)) throw InvalidArgument("construct_B requires 1 <= s < m");
    if (o.t >= o.m) throw InvalidArgument("construct_B requires t < m");
    if (o.row_weight_target < 1 || o.row_weight_target > o.s) {
        throw InvalidArgument("construct_B requires 1 <= row_weight_target <= s");
    }
    if (o.max_tries == 0) throw InvalidArgument("construct_B requires max_tries >= 1");

    std::size_t rank_failures = 0;
    std::size_t dependence_failures = 0;
    std::string last_reason;
    std::vector<std::size_t> perm(o.s);
    for (std::size_t attempt = 0; attempt < o.max_tries; ++attempt) {
        CounterRng rng(derive_seed(o.seed, attempt));
        Gf2Matrix B(o.m, o.s);
        for (std::size_t i = 0; i < o.m; ++i) {
            const std::size_t w = 1 + rng.below(o.row_weight_target);
            for (std::size_t j = 0; j < o.s; ++j) perm[j] = j;
            for (std::size_t j = 0; j < w; ++j) {
                std::swap(perm[j], perm[j + rng.below(o.s - j)]);
                B.set(i, perm[j]);
            }
        }
        if (rank(B) != o.s) {
            ++rank_failures;
            last_reason = "rank(B) < s";
            continue;
        }
        if (o.t > 0 && !min_weight_left_kernel(B, o.t).exceeds()) {
            ++dependence_failures;
            last_reason = "some set of at most t rows is linearly dependent";
            continue;
        }
        if (auto why = check_B(B, o.s, o.t); !why.empty()) {
            throw std::logic_error("construct_B accepted a matrix that fails verification: " + why);
        }
        return {std::move(B), attempt + 1};
    }
    const bool rank_first = rank_failures >= dependence_failures;
    throw ConstructionError("construct_B: no valid " + std::to_string(o.m) + "x" + std::to_string(o.s) +
                            " matrix after " + std::to_string(o.max_tries) + " tries; violated condition: " +
                            (rank_first ? std::string("rank(B) < s") : std::string("some set of at most t = ") +
                                                                          std::to_string(o.t) +
                                                                          " rows is linearly dependent") +
                            " (rank failures " + std::to_string(rank_failures) + ", dependence failures " +
                            std::to_string(dependence_failures) + "; last: " + last_reason +
                            "); try a larger row_weight_target");
}

FamilyInstance sample_weak(const WeakFamilySpec& spec, const Gf2Matrix& B, std::uint64_t seed) {
    if (B.rows() != spec.m) throw InvalidArgument("sample_weak: B must have m rows");
    if (auto why = check_B(B, spec.s, spec.t); !why.empty()) throw InvalidArgument("sample_weak: invalid B: " + why);
    FamilyInstance inst;
    inst.kind = FamilyKind::weak;
    inst.n = spec.n;
    inst.m = spec.m;
    inst.s = spec.s;
    inst.k = spec.k;
    inst.p = spec.p;
    inst.K = spec.K;
    inst.c = spec.c;
    inst.t = spec.t;
    inst.seed = seed;
    inst.M = sample_bernoulli_matrix(spec.m, spec.n, spec.p, seed);
    inst.B = B;
    return inst;
}

BitVector evaluate(const FamilyInstance& inst, const BitVector& x, const std::optional<BitVector>& r) {
    if (inst.kind == FamilyKind::strong) {
        if (r) throw InvalidArgument("evaluate: strong family members take no seed");
        return matvec(inst.M, x);
    }
    if (!r) throw InvalidArgument("evaluate: weak family members need an s-bit seed");
    if (r->size() != inst.s) throw DimensionError("evaluate: seed length does not match s");
    return matvec_add(inst.M, x, *inst.B, *r);
}

std::string to_string(FamilyKind kind) { return kind == FamilyKind::strong ? "strong" : "weak"; }

void write_instance(std::ostream& os, const FamilyInstance& inst) {
    nlohmann::ordered_json h;
    h["kind"] = to_string(inst.kind);
    h["n"] = inst.n;
    h["m"] = inst.m;
    h["s"] = inst.s;
    h["k"] = inst.k;
    h["p"] = inst.p;
    h["K"] = inst.K;
    h["c"] = inst.c;
    h["delta"] = inst.delta;
    h["t"] = inst.t;
    h["seed"] = inst.seed;
    os << h.dump() << '\n';
    write_matrix(os, inst.M);
    if (inst.B) write_matrix(os, *inst.B);
}

FamilyInstance read_instance(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InvalidArgument("read_instance: missing header");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument(std::string("read_instance: bad header: ") + e.what());
    }
    FamilyInstance inst;
    try {
        const auto kind = h.at("kind").get<std::string>();
        if (kind != "strong" && kind != "weak") throw InvalidArgument("read_instance: unknown kind '" + kind + "'");
        inst.kind = kind == "strong" ? FamilyKind::strong : FamilyKind::weak;
        inst.n = h.at("n").get<std::size_t>();
        inst.m = h.at("m").get<std::size_t>();
        inst.s = h.at("s").get<std::size_t>();
        inst.k = h.value("k", std::size_t{0});
        inst.p = h.at("p").get<double>();
        inst.K = h.at("K").get<double>();
        inst.c = h.at("c").get<double>();
        inst.delta = h.at("delta").get<double>();
        inst.t = h.at("t").get<std::size_t>();
        inst.seed = h.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("read_instance: ") + e.what());
    }
    inst.M = read_matrix(is);
    if (inst.M.rows() != inst.m || inst.M.cols() != inst.n) throw DimensionError("read_instance: M dimensions differ from header");
    if (inst.kind == FamilyKind::weak) {
        inst.B = read_matrix(is);
        if (inst.B->rows() != inst.m || inst.B->cols() != inst.s) {
            throw DimensionError("read_instance: B dimensions differ from header");
        }
    }
    return inst;
}

}  // namespace sparsex
