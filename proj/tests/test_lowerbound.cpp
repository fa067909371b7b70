#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sparsex/families.hpp"
#include "sparsex/lowerbound.hpp"
#include "sparsex/rng.hpp"
#include "sparsex/sources.hpp"

using namespace sparsex;

namespace {

// Distance-based membership by enumerating heavy assignments.
bool membership_oracle(const BitVector& z, const BitVector& y, const Gf2Matrix& M, const Partition& part,
                       const AdversaryParams& params) {
    for (std::uint64_t a = 0; a < (std::uint64_t{1} << part.heavy.size()); ++a) {
        BitVector x = y;
        for (std::size_t b = 0; b < part.heavy.size(); ++b) x.set(part.heavy[b], (a >> b) & 1U);
        const auto c = matvec(M, x);
        const double dist = static_cast<double>((c ^ z).weight()) / static_cast<double>(M.rows());
        if (dist <= params.distance_radius + 1e-12) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("adversary parameters") {
    const auto p16 = make_params(16, 4);
    CHECK(p16.p == doctest::Approx(0.110).epsilon(1e-2));
    CHECK(p16.beta == 0.08);
    CHECK(p16.heavy_threshold == doctest::Approx(std::pow(4.0, 2 - 6 * 0.08) / (p16.p * 16)));
    CHECK(p16.distance_radius == doctest::Approx(0.5 - std::pow(4.0, -0.08) / 4));
    CHECK_FALSE(p16.in_asymptotic_range);
    CHECK(make_params(64, 8).in_asymptotic_range);
    CHECK_THROWS_AS(make_params(10, 6), InvalidArgument);
    CHECK_THROWS_AS(make_params(64, 8, 0.1), InvalidArgument);
    CHECK_THROWS_AS(make_params(64, 8, 0.0), InvalidArgument);
}

TEST_CASE("bias window sandwich on a log grid") {
    for (std::size_t n = 64; n <= 4096; n *= 2) {
        for (std::size_t m = 1; 6 * m <= n; m = m * 3 / 2 + 1) {
            const auto params = make_params(n, m);
            const auto w = bias_window(n, m);
            CHECK(w.lower == doctest::Approx(m / (3.0 * n * std::log2(static_cast<double>(n) / m))));
            CHECK(w.upper == doctest::Approx(2.0 * m / (n * std::log2(n / (2.0 * m)))));
            CHECK(w.contains(params.p));
            CHECK(params.window.contains(params.p));
        }
    }
}

TEST_CASE("heavy light partition") {
    const auto params = make_params(16, 4);
    CHECK(params.heavy_threshold > 1.0);
    const auto id = heavy_light_partition(Gf2Matrix(4, 16), params);
    CHECK(id.heavy.empty());
    CHECK(id.light.size() == 16);

    // At desk scale the threshold exceeds m, so lower it by hand.
    auto low = params;
    low.heavy_threshold = 3.0;
    Gf2Matrix M(4, 16);
    for (std::size_t i = 0; i < 4; ++i) M.set(i, 5);
    M.set(0, 0);
    CHECK(heavy_light_partition(M, params).heavy.empty());
    const auto part = heavy_light_partition(M, low);
    CHECK(part.heavy == std::vector<std::size_t>{5});
    CHECK(part.light.size() == 15);

    CounterRng rng(3);
    const auto R = sample_bernoulli_matrix(8, 64, 0.3, 9);
    const auto p8 = make_params(64, 8);
    const auto counts = participation_counts(R);
    const auto rp = heavy_light_partition(R, p8);
    for (std::size_t j = 0; j < 64; ++j) CHECK(counts[j] == R.column(j).weight());
    for (auto j : rp.heavy) CHECK(static_cast<double>(counts[j]) >= p8.heavy_threshold);
    for (auto j : rp.light) CHECK(static_cast<double>(counts[j]) < p8.heavy_threshold);
    CHECK(rp.heavy.size() + rp.light.size() == 64);
}

TEST_CASE("test membership examples") {
    auto params = make_params(16, 4);
    params.distance_radius = 0.2;
    CounterRng rng(5);
    const auto M = sample_bernoulli_matrix(4, 16, 0.3, 1);
    Partition part{{2, 7}, {}};
    for (std::size_t j = 0; j < 16; ++j) {
        if (j != 2 && j != 7) part.light.push_back(j);
    }
    const auto y = BitVector::random(16, rng);
    // Distance zero from a candidate.
    BitVector x = y;
    x.set(2, true);
    x.set(7, false);
    CHECK(test_membership(matvec(M, x), y, M, part, params));

    // Radius below 1/4 with m = 4 admits only exact matches.
    for (std::uint64_t z = 0; z < 16; ++z) {
        const auto zv = BitVector::from_index(4, z);
        CHECK(test_membership(zv, y, M, part, params) == membership_oracle(zv, y, M, part, params));
    }

    // Empty heavy set: single candidate h(y).
    Partition none{{}, {}};
    for (std::size_t j = 0; j < 16; ++j) none.light.push_back(j);
    CHECK(test_membership(matvec(M, y), y, M, none, params));
    const auto region = test_region(y, M, none, params);
    for (std::uint64_t z = 0; z < 16; ++z) CHECK(region[z] == (z == matvec(M, y).to_index()));
}

TEST_CASE("test region agrees with membership at larger radius") {
    const auto params = make_params(64, 8);
    const auto M = sample_row_weight_matrix(8, 64, 3, 4);
    const auto part = heavy_light_partition(M, params);
    CounterRng rng(8);
    const auto y = BitVector::random(64, rng);
    const auto region = test_region(y, M, part, params);
    for (std::uint64_t z = 0; z < 256; ++z) {
        const auto zv = BitVector::from_index(8, z);
        CHECK(region[z] == test_membership(zv, y, M, part, params));
        CHECK(region[z] == membership_oracle(zv, y, M, part, params));
    }
}

TEST_CASE("heavy set cap") {
    const auto params = make_params(64, 8);
    Partition big;
    for (std::size_t j = 0; j < 21; ++j) big.heavy.push_back(j);
    for (std::size_t j = 21; j < 64; ++j) big.light.push_back(j);
    CHECK_THROWS_AS(test_membership(BitVector(8), BitVector(64), Gf2Matrix(8, 64), big, params), ResourceError);
}

TEST_CASE("output bias and flip bound") {
    CHECK(output_bias(7, 0.5) == 0.0);
    CHECK(output_bias(0, 0.3) == 1.0);
    CHECK(output_bias(4, 0.11) == doctest::Approx(0.370).epsilon(1e-3));
    CHECK(flip_probability_bound(3, 0.1) == doctest::Approx(0.5 - 0.5 * std::pow(0.8, 3)));
}

TEST_CASE("flip counts agree with direct enumeration") {
    CounterRng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t d = 1 + rng.below(8);
        std::vector<std::uint8_t> f(std::size_t{1} << d);
        for (auto& v : f) v = static_cast<std::uint8_t>(rng() & 1U);
        const auto counts = flip_counts_by_weight(f, d);
        for (double p : {0.05, 0.11, 0.25}) {
            double direct = 0.0;
            for (std::uint64_t x = 0; x < f.size(); ++x) {
                const int w = std::popcount(x);
                const double px = std::pow(p, w) * std::pow(1 - p, static_cast<double>(d) - w);
                for (std::uint64_t y = 0; y < f.size(); ++y) {
                    if (f[x ^ y] != f[y]) direct += px / static_cast<double>(f.size());
                }
            }
            CHECK(flip_probability(counts, d, p) == doctest::Approx(direct));
            CHECK(flip_probability(counts, d, p) <= flip_probability_bound(d, p) + 1e-12);
        }
    }
    // Parity meets the bound with equality.
    std::vector<std::uint8_t> parity(1 << 5);
    for (std::uint64_t x = 0; x < parity.size(); ++x) parity[x] = std::popcount(x) & 1;
    const auto pc = flip_counts_by_weight(parity, 5);
    CHECK(flip_probability(pc, 5, 0.1) == doctest::Approx(flip_probability_bound(5, 0.1)));
}

TEST_CASE("product output sd") {
    // Each output is a single p-biased bit.
    const double p = 0.1;
    const std::vector<std::size_t> ones(3, 1);
    double sd = 0.0;
    for (std::uint64_t z = 0; z < 8; ++z) {
        const int w = std::popcount(z);
        sd += std::abs(std::pow(p, w) * std::pow(1 - p, 3 - w) - 1.0 / 8);
    }
    CHECK(product_output_sd(ones, p) == doctest::Approx(sd / 2));
    // Row weight 1 at p <= 0.11 and m = 8 stays above 1/2.
    const std::vector<std::size_t> eight(8, 1);
    CHECK(product_output_sd(eight, 0.11) >= 0.5);
}

TEST_CASE("distinguishing advantage examples") {
    const auto params = make_params(64, 8);
    AdvantageOptions opts;
    opts.num_x = 1 << 14;
    opts.source = AdversarySource::biased;
    const auto zero = distinguishing_advantage(Gf2Matrix(8, 64), params, opts);
    CHECK(zero.empirical_sd == doctest::Approx(1.0 - 1.0 / 256));

    // Disjoint single-input rows: compare with the exact product formula.
    Gf2Matrix D(8, 64);
    for (std::size_t i = 0; i < 8; ++i) D.set(i, 3 * i);
    opts.num_x = 1 << 18;
    opts.num_y = 2;
    const auto est = distinguishing_advantage(D, params, opts);
    const std::vector<std::size_t> ones(8, 1);
    CHECK(std::abs(est.empirical_sd - product_output_sd(ones, params.p)) <= 4 * est.sd_stderr);
    CHECK(est.test_advantage <= est.empirical_sd + 4 * std::hypot(est.sd_stderr, est.test_stderr));

    // Workers do not change the estimate.
    opts.workers = 3;
    const auto est3 = distinguishing_advantage(D, params, opts);
    CHECK(est3.sd_per_shift == est.sd_per_shift);
    CHECK(est3.test_per_shift == est.test_per_shift);

    CHECK_THROWS_AS(distinguishing_advantage(Gf2Matrix(8, 60), params, opts), DimensionError);
    const auto big = make_params(64, 20);
    CHECK_THROWS_AS(distinguishing_advantage(Gf2Matrix(20, 64), big, opts), ResourceError);
}

TEST_CASE("truncated source caps the advantage by the kept mass") {
    const auto params = make_params(64, 8);
    AdvantageOptions opts;
    opts.num_x = 1 << 15;
    opts.source = AdversarySource::truncated;
    Gf2Matrix D(8, 64);
    for (std::size_t i = 0; i < 8; ++i) D.set(i, i);
    const auto est = distinguishing_advantage(D, params, opts);
    const double q = truncated_deficit_mass(64, params.p);
    CHECK(est.empirical_sd <= 1.0 - q + 4 * est.sd_stderr);
}

TEST_CASE("sparsity sweep") {
    const auto params = make_params(64, 8);
    SweepOptions opts;
    opts.row_weights = {1, 4, 32};
    opts.matrices = 3;
    opts.num_x = 1 << 14;
    opts.source = AdversarySource::biased;
    const auto rows = sparsity_sweep(params, opts);
    REQUIRE(rows.size() == 6);
    for (const auto& r : rows) {
        CHECK(r.sparsity == 8 * r.row_weight);
        CHECK(r.n == 64);
        CHECK((r.mode == "empirical_sd" || r.mode == "test"));
    }
    CHECK(rows[0].advantage > rows[4].advantage);
    opts.workers = 2;
    const auto again = sparsity_sweep(params, opts);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(format_sweep_row(again[i]) == format_sweep_row(rows[i]));
    CHECK(sweep_header() == "n,m,row_weight,sparsity,p,beta,mode,advantage,stderr");
    opts.row_weights = {0};
    CHECK_THROWS_AS(sparsity_sweep(params, opts), InvalidArgument);
}

TEST_CASE("read-t structure by recount") {
    const auto M = sample_row_weight_matrix(8, 64, 4, 21);
    const auto report = sparsity_and_locality(M);
    const auto counts = participation_counts(M);
    CHECK(*std::max_element(counts.begin(), counts.end()) == report.max_col_weight);
    // Each input affects at most max_col_weight output indicators.
    for (std::size_t j = 0; j < 64; ++j) {
        std::size_t affected = 0;
        for (std::size_t i = 0; i < 8; ++i) {
            auto e = BitVector::unit(64, j);
            if (matvec(M, e).get(i)) ++affected;
        }
        CHECK(affected <= report.max_col_weight);
    }
}

TEST_CASE("adversary source names") {
    CHECK(to_string(AdversarySource::biased) == "biased");
    CHECK(adversary_source_from_string("truncated") == AdversarySource::truncated);
    CHECK_THROWS_AS(adversary_source_from_string("flat"), InvalidArgument);
}
