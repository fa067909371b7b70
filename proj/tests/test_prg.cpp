#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "sparsex/experiments.hpp"
#include "sparsex/prg.hpp"
#include "sparsex/rng.hpp"

using namespace sparsex;

namespace {

// Single-output oracle: constant xor each term, gates read straight from x.
bool eval_rule(const PrgCircuit& c, std::size_t o, const BitVector& x) {
    bool acc = c.outputs[o].constant;
    for (const auto& term : c.outputs[o].terms) {
        if (term.kind == CircuitTerm::Kind::input) {
            acc ^= x.get(term.index);
        } else {
            const auto& g = c.gates[term.index];
            std::size_t idx = 0;
            for (std::size_t q = 0; q < g.inputs.size(); ++q) idx |= std::size_t{x.get(g.inputs[q])} << q;
            acc ^= g.table[idx] != 0;
        }
    }
    return acc;
}

std::vector<BitVector> random_strings(std::size_t count, std::size_t n, CounterRng& rng) {
    std::vector<BitVector> xs;
    for (std::size_t i = 0; i < count; ++i) xs.push_back(BitVector::random(n, rng));
    return xs;
}

FamilyInstance zero_weak(std::size_t t, std::size_t m_out, const Gf2Matrix& B) {
    FamilyInstance h;
    h.kind = FamilyKind::weak;
    h.n = t;
    h.m = m_out;
    h.s = B.cols();
    h.M = Gf2Matrix(m_out, t);
    h.B = B;
    return h;
}

FamilyInstance identity_weak(std::size_t t, const Gf2Matrix& B) {
    auto h = zero_weak(t, t, B);
    h.M = Gf2Matrix::identity(t);
    return h;
}

}  // namespace

TEST_CASE("local functions") {
    const auto f = LocalFunction::random(10, 3, 4);
    CHECK(f.locality() == 3);
    CHECK(f.output_length() == 10);
    for (const auto& g : f.gates()) {
        CHECK(std::set<std::uint32_t>(g.inputs.begin(), g.inputs.end()).size() == 3);
        CHECK(g.table.size() == 8);
    }
    CounterRng rng(1);
    const auto x = BitVector::random(10, rng);
    CHECK(LocalFunction::identity(10)(x) == x);
    CHECK(LocalFunction::constant_zero(10)(x).is_zero());
    CHECK_THROWS_AS(LocalFunction::random(4, 5, 1), InvalidArgument);
    CHECK_THROWS_AS(LocalFunction(3, {LocalFunction::Gate{{5}, {0, 1}}}), InvalidArgument);
    CHECK_THROWS_AS(LocalFunction(3, {LocalFunction::Gate{{0}, {0, 1, 1}}}), InvalidArgument);
}

TEST_CASE("block layout validation") {
    CHECK_THROWS_AS(BlockLayout::make(4, 1, 1, {1}), InvalidArgument);
    CHECK_THROWS_AS(BlockLayout::make(4, 2, 1, {0}), InvalidArgument);
    CHECK_THROWS_AS(BlockLayout::make(4, 2, 1, {5}), InvalidArgument);
    CHECK_THROWS_AS(BlockLayout::make(4, 2, 2, {1}), DimensionError);
    const auto L = BlockLayout::with_random_offsets(6, 3, 8, 2);
    CHECK(L.m_cols() == 24);
    for (auto o : L.offsets) {
        CHECK(o >= 1);
        CHECK(o <= 6);
    }
}

TEST_CASE("block length identity for every offset") {
    CounterRng rng(2);
    for (std::size_t n : {1, 3, 6}) {
        for (std::size_t k = 2; k <= 4; ++k) {
            const auto f = LocalFunction::random(n, std::min<std::size_t>(n, 2), rng());
            for (std::size_t o = 1; o <= n; ++o) {
                const auto layout = BlockLayout::make(n, k, 1, {o});
                const auto xs = random_strings(k, n, rng);
                const auto z = build_blocks(f, layout, xs);
                CHECK(z[0].size() == 2 * (k - 1) * n);
            }
        }
    }
}

TEST_CASE("block construction by hand") {
    const auto f = LocalFunction::constant_zero(4);
    const std::vector<BitVector> xs{BitVector::from_string("1010"), BitVector::from_string("0111")};
    // f(x1) x1 f(x2) x2 = 0000 1010 0000 0111
    const auto z1 = build_blocks(f, BlockLayout::make(4, 2, 1, {1}), xs);
    CHECK(z1[0].to_string() == "00010100");
    const auto z4 = build_blocks(f, BlockLayout::make(4, 2, 1, {4}), xs);
    CHECK(z4[0].to_string() == "10100000");
    CHECK_THROWS_AS(build_blocks(f, BlockLayout::make(4, 2, 2, {1, 1}), xs), DimensionError);
}

TEST_CASE("transpose") {
    const std::vector<BitVector> z{BitVector::from_string("1100"), BitVector::from_string("1010"),
                                   BitVector::from_string("0001")};
    const auto X = transpose_blocks(z);
    REQUIRE(X.size() == 4);
    CHECK(X[0].to_string() == "110");
    CHECK(X[1].to_string() == "100");
    CHECK(X[2].to_string() == "010");
    CHECK(X[3].to_string() == "001");
    const std::vector<BitVector> one{BitVector::from_string("101")};
    for (const auto& col : transpose_blocks(one)) CHECK(col.size() == 1);
    CounterRng rng(3);
    const auto r = random_strings(5, 9, rng);
    CHECK(transpose_blocks(transpose_blocks(r)) == r);
    const std::vector<BitVector> ragged{BitVector(3), BitVector(4)};
    CHECK_THROWS_AS(transpose_blocks(ragged), DimensionError);
}

TEST_CASE("rule dependencies are exact") {
    const std::vector<LocalFunction::Gate> gates{
        {{0, 1}, {0, 1, 0, 1}},  // reads only input 0
        {{2, 3}, {0, 1, 1, 0}},  // x2 xor x3
    };
    OutputRule twice{{{CircuitTerm::Kind::input, 4}, {CircuitTerm::Kind::input, 4}}, false, {}};
    CHECK(rule_dependencies(twice, gates).empty());
    OutputRule g0{{{CircuitTerm::Kind::gate, 0}}, false, {}};
    CHECK(rule_dependencies(g0, gates) == std::vector<std::uint32_t>{0});
    // Gate 1 xor x2 = x3.
    OutputRule cancel{{{CircuitTerm::Kind::gate, 1}, {CircuitTerm::Kind::input, 2}}, true, {}};
    CHECK(rule_dependencies(cancel, gates) == std::vector<std::uint32_t>{3});
    OutputRule bad{{{CircuitTerm::Kind::gate, 7}}, false, {}};
    CHECK_THROWS_AS(rule_dependencies(bad, gates), InvalidArgument);
}

TEST_CASE("accounting of an identity circuit") {
    PrgCircuit c;
    c.input_length = 5;
    c.segments = {{"x", 0, 5}};
    for (std::uint32_t i = 0; i < 5; ++i) c.outputs.push_back({{{CircuitTerm::Kind::input, i}}, false, {}});
    c.origin = {0, 1, 2, 3, 4};
    c.refresh_metadata();
    const auto acc = accounting(c);
    CHECK(acc.total_sparsity == 5);
    CHECK(acc.max_locality == 1);
    CHECK(acc.stretch == 0);
    CounterRng rng(4);
    const auto x = BitVector::random(5, rng);
    CHECK(c.evaluate(x) == x);
}

TEST_CASE("build G with zero extraction matrices depends only on seeds") {
    const auto f = LocalFunction::random(4, 2, 1);
    const auto layout = BlockLayout::make(4, 2, 4, {1, 2, 3, 4});
    const auto B = construct_B(ConstructBOptions{5, 3, 2, 2, 1}).B;
    const std::vector<FamilyInstance> inst{zero_weak(4, 5, B)};
    const auto G = build_G(f, layout, inst);
    const std::size_t x_len = 4 * 2 * 4;
    CHECK(G.input_length == x_len + layout.m_cols() * 3);
    CHECK(G.output_length() == layout.m_cols() * 5);
    for (const auto& rule : G.outputs) {
        for (auto d : rule.deps) CHECK(d >= x_len);
    }
}

TEST_CASE("circuit evaluation matches direct composition") {
    CounterRng rng(5);
    for (bool identity_f : {true, false}) {
        const std::size_t n = 5;
        const auto f = identity_f ? LocalFunction::identity(n) : LocalFunction::random(n, 3, 9);
        const auto layout = BlockLayout::with_random_offsets(n, 3, 4, 7);
        const auto B = construct_B(ConstructBOptions{4, 3, 2, 2, 3}).B;
        std::vector<FamilyInstance> per_col;
        for (std::size_t j = 0; j < layout.m_cols(); ++j) {
            auto h = identity_weak(4, B);
            h.M = sample_bernoulli_matrix(4, 4, 0.5, j);
            per_col.push_back(h);
        }
        const std::vector<FamilyInstance> shared{identity_weak(4, B)};
        const std::vector<FamilyInstance>* variants[] = {&shared, &per_col};
        for (const auto* insts : variants) {
            const auto G = build_G(f, layout, *insts);
            for (int trial = 0; trial < 200; ++trial) {
                const auto in = BitVector::random(G.input_length, rng);
                CHECK(G.evaluate(in) == evaluate_G_directly(f, layout, *insts, in));
            }
        }
    }
}

TEST_CASE("build G rejects mismatched instances") {
    const auto f = LocalFunction::random(4, 2, 1);
    const auto layout = BlockLayout::make(4, 2, 4, {1, 2, 3, 4});
    const auto B = construct_B(ConstructBOptions{5, 3, 2, 2, 1}).B;
    const std::vector<FamilyInstance> wrong_t{zero_weak(3, 5, B)};
    CHECK_THROWS_AS(build_G(f, layout, wrong_t), DimensionError);
    const std::vector<FamilyInstance> two{zero_weak(4, 5, B), zero_weak(4, 5, B)};
    CHECK_THROWS_AS(build_G(f, layout, two), DimensionError);
}

TEST_CASE("locality reduction chains") {
    PrgCircuit c;
    c.input_length = 6;
    c.segments = {{"x", 0, 6}};
    auto in = [](std::uint32_t i) { return CircuitTerm{CircuitTerm::Kind::input, i}; };
    c.outputs.push_back({{in(0), in(1)}, false, {}});
    c.outputs.push_back({{in(0), in(1), in(2), in(3)}, true, {}});
    c.outputs.push_back({{in(0), in(1), in(2), in(3), in(4), in(5)}, false, {}});
    c.origin = {0, 1, 2};
    c.refresh_metadata();
    const auto R = locality_reduce(c);
    // 0 aux for two terms, 1 for four, 3 for six.
    CHECK(R.input_length == 6 + 1 + 3);
    CHECK(R.segments.back().name == "aux");
    CHECK(R.outputs.size() == 1 + 2 + 4);
    CHECK(R.origin == std::vector<std::size_t>{0, 1, 1, 2, 2, 2, 2});
    CHECK(R.outputs[0].terms == c.outputs[0].terms);
    // Four terms: (x0 + x1 + a, a + x2 + x3).
    const CircuitTerm a = in(6);
    CHECK(R.outputs[1].terms == std::vector<CircuitTerm>{in(0), in(1), a});
    CHECK(R.outputs[2].terms == std::vector<CircuitTerm>{a, in(2), in(3)});
    CHECK(R.locality == 3);
    CounterRng rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = BitVector::random(R.input_length, rng);
        BitVector base(6);
        for (std::size_t i = 0; i < 6; ++i) base.set(i, x.get(i));
        const auto g = c.evaluate(base);
        const auto r = R.evaluate(x);
        std::vector<bool> folded(3, false);
        for (std::size_t o = 0; o < R.outputs.size(); ++o) folded[R.origin[o]] = folded[R.origin[o]] ^ r.get(o);
        for (std::size_t o = 0; o < 3; ++o) CHECK(folded[o] == g.get(o));
    }
}

TEST_CASE("pipeline structure at acceptance size") {
    PrgBuildConfig cfg;
    const auto bundle = build_prg(cfg);
    const auto& G = bundle.G;
    const auto R = locality_reduce(G);
    CHECK(G.input_length == 6 * 3 * 8 + 24 * 4);
    CHECK(R.locality <= 3 * cfg.ell);
    for (const auto& rule : R.outputs) CHECK(rule.terms.size() <= 3);

    std::size_t recount = 0;
    std::size_t max_loc = 0;
    for (const auto& rule : R.outputs) {
        recount += rule.deps.size();
        max_loc = std::max(max_loc, rule.deps.size());
    }
    CHECK(recount == R.total_sparsity);
    CHECK(max_loc == R.locality);
    CHECK(accounting(R).stretch ==
          static_cast<std::ptrdiff_t>(R.output_length()) - static_cast<std::ptrdiff_t>(R.input_length));

    CounterRng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const auto x = BitVector::random(R.input_length, rng);
        BitVector base(G.input_length);
        for (std::size_t i = 0; i < G.input_length; ++i) base.set(i, x.get(i));
        const auto g = G.evaluate(base);
        CHECK(g == evaluate_G_directly(bundle.f, bundle.layout, bundle.instances, base));
        const auto r = R.evaluate(x);
        std::vector<bool> folded(G.output_length(), false);
        for (std::size_t o = 0; o < R.output_length(); ++o) folded[R.origin[o]] = folded[R.origin[o]] ^ r.get(o);
        for (std::size_t o = 0; o < G.output_length(); ++o) CHECK(folded[o] == g.get(o));
    }
}

TEST_CASE("dependency soundness by random flips") {
    PrgBuildConfig cfg;
    cfg.t = 4;
    cfg.s = 3;
    const auto R = locality_reduce(build_prg(cfg).G);
    CounterRng rng(8);
    for (std::size_t o = 0; o < R.output_length(); ++o) {
        const auto& deps = R.outputs[o].deps;
        const std::set<std::uint32_t> listed(deps.begin(), deps.end());
        for (int trial = 0; trial < 200; ++trial) {
            auto x = BitVector::random(R.input_length, rng);
            std::size_t j = rng.below(R.input_length);
            if (listed.count(static_cast<std::uint32_t>(j))) continue;
            const bool before = eval_rule(R, o, x);
            x.flip(j);
            CHECK(eval_rule(R, o, x) == before);
        }
        for (auto d : deps) {
            bool witnessed = false;
            for (int trial = 0; trial < 4000 && !witnessed; ++trial) {
                auto x = BitVector::random(R.input_length, rng);
                const bool before = eval_rule(R, o, x);
                x.flip(d);
                witnessed = eval_rule(R, o, x) != before;
            }
            CHECK(witnessed);
        }
    }
}

TEST_CASE("circuit json round trip and validation") {
    PrgBuildConfig cfg;
    cfg.t = 4;
    cfg.s = 3;
    const auto G = build_prg(cfg).G;
    const auto text = circuit_to_json(G);
    const auto back = circuit_from_json(text);
    CHECK(circuit_to_json(back) == text);
    CHECK(back.locality == G.locality);

    auto tampered = G;
    tampered.outputs[0].deps.push_back(static_cast<std::uint32_t>(G.input_length - 1));
    CHECK_THROWS_AS(circuit_from_json(circuit_to_json(tampered)), InvalidArgument);
    CHECK_THROWS_AS(circuit_from_json("{\"input_length\": 3}"), InvalidArgument);
    CHECK_THROWS_AS(circuit_from_json("not json"), InvalidArgument);
}

TEST_CASE("build G is deterministic") {
    PrgBuildConfig cfg;
    CHECK(circuit_to_json(build_prg(cfg).G) == circuit_to_json(build_prg(cfg).G));
    cfg.per_column = true;
    const auto a = build_prg(cfg);
    CHECK(a.instances.size() == a.layout.m_cols());
    CHECK(circuit_to_json(a.G) == circuit_to_json(build_prg(cfg).G));
}
