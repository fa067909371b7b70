#include "sparsex/prg.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "sparsex/rng.hpp"

namespace sparsex {

namespace {

constexpr std::size_t max_component_vars = 20;

bool gate_value(const LocalFunction::Gate& g, const BitVector& x) {
    std::size_t idx = 0;
    for (std::size_t q = 0; q < g.inputs.size(); ++q) {
        if (x.get(g.inputs[q])) idx |= std::size_t{1} << q;
    }
    return g.table[idx] != 0;
}

void check_gate(const LocalFunction::Gate& g, std::size_t n_in) {
    if (g.inputs.size() > 16) throw InvalidArgument("gate arity above 16 is not supported");
    if (g.table.size() != (std::size_t{1} << g.inputs.size())) throw InvalidArgument("gate table must have 2^arity entries");
    for (auto v : g.inputs) {
        if (v >= n_in) throw InvalidArgument("gate input index out of range");
    }
    for (auto b : g.table) {
        if (b > 1) throw InvalidArgument("gate table entries must be 0 or 1");
    }
}

struct DisjointSets {
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

// ------------------------------------------------------------ LocalFunction

LocalFunction::LocalFunction(std::size_t n_in, std::vector<Gate> gates) : n_in_(n_in), gates_(std::move(gates)) {
    if (n_in_ == 0) throw InvalidArgument("local function needs at least one input");
    for (const auto& g : gates_) check_gate(g, n_in_);
}

LocalFunction LocalFunction::random(std::size_t n, std::size_t ell, std::uint64_t seed) {
    if (ell == 0 || ell > n || ell > 16) throw InvalidArgument("locality must lie in [1, min(n, 16)]");
    std::vector<Gate> gates(n);
    std::vector<std::uint32_t> perm(n);
    for (std::size_t j = 0; j < n; ++j) {
        CounterRng rng(derive_seed(seed, j));
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t q = 0; q < ell; ++q) {
            std::swap(perm[q], perm[q + rng.below(n - q)]);
            gates[j].inputs.push_back(perm[q]);
        }
        gates[j].table.resize(std::size_t{1} << ell);
        for (auto& b : gates[j].table) b = static_cast<std::uint8_t>(rng() & 1U);
    }
    return {n, std::move(gates)};
}

LocalFunction LocalFunction::identity(std::size_t n) {
    std::vector<Gate> gates(n);
    for (std::size_t j = 0; j < n; ++j) gates[j] = {{static_cast<std::uint32_t>(j)}, {0, 1}};
    return {n, std::move(gates)};
}

LocalFunction LocalFunction::constant_zero(std::size_t n) {
    std::vector<Gate> gates(n, Gate{{}, {0}});
    return {n, std::move(gates)};
}

std::size_t LocalFunction::locality() const noexcept {
    std::size_t ell = 0;
    for (const auto& g : gates_) ell = std::max(ell, g.inputs.size());
    return ell;
}

BitVector LocalFunction::operator()(const BitVector& x) const {
    if (x.size() != n_in_) throw DimensionError("local function input has wrong length");
    BitVector y(gates_.size());
    for (std::size_t j = 0; j < gates_.size(); ++j) {
        if (gate_value(gates_[j], x)) y.set(j);
    }
    return y;
}

// ------------------------------------------------------------------ blocks

BlockLayout BlockLayout::make(std::size_t n, std::size_t k_blocks, std::size_t t, std::vector<std::size_t> offsets) {
    if (n == 0 || t == 0) throw InvalidArgument("block layout needs n >= 1 and t >= 1");
    if (k_blocks < 2) throw InvalidArgument("block layout needs k_blocks >= 2 (m = 2(k-1)n must be positive)");
    if (offsets.size() != t) throw DimensionError("block layout needs one offset per block");
    for (auto o : offsets) {
        if (o < 1 || o > n) throw InvalidArgument("offsets must lie in [1, n]");
    }
    return {n, k_blocks, t, std::move(offsets)};
}

BlockLayout BlockLayout::with_random_offsets(std::size_t n, std::size_t k_blocks, std::size_t t, std::uint64_t seed) {
    CounterRng rng(seed);
    std::vector<std::size_t> offsets(t);
    for (auto& o : offsets) o = 1 + static_cast<std::size_t>(rng.below(n));
    return make(n, k_blocks, t, std::move(offsets));
}

std::vector<BitVector> build_blocks(const LocalFunction& f, const BlockLayout& layout,
                                    std::span<const BitVector> x_strings) {
    const std::size_t n = layout.n;
    if (f.input_length() != n || f.output_length() != n) throw DimensionError("f must map n bits to n bits");
    if (x_strings.size() != layout.t * layout.k_blocks) throw DimensionError("need t * k_blocks input strings");
    std::vector<BitVector> blocks;
    blocks.reserve(layout.t);
    for (std::size_t i = 0; i < layout.t; ++i) {
        BitVector full(2 * layout.k_blocks * n);
        for (std::size_t j = 0; j < layout.k_blocks; ++j) {
            const auto& x = x_strings[i * layout.k_blocks + j];
            if (x.size() != n) throw DimensionError("input strings must have n bits");
            const auto fx = f(x);
            for (std::size_t b = 0; b < n; ++b) {
                full.set(2 * j * n + b, fx.get(b));
                full.set((2 * j + 1) * n + b, x.get(b));
            }
        }
        BitVector z(layout.m_cols());
        const std::size_t o = layout.offsets[i];
        for (std::size_t b = 0; b < z.size(); ++b) z.set(b, full.get(o + b));
        blocks.push_back(std::move(z));
    }
    return blocks;
}

std::vector<BitVector> transpose_blocks(std::span<const BitVector> z) {
    if (z.empty()) throw DimensionError("transpose_blocks needs at least one block");
    const std::size_t m = z.front().size();
    for (const auto& b : z) {
        if (b.size() != m) throw DimensionError("transpose_blocks: ragged blocks");
    }
    std::vector<BitVector> cols(m, BitVector(z.size()));
    for (std::size_t i = 0; i < z.size(); ++i) {
        for (auto j : z[i].support()) cols[j].set(i);
    }
    return cols;
}

// ----------------------------------------------------------------- circuit

std::vector<std::uint32_t> rule_dependencies(const OutputRule& rule, std::span<const LocalFunction::Gate> gates) {
    const std::size_t T = rule.terms.size();
    std::vector<std::vector<std::uint32_t>> vars(T);
    for (std::size_t i = 0; i < T; ++i) {
        const auto& term = rule.terms[i];
        if (term.kind == CircuitTerm::Kind::input) {
            vars[i] = {term.index};
        } else {
            if (term.index >= gates.size()) throw InvalidArgument("rule references a missing gate");
            vars[i] = gates[term.index].inputs;
        }
    }
    // Terms sharing a variable belong to the same component; components
    // touch disjoint variables, so the rule depends on v iff v's component does.
    DisjointSets sets(T);
    std::vector<std::pair<std::uint32_t, std::size_t>> owner;
    for (std::size_t i = 0; i < T; ++i) {
        for (auto v : vars[i]) owner.emplace_back(v, i);
    }
    std::sort(owner.begin(), owner.end());
    for (std::size_t a = 1; a < owner.size(); ++a) {
        if (owner[a].first == owner[a - 1].first) sets.unite(owner[a].second, owner[a - 1].second);
    }
    std::vector<std::vector<std::size_t>> components(T);
    for (std::size_t i = 0; i < T; ++i) components[sets.find(i)].push_back(i);

    std::vector<std::uint32_t> deps;
    for (const auto& comp : components) {
        if (comp.empty()) continue;
        std::vector<std::uint32_t> cv;
        for (auto i : comp) cv.insert(cv.end(), vars[i].begin(), vars[i].end());
        std::sort(cv.begin(), cv.end());
        cv.erase(std::unique(cv.begin(), cv.end()), cv.end());
        if (cv.empty()) continue;
        if (cv.size() > max_component_vars) throw ResourceError("rule component reads too many inputs to enumerate");
        auto local = [&](std::uint32_t v) {
            return static_cast<std::size_t>(std::lower_bound(cv.begin(), cv.end(), v) - cv.begin());
        };
        std::vector<std::vector<std::size_t>> pos(comp.size());
        for (std::size_t c = 0; c < comp.size(); ++c) {
            for (auto v : vars[comp[c]]) pos[c].push_back(local(v));
        }
        const std::size_t count = std::size_t{1} << cv.size();
        std::vector<std::uint8_t> value(count);
        for (std::size_t a = 0; a < count; ++a) {
            std::uint8_t acc = 0;
            for (std::size_t c = 0; c < comp.size(); ++c) {
                const auto& term = rule.terms[comp[c]];
                if (term.kind == CircuitTerm::Kind::input) {
                    acc ^= static_cast<std::uint8_t>((a >> pos[c][0]) & 1U);
                } else {
                    std::size_t idx = 0;
                    for (std::size_t q = 0; q < pos[c].size(); ++q) idx |= ((a >> pos[c][q]) & 1U) << q;
                    acc ^= gates[term.index].table[idx];
                }
            }
            value[a] = acc;
        }
        for (std::size_t q = 0; q < cv.size(); ++q) {
            for (std::size_t a = 0; a < count; ++a) {
                if (value[a] != value[a ^ (std::size_t{1} << q)]) {
                    deps.push_back(cv[q]);
                    break;
                }
            }
        }
    }
    std::sort(deps.begin(), deps.end());
    return deps;
}

BitVector PrgCircuit::evaluate(const BitVector& input) const {
    if (input.size() != input_length) throw DimensionError("circuit input has wrong length");
    std::vector<std::int8_t> cache(gates.size(), -1);
    BitVector out(outputs.size());
    for (std::size_t o = 0; o < outputs.size(); ++o) {
        bool acc = outputs[o].constant;
        for (const auto& term : outputs[o].terms) {
            if (term.kind == CircuitTerm::Kind::input) {
                acc ^= input.get(term.index);
            } else {
                auto& c = cache[term.index];
                if (c < 0) c = gate_value(gates[term.index], input) ? 1 : 0;
                acc ^= (c != 0);
            }
        }
        if (acc) out.set(o);
    }
    return out;
}

void PrgCircuit::refresh_metadata() {
    locality = 0;
    total_sparsity = 0;
    for (auto& rule : outputs) {
        rule.deps = rule_dependencies(rule, gates);
        locality = std::max(locality, rule.deps.size());
        total_sparsity += rule.deps.size();
    }
}

void PrgCircuit::validate() const {
    std::size_t covered = 0;
    for (const auto& seg : segments) {
        if (seg.offset != covered) throw InvalidArgument("circuit segments must tile the input in order");
        covered += seg.length;
    }
    if (covered != input_length) throw InvalidArgument("circuit segments do not cover the input");
    for (const auto& g : gates) check_gate(g, input_length);
    if (origin.size() != outputs.size()) throw InvalidArgument("circuit origin list has wrong length");
    std::size_t loc = 0;
    std::size_t sparsity = 0;
    for (const auto& rule : outputs) {
        for (const auto& term : rule.terms) {
            const std::size_t bound = term.kind == CircuitTerm::Kind::input ? input_length : gates.size();
            if (term.index >= bound) throw InvalidArgument("circuit term index out of range");
        }
        if (rule_dependencies(rule, gates) != rule.deps) throw InvalidArgument("circuit dependency list is stale");
        loc = std::max(loc, rule.deps.size());
        sparsity += rule.deps.size();
    }
    if (loc != locality || sparsity != total_sparsity) throw InvalidArgument("circuit metadata is stale");
}

namespace {

void check_instances(const BlockLayout& layout, std::span<const FamilyInstance> instances) {
    const std::size_t cols = layout.m_cols();
    if (instances.size() != 1 && instances.size() != cols) {
        throw DimensionError("build_G needs one shared weak instance or one per column (" + std::to_string(cols) + ")");
    }
    for (const auto& h : instances) {
        if (h.kind != FamilyKind::weak || !h.B) throw InvalidArgument("build_G needs weak family instances");
        if (h.n != layout.t) throw DimensionError("weak instances must take t-bit inputs");
        if (h.s != instances.front().s || h.m != instances.front().m) {
            throw DimensionError("weak instances must agree on seed and output length");
        }
    }
}

}  // namespace

PrgCircuit build_G(const LocalFunction& f, const BlockLayout& layout, std::span<const FamilyInstance> instances) {
    const std::size_t n = layout.n;
    const std::size_t k = layout.k_blocks;
    const std::size_t t = layout.t;
    if (f.input_length() != n || f.output_length() != n) throw DimensionError("f must map n bits to n bits");
    check_instances(layout, instances);
    const std::size_t cols = layout.m_cols();
    const std::size_t s = instances.front().s;
    const std::size_t x_len = n * k * t;

    PrgCircuit G;
    G.ell = f.locality();
    G.input_length = x_len + cols * s;
    G.segments = {{"x", 0, x_len}, {"r", x_len, cols * s}};

    // One gate per (block i, string j, f-output b), reading x_ij.
    G.gates.reserve(t * k * n);
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t base = (i * k + j) * n;
            for (const auto& g : f.gates()) {
                LocalFunction::Gate mapped = g;
                for (auto& v : mapped.inputs) v = static_cast<std::uint32_t>(base + v);
                G.gates.push_back(std::move(mapped));
            }
        }
    }
    // Bit `col` of block c, as a term.
    auto block_bit = [&](std::size_t c, std::size_t col) {
        const std::size_t pos = layout.offsets[c] + col;
        const std::size_t segment = pos / n;
        const std::size_t j = segment / 2;
        const std::size_t b = pos % n;
        const auto idx = static_cast<std::uint32_t>((c * k + j) * n + b);
        return segment % 2 == 0 ? CircuitTerm{CircuitTerm::Kind::gate, idx} : CircuitTerm{CircuitTerm::Kind::input, idx};
    };

    for (std::size_t col = 0; col < cols; ++col) {
        const auto& h = instances.size() == 1 ? instances.front() : instances[col];
        for (std::size_t row = 0; row < h.m; ++row) {
            OutputRule rule;
            for (auto c : h.M.row(row).support()) rule.terms.push_back(block_bit(c, col));
            for (auto c : h.B->row(row).support()) {
                rule.terms.push_back({CircuitTerm::Kind::input, static_cast<std::uint32_t>(x_len + col * s + c)});
            }
            G.outputs.push_back(std::move(rule));
        }
    }
    G.origin.resize(G.outputs.size());
    std::iota(G.origin.begin(), G.origin.end(), std::size_t{0});
    G.refresh_metadata();
    return G;
}

BitVector evaluate_G_directly(const LocalFunction& f, const BlockLayout& layout,
                              std::span<const FamilyInstance> instances, const BitVector& input) {
    check_instances(layout, instances);
    const std::size_t n = layout.n;
    const std::size_t strings = layout.t * layout.k_blocks;
    const std::size_t cols = layout.m_cols();
    const std::size_t s = instances.front().s;
    if (input.size() != n * strings + cols * s) throw DimensionError("G input has wrong length");
    std::vector<BitVector> xs(strings, BitVector(n));
    for (std::size_t q = 0; q < strings; ++q) {
        for (std::size_t b = 0; b < n; ++b) xs[q].set(b, input.get(q * n + b));
    }
    const auto X = transpose_blocks(build_blocks(f, layout, xs));
    std::vector<bool> bits;
    for (std::size_t col = 0; col < cols; ++col) {
        const auto& h = instances.size() == 1 ? instances.front() : instances[col];
        BitVector r(s);
        for (std::size_t c = 0; c < s; ++c) r.set(c, input.get(n * strings + col * s + c));
        const auto y = evaluate(h, X[col], r);
        for (std::size_t b = 0; b < y.size(); ++b) bits.push_back(y.get(b));
    }
    BitVector out(bits.size());
    for (std::size_t b = 0; b < bits.size(); ++b) out.set(b, bits[b]);
    return out;
}

PrgCircuit locality_reduce(const PrgCircuit& G) {
    G.validate();
    PrgCircuit R;
    R.ell = G.ell;
    R.gates = G.gates;
    R.segments = G.segments;
    std::size_t aux_total = 0;
    for (const auto& rule : G.outputs) {
        if (rule.terms.size() >= 4) aux_total += rule.terms.size() - 3;
    }
    const std::size_t aux_base = G.input_length;
    R.input_length = G.input_length + aux_total;
    if (aux_total > 0) R.segments.push_back({"aux", aux_base, aux_total});

    std::size_t next_aux = aux_base;
    auto aux = [](std::size_t index) { return CircuitTerm{CircuitTerm::Kind::input, static_cast<std::uint32_t>(index)}; };
    for (std::size_t o = 0; o < G.outputs.size(); ++o) {
        const auto& terms = G.outputs[o].terms;
        const std::size_t T = terms.size();
        if (T <= 3) {
            R.outputs.push_back({terms, G.outputs[o].constant, {}});
            R.origin.push_back(o);
            continue;
        }
        const std::size_t a = next_aux;  // aux inputs a .. a + T - 4
        next_aux += T - 3;
        R.outputs.push_back({{terms[0], terms[1], aux(a)}, G.outputs[o].constant, {}});
        for (std::size_t i = 2; i + 2 < T; ++i) {
            R.outputs.push_back({{aux(a + i - 2), terms[i], aux(a + i - 1)}, false, {}});
        }
        R.outputs.push_back({{aux(a + T - 4), terms[T - 2], terms[T - 1]}, false, {}});
        R.origin.insert(R.origin.end(), T - 2, o);
    }
    R.refresh_metadata();
    return R;
}

CircuitAccounting accounting(const PrgCircuit& circuit) {
    CircuitAccounting acc;
    for (const auto& rule : circuit.outputs) {
        acc.total_sparsity += rule.deps.size();
        acc.max_locality = std::max(acc.max_locality, rule.deps.size());
    }
    acc.stretch = static_cast<std::ptrdiff_t>(circuit.outputs.size()) - static_cast<std::ptrdiff_t>(circuit.input_length);
    return acc;
}

std::string circuit_to_json(const PrgCircuit& c) {
    nlohmann::ordered_json j;
    j["input_length"] = c.input_length;
    j["ell"] = c.ell;
    auto& segs = j["segments"] = nlohmann::ordered_json::array();
    for (const auto& s : c.segments) segs.push_back({{"name", s.name}, {"offset", s.offset}, {"length", s.length}});
    auto& gates = j["gates"] = nlohmann::ordered_json::array();
    for (const auto& g : c.gates) {
        std::string table;
        for (auto b : g.table) table.push_back(b ? '1' : '0');
        gates.push_back({{"inputs", g.inputs}, {"table", table}});
    }
    auto& outs = j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& rule : c.outputs) {
        auto terms = nlohmann::ordered_json::array();
        for (const auto& t : rule.terms) {
            terms.push_back({t.kind == CircuitTerm::Kind::input ? "x" : "g", t.index});
        }
        outs.push_back({{"terms", terms}, {"constant", rule.constant ? 1 : 0}, {"deps", rule.deps}});
    }
    j["origin"] = c.origin;
    const auto acc = accounting(c);
    j["metadata"] = {{"locality", c.locality},
                     {"total_sparsity", c.total_sparsity},
                     {"inputs", c.input_length},
                     {"outputs", c.outputs.size()},
                     {"stretch", acc.stretch}};
    return j.dump(1);
}

PrgCircuit circuit_from_json(const std::string& text) {
    PrgCircuit c;
    try {
        const auto j = nlohmann::json::parse(text);
        c.input_length = j.at("input_length").get<std::size_t>();
        c.ell = j.at("ell").get<std::size_t>();
        for (const auto& s : j.at("segments")) {
            c.segments.push_back({s.at("name").get<std::string>(), s.at("offset").get<std::size_t>(),
                                  s.at("length").get<std::size_t>()});
        }
        for (const auto& g : j.at("gates")) {
            LocalFunction::Gate gate;
            gate.inputs = g.at("inputs").get<std::vector<std::uint32_t>>();
            for (char ch : g.at("table").get<std::string>()) {
                if (ch != '0' && ch != '1') throw InvalidArgument("gate table must be a 0/1 string");
                gate.table.push_back(static_cast<std::uint8_t>(ch - '0'));
            }
            c.gates.push_back(std::move(gate));
        }
        for (const auto& o : j.at("outputs")) {
            OutputRule rule;
            for (const auto& t : o.at("terms")) {
                const auto kind = t.at(0).get<std::string>();
                if (kind != "x" && kind != "g") throw InvalidArgument("circuit term kind must be 'x' or 'g'");
                rule.terms.push_back({kind == "x" ? CircuitTerm::Kind::input : CircuitTerm::Kind::gate,
                                      t.at(1).get<std::uint32_t>()});
            }
            rule.constant = o.at("constant").get<int>() != 0;
            rule.deps = o.at("deps").get<std::vector<std::uint32_t>>();
            c.outputs.push_back(std::move(rule));
        }
        c.origin = j.at("origin").get<std::vector<std::size_t>>();
        c.locality = j.at("metadata").at("locality").get<std::size_t>();
        c.total_sparsity = j.at("metadata").at("total_sparsity").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("circuit JSON: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace sparsex
