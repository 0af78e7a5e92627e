#include <doctest.h>

#include "nn2c/balancer.hpp"
#include "nn2c/error.hpp"
#include "nn2c/layout.hpp"
#include "support/generators.hpp"

using namespace nn2c;

namespace {

LayerSpec layer_with(int c_in, int c_out, int s, int k = 3, int dim = 12) {
    LayerSpec l;
    l.kind = LayerKind::Conv;
    l.x_in = l.y_in = dim;
    l.c_in = c_in;
    l.c_out = c_out;
    l.k_x = l.k_y = k;
    l.s_x = l.s_y = s;
    l.p_x = l.p_y = (dim % s == (k / 2 * 2) % s) ? k / 2 : 0;  // keep dims integral
    return l;
}

// Two identical 1x1 layers, channel width 4: the worked allocator example.
ModelGraph two_identical_layers(FxFormat w_fmt) {
    ModelGraph g;
    g.name = "two";
    g.input_fmt = FxFormat{8, 4};
    for (int i = 0; i < 2; ++i) {
        LayerSpec l;
        l.kind = LayerKind::Conv;
        l.x_in = l.y_in = 8;
        l.c_in = 4;
        l.c_out = 4;
        l.k_x = l.k_y = 1;
        l.w_fmt = w_fmt;
        l.a_fmt = FxFormat{8, 4};
        g.layers.push_back(l);
    }
    validate(g);
    return g;
}

ParamSet zero_params(const ModelGraph& g) {
    ParamSet ps;
    for (const LayerSpec& l : g.layers) {
        LayerParams p;
        p.weights.assign(size_t(l.weight_count()), l.w_fmt.is_binary() ? 1 : 0);
        if (l.has_bias) p.bias.assign(size_t(l.c_out), 0);
        ps.layers.push_back(p);
    }
    return ps;
}

}  // namespace

TEST_CASE("compute_ratio follows c_out / (s_y s_x c_in)") {
    CHECK(compute_ratio(layer_with(8, 16, 1)) == Rational(2));
    CHECK(compute_ratio(layer_with(3, 12, 2)) == Rational(1));

    // A flat 256-unit FC layer streams as a 1x1x256 channel vector.
    LayerSpec fc;
    fc.kind = LayerKind::FC;
    fc.x_in = fc.y_in = 1;
    fc.c_in = 256;
    fc.k_x = fc.k_y = 1;
    fc.c_out = 10;
    CHECK(compute_ratio(fc) == Rational(10, 256));
}

TEST_CASE("compute_distribution normalizes the cumulative ratio products") {
    // Ratios [2, 1/2, 1]: cumulative [2, 1, 1] -> D = [1/2, 1/4, 1/4].
    ModelGraph g;
    g.name = "d";
    g.input_fmt = FxFormat{8, 0};
    LayerSpec a = layer_with(4, 8, 1, 1, 8);    // R = 2
    LayerSpec b = layer_with(8, 4, 1, 1, 8);    // R = 1/2
    LayerSpec c = layer_with(4, 4, 1, 1, 8);    // R = 1
    for (LayerSpec* l : {&a, &b, &c}) {
        l->w_fmt = FxFormat{8, 0};
        l->a_fmt = FxFormat{8, 0};
    }
    g.layers = {a, b, c};
    validate(g);
    const MacDistribution d = compute_distribution(g);
    CHECK(d[0] == Rational(1, 2));
    CHECK(d[1] == Rational(1, 4));
    CHECK(d[2] == Rational(1, 4));
}

TEST_CASE("single layer distributes to [1]") {
    ModelGraph g;
    g.name = "one";
    g.input_fmt = FxFormat{8, 0};
    LayerSpec l = layer_with(4, 8, 1, 1, 8);
    l.w_fmt = l.a_fmt = FxFormat{8, 0};
    g.layers = {l};
    validate(g);
    const MacDistribution d = compute_distribution(g);
    REQUIRE(d.size() == 1);
    CHECK(d[0] == Rational(1));
}

TEST_CASE("an all-ones ratio chain distributes uniformly") {
    ModelGraph g;
    g.name = "uniform";
    g.input_fmt = FxFormat{8, 0};
    for (int i = 0; i < 5; ++i) {
        LayerSpec l = layer_with(4, 4, 1, 1, 8);
        l.w_fmt = l.a_fmt = FxFormat{8, 0};
        g.layers.push_back(l);
    }
    validate(g);
    for (const Rational& d : compute_distribution(g))
        CHECK(d == Rational(1, 5));
}

TEST_CASE("distribution sums to exactly one on random graphs") {
    testgen::Rng rng(501);
    for (int i = 0; i < 200; ++i) {
        const ModelGraph g = testgen::random_graph(rng);
        const MacDistribution d = compute_distribution(g);
        Rational sum(0);
        for (const Rational& r : d) {
            REQUIRE(Rational(0) < r);
            sum = sum + r;
        }
        REQUIRE(sum == Rational(1));
    }
}

TEST_CASE("balance property: successive targets scale by the rate ratio") {
    // With targets B*D(i), out_rate(i) == in_rate(i+1) reduces to
    // D(i+1) == D(i) * R(i+1); check it symbolically.
    testgen::Rng rng(503);
    for (int i = 0; i < 100; ++i) {
        const ModelGraph g = testgen::random_graph(rng);
        const MacDistribution d = compute_distribution(g);
        for (size_t l = 0; l + 1 < g.layers.size(); ++l)
            REQUIRE(d[l + 1] == d[l] * compute_ratio(g.layers[l + 1]));
    }
}

namespace {

// Exhaustive oracle for the snapping policy.
LayerAllocation snap_by_search(const LayerSpec& l, int64_t target) {
    LayerAllocation best{1, 1};
    for (int pe = 1; pe <= l.c_out; ++pe)
        for (int simd = 1; simd <= l.kernel_elems(); ++simd) {
            if (l.kernel_elems() % simd != 0) continue;
            if (int64_t(pe) * simd > target) continue;
            const int64_t prod = int64_t(pe) * simd;
            if (prod > best.mac_units() ||
                (prod == best.mac_units() &&
                 (simd > best.simd || (simd == best.simd && pe < best.pe))))
                best = LayerAllocation{pe, simd};
        }
    return best;
}

}  // namespace

TEST_CASE("snap_allocation examples") {
    LayerSpec l = layer_with(8, 16, 1, 3, 12);  // kernel_elems = 72
    CHECK(snap_allocation(l, 32).pe == 4);
    CHECK(snap_allocation(l, 32).simd == 8);
    CHECK(snap_allocation(l, 1).mac_units() == 1);

    LayerSpec small = layer_with(1, 2, 1, 3, 12);  // kernel_elems = 9
    const LayerAllocation a = snap_allocation(small, 100);
    CHECK(a.pe == 2);
    CHECK(a.simd == 9);
}

TEST_CASE("snap_allocation matches exhaustive search and never overshoots") {
    testgen::Rng rng(511);
    for (int i = 0; i < 300; ++i) {
        const ModelGraph g = testgen::random_graph(rng);
        const LayerSpec& l = g.layers[size_t(testgen::pick(
            rng, 0, int(g.layers.size()) - 1))];
        const int64_t target = testgen::pick(rng, 1, 200);
        const LayerAllocation got = snap_allocation(l, target);
        const LayerAllocation want = snap_by_search(l, target);
        REQUIRE(got.mac_units() <= target);
        REQUIRE(got.pe == want.pe);
        REQUIRE(got.simd == want.simd);
    }
}

TEST_CASE("allocate: two identical fixed-point layers under a dsp budget of 8") {
    const ModelGraph g = two_identical_layers(FxFormat{8, 4});
    ResourceBudget budget;
    budget.dsp = 8;
    budget.bram = 100000;
    budget.lut = 1000000;
    const auto [plan, usage] = allocate(g, budget, zero_params(g));
    CHECK(plan.layers[0].mac_units() == 4);
    CHECK(plan.layers[1].mac_units() == 4);
    CHECK(usage.dsp_used == 8);
}

TEST_CASE("allocate: fully binary pair under a lut budget") {
    // Kernel 5x5 on 4 channels: 100 kernel elements, so each layer snaps
    // exactly to 100 lanes under a 1000-LUT budget at 5 LUT per lane.
    ModelGraph g;
    g.name = "bin";
    g.input_fmt = binary_format();
    for (int i = 0; i < 2; ++i) {
        LayerSpec l;
        l.kind = LayerKind::Conv;
        l.x_in = l.y_in = 10;
        l.c_in = 4;
        l.c_out = 4;
        l.k_x = l.k_y = 5;
        l.p_x = l.p_y = 2;
        l.w_fmt = binary_format();
        l.a_fmt = binary_format();
        l.act_fn = ActFn::BinarySign;
        g.layers.push_back(l);
    }
    validate(g);
    ResourceBudget budget;
    budget.dsp = 0;
    budget.bram = 100000;
    budget.lut = 1000;
    budget.lut_per_binary_mac = 5;
    const auto [plan, usage] = allocate(g, budget, zero_params(g));
    CHECK(usage.dsp_used == 0);  // binary layers use no DSP
    CHECK(plan.layers[0].mac_units() + plan.layers[1].mac_units() <= 200);
    CHECK(plan.layers[0].mac_units() == 100);
    CHECK(plan.layers[1].mac_units() == 100);
    CHECK(usage.lut_used <= 1000);
}

TEST_CASE("allocate: reserved == budget is infeasible") {
    const ModelGraph g = two_identical_layers(FxFormat{8, 4});
    ResourceBudget budget;
    budget.reserve_dsp = budget.dsp;
    budget.reserve_bram = budget.bram;
    budget.reserve_lut = budget.lut;
    CHECK_THROWS_AS(allocate(g, budget, zero_params(g)), Error);
}

TEST_CASE("estimate_resources BRAM ceilings") {
    // One PE holding 1000 16-bit weights fits one 18-kbit block; 1200 need two.
    ModelGraph g;
    g.name = "bram";
    g.input_fmt = FxFormat{8, 0};
    LayerSpec l;
    l.kind = LayerKind::FC;
    l.x_in = 1;
    l.y_in = 1000;
    l.c_in = 1;
    l.k_x = 1;
    l.k_y = 1000;
    l.c_out = 1;
    l.w_fmt = FxFormat{16, 8};
    l.a_fmt = FxFormat{16, 8};
    g.layers.push_back(l);
    validate(g);
    AllocationPlan plan;
    plan.layers.push_back(LayerAllocation{1, 1});
    ResourceBudget budget;

    const ResourceUsage u1000 =
        estimate_resources(g, plan, zero_params(g), budget);
    // Weight memory contributes exactly one block on top of the stream buffers.
    ModelGraph g1200 = g;
    g1200.layers[0].y_in = 1200;
    g1200.layers[0].k_y = 1200;
    validate(g1200);
    const ResourceUsage u1200 =
        estimate_resources(g1200, plan, zero_params(g1200), budget);

    // Stream buffers: the 8-bit input vector and the 16-bit output FIFO
    // each fit one block at these sizes.
    const int64_t buffers1000 = (1000 * 8 + 18431) / 18432 + (2 * 16 + 18431) / 18432;
    CHECK(u1000.bram_used == 1 + buffers1000);
    const int64_t buffers1200 = (1200 * 8 + 18431) / 18432 + (2 * 16 + 18431) / 18432;
    CHECK(u1200.bram_used == 2 + buffers1200);
}

TEST_CASE("all-binary plans use zero DSP") {
    testgen::Rng rng(523);
    testgen::NetOptions opt;
    opt.precisions = {1};
    opt.allow_pool = false;
    for (int i = 0; i < 20; ++i) {
        const ModelGraph g = testgen::random_graph(rng, opt);
        AllocationPlan plan;
        for (const LayerSpec& l : g.layers) plan.layers.push_back(snap_allocation(l, 8));
        const ResourceUsage u =
            estimate_resources(g, plan, zero_params(g), ResourceBudget{});
        REQUIRE(u.dsp_used == 0);
    }
}

TEST_CASE("accepted plans respect budget minus reserved; allocate is monotone") {
    testgen::Rng rng(541);
    for (int i = 0; i < 60; ++i) {
        const ModelGraph g = testgen::random_graph(rng);
        const ParamSet ps = testgen::random_params(rng, g);

        ResourceBudget b;
        b.dsp = testgen::pick(rng, 0, 200);
        b.bram = testgen::pick(rng, 20, 300);
        b.lut = testgen::pick(rng, 0, 20000);
        b.reserve_dsp = testgen::pick(rng, 0, 8);
        b.reserve_bram = testgen::pick(rng, 0, 8);
        b.reserve_lut = testgen::pick(rng, 0, 500);

        AllocationPlan plan1;
        try {
            auto [p, u] = allocate(g, b, ps);
            REQUIRE(u.dsp_used <= b.dsp - b.reserve_dsp);
            REQUIRE(u.bram_used <= b.bram - b.reserve_bram);
            REQUIRE(u.lut_used <= b.lut - b.reserve_lut);
            plan1 = p;
        } catch (const Error& e) {
            REQUIRE(e.kind() == ErrorKind::InfeasibleBudget);
            continue;
        }

        ResourceBudget bigger = b;
        bigger.dsp += testgen::pick(rng, 0, 100);
        bigger.bram += testgen::pick(rng, 0, 100);
        bigger.lut += testgen::pick(rng, 0, 10000);
        const auto [plan2, u2] = allocate(g, bigger, ps);
        for (size_t l = 0; l < g.layers.size(); ++l)
            REQUIRE(plan2.layers[l].mac_units() >= plan1.layers[l].mac_units());
    }
}
