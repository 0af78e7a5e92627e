#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "nn2c/balancer.hpp"
#include "nn2c/fixed_point.hpp"
#include "nn2c/oracle.hpp"
#include "nn2c/stream_sim.hpp"

namespace {

using nn2c::ActFn;
using nn2c::FxFormat;
using nn2c::LayerKind;
using nn2c::LayerSpec;
using nn2c::ModelGraph;

ModelGraph bench_graph(int dim, int channels, bool binary) {
    ModelGraph g;
    g.name = "bench";
    g.input_fmt = binary ? nn2c::binary_format() : FxFormat{8, 4};
    for (int i = 0; i < 3; ++i) {
        LayerSpec l;
        l.kind = LayerKind::Conv;
        l.x_in = l.y_in = dim;
        l.c_in = channels;
        l.c_out = channels;
        l.k_x = l.k_y = 3;
        l.p_x = l.p_y = 1;
        if (binary) {
            l.w_fmt = nn2c::binary_format();
            l.a_fmt = nn2c::binary_format();
            l.act_fn = ActFn::BinarySign;
        } else {
            l.w_fmt = FxFormat{8, 4};
            l.a_fmt = FxFormat{8, 4};
            l.act_fn = ActFn::ReLU;
        }
        g.layers.push_back(l);
    }
    nn2c::validate(g);
    return g;
}

nn2c::ParamSet bench_params(const ModelGraph& g, std::mt19937_64& rng) {
    nn2c::ParamSet ps;
    for (const LayerSpec& l : g.layers) {
        nn2c::LayerParams p;
        std::uniform_int_distribution<int32_t> dist(int32_t(l.w_fmt.raw_min()),
                                                    int32_t(l.w_fmt.raw_max()));
        for (int64_t i = 0; i < l.weight_count(); ++i) p.weights.push_back(dist(rng));
        ps.layers.push_back(std::move(p));
    }
    return ps;
}

nn2c::QTensor bench_input(const ModelGraph& g, std::mt19937_64& rng) {
    const LayerSpec& l = g.layers.front();
    nn2c::QTensor t = nn2c::QTensor::zeros(l.y_in, l.x_in, l.c_in, g.input_fmt);
    std::uniform_int_distribution<int32_t> dist(int32_t(g.input_fmt.raw_min()),
                                                int32_t(g.input_fmt.raw_max()));
    for (int32_t& v : t.raw) v = dist(rng);
    return t;
}

void BM_xnor_popcount_dot(benchmark::State& state) {
    const int64_t n = state.range(0);
    std::mt19937_64 rng(1);
    std::vector<uint64_t> a(size_t((n + 63) / 64)), w(a.size());
    for (auto& v : a) v = rng();
    for (auto& v : w) v = rng();
    for (auto _ : state)
        benchmark::DoNotOptimize(nn2c::xnor_popcount_dot(a, w, n));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_xnor_popcount_dot)->Arg(64)->Arg(1024)->Arg(16384);

void BM_oracle_layer(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const ModelGraph g = bench_graph(int(state.range(0)), 8, false);
    const nn2c::ParamSet ps = bench_params(g, rng);
    const nn2c::QTensor in = bench_input(g, rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(nn2c::run_layer_ref(g.layers[0], ps.layers[0], in));
    state.SetItemsProcessed(state.iterations() * g.layers[0].out_positions() *
                            g.layers[0].c_out * g.layers[0].kernel_elems());
}
BENCHMARK(BM_oracle_layer)->Arg(16)->Arg(32);

void BM_pipeline_run(benchmark::State& state) {
    const bool binary = state.range(1) != 0;
    std::mt19937_64 rng(3);
    const ModelGraph g = bench_graph(int(state.range(0)), 8, binary);
    const nn2c::ParamSet ps = bench_params(g, rng);
    const nn2c::QTensor in = bench_input(g, rng);
    nn2c::AllocationPlan plan;
    for (const LayerSpec& l : g.layers)
        plan.layers.push_back(nn2c::snap_allocation(l, 72));
    nn2c::PipelineSim sim(g, plan, ps);
    int64_t cycles = 0;
    for (auto _ : state) {
        auto [out, timing] = sim.run(in);
        cycles = timing.total_cycles;
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * cycles);
    state.SetLabel(binary ? "binary" : "fixed8");
}
BENCHMARK(BM_pipeline_run)->Args({16, 0})->Args({16, 1})->Args({32, 0})->Args({32, 1});

void BM_allocate(benchmark::State& state) {
    std::mt19937_64 rng(4);
    const ModelGraph g = bench_graph(32, 8, false);
    const nn2c::ParamSet ps = bench_params(g, rng);
    const nn2c::ResourceBudget budget;
    for (auto _ : state)
        benchmark::DoNotOptimize(nn2c::allocate(g, budget, ps));
}
BENCHMARK(BM_allocate);

}  // namespace

BENCHMARK_MAIN();
