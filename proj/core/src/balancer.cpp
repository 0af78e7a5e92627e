#include "nn2c/balancer.hpp"

#include <algorithm>

#include "nn2c/error.hpp"
#include "nn2c/layout.hpp"

namespace nn2c {

RateRatio compute_ratio(const LayerSpec& layer) {
    return Rational(layer.c_out, int64_t(layer.s_y) * layer.s_x * layer.c_in);
}

MacDistribution compute_distribution(const ModelGraph& graph) {
    std::vector<Rational> cumulative;
    Rational prod(1);
    for (const LayerSpec& l : graph.layers) {
        prod = prod * compute_ratio(l);
        cumulative.push_back(prod);
    }
    Rational sum(0);
    for (const Rational& r : cumulative) sum = sum + r;
    MacDistribution d;
    for (const Rational& r : cumulative) d.push_back(r / sum);
    return d;
}

LayerAllocation snap_allocation(const LayerSpec& layer, int64_t target_macs) {
    const int64_t kernel = layer.kernel_elems();
    LayerAllocation best{1, 1};
    for (int64_t simd = 1; simd <= kernel; ++simd) {
        if (kernel % simd != 0) continue;
        if (simd > target_macs) break;
        const int64_t pe = std::min<int64_t>(layer.c_out, target_macs / simd);
        const int64_t product = pe * simd;
        const int64_t best_product = best.mac_units();
        // Larger product wins; ties go to the larger simd, then smaller pe.
        const bool better =
            product > best_product ||
            (product == best_product &&
             (simd > best.simd || (simd == best.simd && pe < best.pe)));
        if (better) best = LayerAllocation{int(pe), int(simd)};
    }
    return best;
}

namespace {

int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }

// Bits of activation storage for one element entering layer i.
int in_bits(const ModelGraph& graph, size_t i) {
    return graph.in_fmt(i).total_bits;
}

}  // namespace

ResourceUsage estimate_resources(const ModelGraph& graph, const AllocationPlan& plan,
                                 const ParamSet& params, const ResourceBudget& budget) {
    validate_params(graph, params);
    ResourceUsage u;
    u.per_layer.resize(graph.layers.size());
    for (size_t i = 0; i < graph.layers.size(); ++i) {
        const LayerSpec& l = graph.layers[i];
        const LayerAllocation& a = plan.layers[i];
        LayerResourceUsage& lu = u.per_layer[i];

        const bool binary_w = l.kind != LayerKind::AvgPool && l.w_fmt.is_binary();
        if (binary_w)
            lu.lut += a.mac_units() * budget.lut_per_binary_mac;
        else
            lu.dsp += a.mac_units();
        lu.lut += budget.lut_per_layer;

        // One dedicated weight memory per PE, holding its share of the
        // kernels in full block increments.
        if (l.weight_count() > 0) {
            const int64_t kernels_per_pe = ceil_div(l.c_out, a.pe);
            const int64_t bits_per_pe =
                kernels_per_pe * l.kernel_elems() * l.w_fmt.total_bits;
            lu.bram += a.pe * ceil_div(bits_per_pe, budget.bram_block_bits);
        }

        // Window/vector buffer and output FIFO.
        const int64_t win_bits = input_buffer_elems(l) * in_bits(graph, i);
        lu.bram += ceil_div(win_bits, budget.bram_block_bits);
        const int64_t fifo_bits =
            fifo_depth(l, budget.fifo_depth_override) * l.a_fmt.total_bits;
        lu.bram += ceil_div(fifo_bits, budget.bram_block_bits);

        u.dsp_used += lu.dsp;
        u.bram_used += lu.bram;
        u.lut_used += lu.lut;
    }
    return u;
}

namespace {

AllocationPlan plan_for(const ModelGraph& graph, const MacDistribution& dist,
                        int64_t global_macs) {
    AllocationPlan plan;
    for (size_t i = 0; i < graph.layers.size(); ++i) {
        const int64_t target = std::max<int64_t>(1, dist[i].floor_mul(global_macs));
        plan.layers.push_back(snap_allocation(graph.layers[i], target));
    }
    return plan;
}

bool fits(const ResourceUsage& u, const ResourceBudget& b) {
    return u.dsp_used <= b.dsp - b.reserve_dsp &&
           u.bram_used <= b.bram - b.reserve_bram &&
           u.lut_used <= b.lut - b.reserve_lut;
}

bool fully_capped(const ModelGraph& graph, const AllocationPlan& plan) {
    for (size_t i = 0; i < graph.layers.size(); ++i) {
        const LayerSpec& l = graph.layers[i];
        if (plan.layers[i].mac_units() < l.c_out * l.kernel_elems()) return false;
    }
    return true;
}

}  // namespace

std::pair<AllocationPlan, ResourceUsage> allocate(const ModelGraph& graph,
                                                  const ResourceBudget& budget,
                                                  const ParamSet& params) {
    const MacDistribution dist = compute_distribution(graph);

    auto evaluate = [&](int64_t b) {
        AllocationPlan p = plan_for(graph, dist, b);
        ResourceUsage u = estimate_resources(graph, p, params, budget);
        return std::make_pair(std::move(p), std::move(u));
    };

    auto [plan, usage] = evaluate(1);
    if (!fits(usage, budget))
        throw Error(ErrorKind::InfeasibleBudget,
                    "even one MAC lane per layer exceeds the remaining budget");

    // Double until the plan stops fitting or every layer is fully unrolled.
    int64_t lo = 1, hi = 1;
    while (true) {
        if (fully_capped(graph, plan)) return {plan, usage};
        hi = lo * 2;
        auto [p, u] = evaluate(hi);
        if (!fits(u, budget)) break;
        lo = hi;
        plan = std::move(p);
        usage = std::move(u);
    }

    // Largest feasible budget in (lo, hi).
    while (hi - lo > 1) {
        const int64_t mid = lo + (hi - lo) / 2;
        auto [p, u] = evaluate(mid);
        if (fits(u, budget)) {
            lo = mid;
            plan = std::move(p);
            usage = std::move(u);
        } else {
            hi = mid;
        }
    }
    return {plan, usage};
}

}  // namespace nn2c
