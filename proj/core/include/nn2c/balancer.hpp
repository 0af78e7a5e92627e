#pragma once

#include <cstdint>
#include <vector>

#include "nn2c/model_ir.hpp"
#include "nn2c/rational.hpp"

namespace nn2c {

// Throughput-balancing allocator: distributes a global MAC-unit budget
// across layers in proportion to the normalized cumulative product of the
// per-layer rate ratios, then snaps each share onto a feasible
// (#PE, #SIMD) pair and grows the global budget as far as the device
// resources allow.

// out_rate / in_rate of one layer, exact: c_out / (s_y * s_x * c_in).
using RateRatio = Rational;

// Per-layer share of the MAC budget; entries are > 0 and sum to exactly 1.
using MacDistribution = std::vector<Rational>;

struct ResourceBudget {
    int64_t dsp = 840;      // XC7K325-class defaults
    int64_t bram = 445;     // 18-kbit blocks
    int64_t lut = 203800;
    int64_t reserve_dsp = 0;  // held back for the hosting application
    int64_t reserve_bram = 0;
    int64_t reserve_lut = 0;
    int64_t lut_per_binary_mac = 5;
    int64_t lut_per_layer = 0;  // fixed block overhead, unmodeled by default
    int64_t bram_block_bits = 18432;
    int64_t fifo_depth_override = 0;  // 0 = default sizing
    double clock_mhz = 100.0;
};

struct LayerAllocation {
    int pe = 1;
    int simd = 1;
    int64_t mac_units() const { return int64_t(pe) * simd; }

    friend bool operator==(const LayerAllocation&, const LayerAllocation&) = default;
};

struct AllocationPlan {
    std::vector<LayerAllocation> layers;

    // Cycles one PE spends per kernel: kernel_elems / simd.
    static int64_t kernel_cycles(const LayerSpec& l, const LayerAllocation& a) {
        return l.kernel_elems() / a.simd;
    }

    friend bool operator==(const AllocationPlan&, const AllocationPlan&) = default;
};

struct LayerResourceUsage {
    int64_t dsp = 0;
    int64_t bram = 0;
    int64_t lut = 0;
};

struct ResourceUsage {
    int64_t dsp_used = 0;
    int64_t bram_used = 0;
    int64_t lut_used = 0;
    std::vector<LayerResourceUsage> per_layer;
};

RateRatio compute_ratio(const LayerSpec& layer);

MacDistribution compute_distribution(const ModelGraph& graph);

// Largest feasible (pe, simd): maximize pe*simd subject to
// pe*simd <= target_macs, pe <= c_out, simd | kernel_elems.
// Ties prefer the larger simd, then the smaller pe.
LayerAllocation snap_allocation(const LayerSpec& layer, int64_t target_macs);

// Cost model. DSP: one per fixed-point MAC lane (binary-weight layers are
// exempt). LUT: lut_per_binary_mac per binary lane plus the per-layer
// constant. BRAM: a dedicated block group per PE for its share of the
// weights, plus the window/FIFO buffers.
ResourceUsage estimate_resources(const ModelGraph& graph, const AllocationPlan& plan,
                                 const ParamSet& params, const ResourceBudget& budget);

// Finds the largest global MAC budget whose snapped plan fits
// budget - reserved, by doubling then bisecting. Deterministic. Throws
// Error{InfeasibleBudget} when even the all-(1,1) plan does not fit.
std::pair<AllocationPlan, ResourceUsage> allocate(const ModelGraph& graph,
                                                  const ResourceBudget& budget,
                                                  const ParamSet& params);

}  // namespace nn2c
