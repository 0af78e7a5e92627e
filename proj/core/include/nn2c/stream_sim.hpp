#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "nn2c/balancer.hpp"
#include "nn2c/model_ir.hpp"
#include "nn2c/tensor.hpp"

namespace nn2c {

// Cycle-stepped model of the streaming pipeline: one block per layer
// (sliding-window buffer where applicable, a PE group, an output FIFO),
// chained by element streams in channel-first order.
//
// Timing contract, evaluated once per cycle in downstream-to-upstream
// order so that a FIFO pop and push can share a cycle:
//   (a) the input injector offers one element per cycle to layer 1;
//   (b) each block accepts at most one incoming element per cycle into its
//       window/vector buffer; writes become visible the next cycle;
//   (c) a PE group performs one parallel MAC step (pe x simd lanes) per
//       cycle when its current window is resident; bias, activation and
//       emission share the cycle of a kernel's final MAC, which also
//       requires FIFO space for the emitted burst;
//   (d) the collector drains the last FIFO at full rate (result extraction
//       is outside the modeled fabric).

struct SimOptions {
    int64_t fifo_depth_override = 0;  // 0 = 2 * channels of the stream
    bool binary_via_arith = false;    // +-1 add/sub path instead of popcount
    bool trace_streams = false;       // record FIFO crossing order (tests)
};

struct LayerTiming {
    int64_t busy = 0;        // MAC-step cycles
    int64_t stall_in = 0;    // started but operands not resident
    int64_t stall_out = 0;   // final word ready but no FIFO space
    int64_t first_busy = -1; // cycle of the first MAC step
    int64_t last_emit = -1;  // cycle of the final emission
    int64_t fifo_pushed = 0;
    int64_t fifo_popped = 0;
    int64_t fifo_max_occupancy = 0;

    int64_t active() const { return busy + stall_in + stall_out; }
    double stall_in_fraction() const {
        const int64_t a = active();
        return a ? double(stall_in) / double(a) : 0.0;
    }
};

struct TimingReport {
    int64_t total_cycles = 0;
    double clock_mhz = 100.0;
    int64_t ops = 0;
    std::vector<LayerTiming> per_layer;

    double latency_ms() const { return double(total_cycles) / (clock_mhz * 1e3); }
    double throughput_gops() const {
        const double s = latency_ms() / 1e3;
        return s > 0 ? double(ops) / s / 1e9 : 0.0;
    }
};

// One entry of the sliding-window access stream: the input coordinate a
// kernel position reads for a given output position, in emission order
// (outputs row-major, window coordinates channel-first then x then y).
struct WindowRef {
    int out_x = 0, out_y = 0;
    int in_x = 0, in_y = 0, c = 0;
    bool padded = false;
};
std::vector<WindowRef> window_sequence(const LayerSpec& layer);

class PipelineSim {
public:
    PipelineSim(const ModelGraph& graph, const AllocationPlan& plan,
                const ParamSet& params, const SimOptions& options = {});
    ~PipelineSim();
    PipelineSim(PipelineSim&&) noexcept;
    PipelineSim& operator=(PipelineSim&&) noexcept;

    // Runs the whole frame to completion; deterministic. Throws
    // Error{Deadlock} if no component makes progress for longer than the
    // total pipeline capacity.
    std::pair<QTensor, TimingReport> run(const QTensor& input, double clock_mhz = 100.0);

    // Structure introspection.
    size_t layer_count() const;
    bool has_window_buffer(size_t layer) const;  // false for FC blocks
    int64_t fifo_capacity(size_t layer) const;
    int64_t input_buffer_capacity(size_t layer) const;
    // The simd raw weights stored at one address of one PE's memory.
    std::vector<int32_t> weight_word(size_t layer, int pe, int64_t address) const;
    // Tags pushed through a layer's output FIFO when trace_streams is on:
    // position * c_out + channel, in crossing order.
    const std::vector<int64_t>& stream_trace(size_t layer) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

PipelineSim build_pipeline(const ModelGraph& graph, const AllocationPlan& plan,
                           const ParamSet& params, const SimOptions& options = {});

// Closed-form steady-state prediction under the same contract: per-layer
// cycles per output position ceil(c_out/pe) * kernel_elems/simd, pipeline
// limited by the slowest layer, plus first-window fill. Exact (by direct
// recurrence) for single-layer networks.
TimingReport throughput_model(const ModelGraph& graph, const AllocationPlan& plan,
                              double clock_mhz);

}  // namespace nn2c
