#pragma once

#include <string>
#include <vector>

#include "nn2c/balancer.hpp"
#include "nn2c/model_ir.hpp"
#include "nn2c/stream_sim.hpp"

namespace nn2c {

enum class ReportFormat { Human, Machine };

// Per-layer record of the compiled pipeline; field values re-derive from
// the plan and budget, so the machine rendering is byte-stable.
struct LayerBlockDesc {
    std::string kind;
    int x_in = 0, y_in = 0, c_in = 0;
    int x_out = 0, y_out = 0, c_out = 0;
    int k_x = 0, k_y = 0, s_x = 0, s_y = 0;
    int pe = 1, simd = 1;
    int64_t kernel_cycles = 0;     // kernel_elems / simd
    int64_t window_elems = 0;      // input buffer elements (0 for FC blocks)
    int64_t fifo_depth = 0;
    int64_t wmem_words = 0;        // weight-memory addresses per PE
    int64_t dsp = 0, bram = 0, lut = 0;

    friend bool operator==(const LayerBlockDesc&, const LayerBlockDesc&) = default;
};

struct BudgetDesc {
    int64_t dsp = 0, bram = 0, lut = 0;
    int64_t reserve_dsp = 0, reserve_bram = 0, reserve_lut = 0;
    int64_t lut_per_binary_mac = 0, lut_per_layer = 0;
    int64_t bram_block_bits = 0, fifo_depth_override = 0;
    double clock_mhz = 0.0;

    friend bool operator==(const BudgetDesc&, const BudgetDesc&) = default;
};
BudgetDesc to_desc(const ResourceBudget& b);
ResourceBudget from_desc(const BudgetDesc& b);

struct PipelineDescription {
    std::string model;
    BudgetDesc budget;
    std::vector<LayerBlockDesc> layers;
    int64_t dsp_used = 0, bram_used = 0, lut_used = 0;
    int64_t macs = 0, adds = 0;

    friend bool operator==(const PipelineDescription&, const PipelineDescription&) = default;
};

struct LayerStallDesc {
    int64_t busy = 0, stall_in = 0, stall_out = 0;
    int64_t pushed = 0, popped = 0;

    friend bool operator==(const LayerStallDesc&, const LayerStallDesc&) = default;
};

struct SimReportDoc {
    std::string model;
    double clock_mhz = 0.0;
    int64_t total_cycles = 0;
    double latency_ms = 0.0;
    double throughput_gops = 0.0;  // always ops / latency_s, full precision
    int64_t macs = 0, adds = 0, ops = 0;
    std::vector<LayerStallDesc> layers;
    int64_t dsp_used = 0, bram_used = 0, lut_used = 0;

    friend bool operator==(const SimReportDoc&, const SimReportDoc&) = default;
};

PipelineDescription describe_pipeline(const ModelGraph& graph,
                                      const AllocationPlan& plan,
                                      const ResourceUsage& usage,
                                      const ResourceBudget& budget);

SimReportDoc make_sim_report(const ModelGraph& graph, const TimingReport& timing,
                             const ResourceUsage& usage);

std::string render_report(const PipelineDescription& doc, ReportFormat format);
std::string render_report(const SimReportDoc& doc, ReportFormat format);

PipelineDescription parse_pipeline_description(const std::string& text);
SimReportDoc parse_sim_report(const std::string& text);

}  // namespace nn2c
