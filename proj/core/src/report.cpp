#include "nn2c/report.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>

#include "nn2c/error.hpp"
#include "nn2c/layout.hpp"

namespace nn2c {

using json = nlohmann::json;

BudgetDesc to_desc(const ResourceBudget& b) {
    BudgetDesc d;
    d.dsp = b.dsp;
    d.bram = b.bram;
    d.lut = b.lut;
    d.reserve_dsp = b.reserve_dsp;
    d.reserve_bram = b.reserve_bram;
    d.reserve_lut = b.reserve_lut;
    d.lut_per_binary_mac = b.lut_per_binary_mac;
    d.lut_per_layer = b.lut_per_layer;
    d.bram_block_bits = b.bram_block_bits;
    d.fifo_depth_override = b.fifo_depth_override;
    d.clock_mhz = b.clock_mhz;
    return d;
}

ResourceBudget from_desc(const BudgetDesc& d) {
    ResourceBudget b;
    b.dsp = d.dsp;
    b.bram = d.bram;
    b.lut = d.lut;
    b.reserve_dsp = d.reserve_dsp;
    b.reserve_bram = d.reserve_bram;
    b.reserve_lut = d.reserve_lut;
    b.lut_per_binary_mac = d.lut_per_binary_mac;
    b.lut_per_layer = d.lut_per_layer;
    b.bram_block_bits = d.bram_block_bits;
    b.fifo_depth_override = d.fifo_depth_override;
    b.clock_mhz = d.clock_mhz;
    return b;
}

PipelineDescription describe_pipeline(const ModelGraph& graph,
                                      const AllocationPlan& plan,
                                      const ResourceUsage& usage,
                                      const ResourceBudget& budget) {
    PipelineDescription doc;
    doc.model = graph.name;
    doc.budget = to_desc(budget);
    const OpCount ops = op_count(graph);
    doc.macs = ops.macs;
    doc.adds = ops.adds;
    doc.dsp_used = usage.dsp_used;
    doc.bram_used = usage.bram_used;
    doc.lut_used = usage.lut_used;
    for (size_t i = 0; i < graph.layers.size(); ++i) {
        const LayerSpec& l = graph.layers[i];
        const LayerAllocation& a = plan.layers[i];
        LayerBlockDesc d;
        d.kind = to_string(l.kind);
        d.x_in = l.x_in;
        d.y_in = l.y_in;
        d.c_in = l.c_in;
        d.x_out = l.x_out();
        d.y_out = l.y_out();
        d.c_out = l.c_out;
        d.k_x = l.k_x;
        d.k_y = l.k_y;
        d.s_x = l.s_x;
        d.s_y = l.s_y;
        d.pe = a.pe;
        d.simd = a.simd;
        d.kernel_cycles = AllocationPlan::kernel_cycles(l, a);
        d.window_elems = l.kind == LayerKind::FC ? 0 : input_buffer_elems(l);
        d.fifo_depth = fifo_depth(l, budget.fifo_depth_override);
        const int64_t groups = (l.c_out + a.pe - 1) / a.pe;
        d.wmem_words = l.weight_count() > 0 ? groups * d.kernel_cycles : 0;
        d.dsp = usage.per_layer[i].dsp;
        d.bram = usage.per_layer[i].bram;
        d.lut = usage.per_layer[i].lut;
        doc.layers.push_back(std::move(d));
    }
    return doc;
}

SimReportDoc make_sim_report(const ModelGraph& graph, const TimingReport& timing,
                             const ResourceUsage& usage) {
    SimReportDoc doc;
    doc.model = graph.name;
    doc.clock_mhz = timing.clock_mhz;
    doc.total_cycles = timing.total_cycles;
    doc.latency_ms = timing.latency_ms();
    const OpCount ops = op_count(graph);
    doc.macs = ops.macs;
    doc.adds = ops.adds;
    doc.ops = ops.ops();
    // The GOPS identity is definitional: derive it from the stored fields.
    doc.throughput_gops = double(doc.ops) / (doc.latency_ms / 1e3) / 1e9;
    for (const LayerTiming& t : timing.per_layer) {
        LayerStallDesc d;
        d.busy = t.busy;
        d.stall_in = t.stall_in;
        d.stall_out = t.stall_out;
        d.pushed = t.fifo_pushed;
        d.popped = t.fifo_popped;
        doc.layers.push_back(d);
    }
    doc.dsp_used = usage.dsp_used;
    doc.bram_used = usage.bram_used;
    doc.lut_used = usage.lut_used;
    return doc;
}

// ---------------------------------------------------------------------------
// Machine format (canonical JSON, keys sorted, byte-stable)
// ---------------------------------------------------------------------------

namespace {

json budget_json(const BudgetDesc& b) {
    json j;
    j["dsp"] = b.dsp;
    j["bram"] = b.bram;
    j["lut"] = b.lut;
    j["reserve_dsp"] = b.reserve_dsp;
    j["reserve_bram"] = b.reserve_bram;
    j["reserve_lut"] = b.reserve_lut;
    j["lut_per_binary_mac"] = b.lut_per_binary_mac;
    j["lut_per_layer"] = b.lut_per_layer;
    j["bram_block_bits"] = b.bram_block_bits;
    j["fifo_depth_override"] = b.fifo_depth_override;
    j["clock_mhz"] = b.clock_mhz;
    return j;
}

BudgetDesc budget_from_json(const json& j) {
    BudgetDesc b;
    b.dsp = j.at("dsp").get<int64_t>();
    b.bram = j.at("bram").get<int64_t>();
    b.lut = j.at("lut").get<int64_t>();
    b.reserve_dsp = j.at("reserve_dsp").get<int64_t>();
    b.reserve_bram = j.at("reserve_bram").get<int64_t>();
    b.reserve_lut = j.at("reserve_lut").get<int64_t>();
    b.lut_per_binary_mac = j.at("lut_per_binary_mac").get<int64_t>();
    b.lut_per_layer = j.at("lut_per_layer").get<int64_t>();
    b.bram_block_bits = j.at("bram_block_bits").get<int64_t>();
    b.fifo_depth_override = j.at("fifo_depth_override").get<int64_t>();
    b.clock_mhz = j.at("clock_mhz").get<double>();
    return b;
}

json doc_json(const PipelineDescription& d) {
    json j;
    j["doc"] = "pipeline";
    j["model"] = d.model;
    j["budget"] = budget_json(d.budget);
    j["dsp_used"] = d.dsp_used;
    j["bram_used"] = d.bram_used;
    j["lut_used"] = d.lut_used;
    j["macs"] = d.macs;
    j["adds"] = d.adds;
    j["layers"] = json::array();
    for (const LayerBlockDesc& l : d.layers) {
        json jl;
        jl["kind"] = l.kind;
        jl["x_in"] = l.x_in;
        jl["y_in"] = l.y_in;
        jl["c_in"] = l.c_in;
        jl["x_out"] = l.x_out;
        jl["y_out"] = l.y_out;
        jl["c_out"] = l.c_out;
        jl["k_x"] = l.k_x;
        jl["k_y"] = l.k_y;
        jl["s_x"] = l.s_x;
        jl["s_y"] = l.s_y;
        jl["pe"] = l.pe;
        jl["simd"] = l.simd;
        jl["kernel_cycles"] = l.kernel_cycles;
        jl["window_elems"] = l.window_elems;
        jl["fifo_depth"] = l.fifo_depth;
        jl["wmem_words"] = l.wmem_words;
        jl["dsp"] = l.dsp;
        jl["bram"] = l.bram;
        jl["lut"] = l.lut;
        j["layers"].push_back(jl);
    }
    return j;
}

json doc_json(const SimReportDoc& d) {
    json j;
    j["doc"] = "sim_report";
    j["model"] = d.model;
    j["clock_mhz"] = d.clock_mhz;
    j["total_cycles"] = d.total_cycles;
    j["latency_ms"] = d.latency_ms;
    j["throughput_gops"] = d.throughput_gops;
    j["macs"] = d.macs;
    j["adds"] = d.adds;
    j["ops"] = d.ops;
    j["dsp_used"] = d.dsp_used;
    j["bram_used"] = d.bram_used;
    j["lut_used"] = d.lut_used;
    j["layers"] = json::array();
    for (const LayerStallDesc& l : d.layers) {
        json jl;
        jl["busy"] = l.busy;
        jl["stall_in"] = l.stall_in;
        jl["stall_out"] = l.stall_out;
        jl["pushed"] = l.pushed;
        jl["popped"] = l.popped;
        j["layers"].push_back(jl);
    }
    return j;
}

json parse_doc(const std::string& text, const char* expected) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, std::string("report syntax error: ") + e.what());
    }
    if (j.value("doc", "") != expected)
        throw Error(ErrorKind::Parse,
                    std::string("expected a '") + expected + "' document");
    return j;
}

std::string fmt_row(const char* a, const std::string& b, const std::string& c,
                    const std::string& d, const std::string& e,
                    const std::string& f, const std::string& g) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-14s %14s %18s %10s %6s %6s %6s\n", a,
                  b.c_str(), c.c_str(), d.c_str(), e.c_str(), f.c_str(), g.c_str());
    return buf;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace

std::string render_report(const PipelineDescription& d, ReportFormat format) {
    if (format == ReportFormat::Machine) return doc_json(d).dump(2) + "\n";

    std::string out;
    out += "pipeline: " + d.model + "\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%-3s %-8s %-12s %-12s %4s %5s %7s %8s %6s %5s %5s %7s\n", "i",
                  "kind", "in", "out", "pe", "simd", "kcycle", "window", "fifo",
                  "dsp", "bram", "lut");
    out += buf;
    for (size_t i = 0; i < d.layers.size(); ++i) {
        const LayerBlockDesc& l = d.layers[i];
        const std::string in_dims = std::to_string(l.x_in) + "x" +
                                    std::to_string(l.y_in) + "x" + std::to_string(l.c_in);
        const std::string out_dims = std::to_string(l.x_out) + "x" +
                                     std::to_string(l.y_out) + "x" +
                                     std::to_string(l.c_out);
        std::snprintf(buf, sizeof(buf),
                      "%-3zu %-8s %-12s %-12s %4d %5d %7lld %8lld %6lld %5lld %5lld %7lld\n",
                      i, l.kind.c_str(), in_dims.c_str(), out_dims.c_str(), l.pe,
                      l.simd, (long long)l.kernel_cycles, (long long)l.window_elems,
                      (long long)l.fifo_depth, (long long)l.dsp, (long long)l.bram,
                      (long long)l.lut);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "totals: dsp %lld/%lld  bram %lld/%lld  lut %lld/%lld  (reserved "
                  "%lld/%lld/%lld)\n",
                  (long long)d.dsp_used, (long long)d.budget.dsp,
                  (long long)d.bram_used, (long long)d.budget.bram,
                  (long long)d.lut_used, (long long)d.budget.lut,
                  (long long)d.budget.reserve_dsp, (long long)d.budget.reserve_bram,
                  (long long)d.budget.reserve_lut);
    out += buf;
    return out;
}

std::string render_report(const SimReportDoc& d, ReportFormat format) {
    if (format == ReportFormat::Machine) return doc_json(d).dump(2) + "\n";

    // Fixed-width summary table in the usual reporting layout; FF is not
    // modeled and stays a placeholder column.
    std::string out;
    out += "simulation: " + d.model + "\n";
    out += fmt_row("", "Latency [ms]", "Throughput [GOP/s]", "LUT", "FF", "DSP",
                   "BRAM");
    out += fmt_row(d.model.substr(0, 14).c_str(), fmt_double(d.latency_ms),
                   fmt_double(d.throughput_gops), std::to_string(d.lut_used), "-",
                   std::to_string(d.dsp_used), std::to_string(d.bram_used));
    char buf[160];
    std::snprintf(buf, sizeof(buf), "cycles: %lld @ %.1f MHz, ops: %lld (%lld MAC, %lld add)\n",
                  (long long)d.total_cycles, d.clock_mhz, (long long)d.ops,
                  (long long)d.macs, (long long)d.adds);
    out += buf;
    std::snprintf(buf, sizeof(buf), "%-3s %12s %12s %12s %12s %12s\n", "i", "busy",
                  "stall_in", "stall_out", "pushed", "popped");
    out += buf;
    for (size_t i = 0; i < d.layers.size(); ++i) {
        const LayerStallDesc& l = d.layers[i];
        std::snprintf(buf, sizeof(buf), "%-3zu %12lld %12lld %12lld %12lld %12lld\n",
                      i, (long long)l.busy, (long long)l.stall_in,
                      (long long)l.stall_out, (long long)l.pushed,
                      (long long)l.popped);
        out += buf;
    }
    return out;
}

PipelineDescription parse_pipeline_description(const std::string& text) {
    const json j = parse_doc(text, "pipeline");
    PipelineDescription d;
    d.model = j.at("model").get<std::string>();
    d.budget = budget_from_json(j.at("budget"));
    d.dsp_used = j.at("dsp_used").get<int64_t>();
    d.bram_used = j.at("bram_used").get<int64_t>();
    d.lut_used = j.at("lut_used").get<int64_t>();
    d.macs = j.at("macs").get<int64_t>();
    d.adds = j.at("adds").get<int64_t>();
    for (const json& jl : j.at("layers")) {
        LayerBlockDesc l;
        l.kind = jl.at("kind").get<std::string>();
        l.x_in = jl.at("x_in").get<int>();
        l.y_in = jl.at("y_in").get<int>();
        l.c_in = jl.at("c_in").get<int>();
        l.x_out = jl.at("x_out").get<int>();
        l.y_out = jl.at("y_out").get<int>();
        l.c_out = jl.at("c_out").get<int>();
        l.k_x = jl.at("k_x").get<int>();
        l.k_y = jl.at("k_y").get<int>();
        l.s_x = jl.at("s_x").get<int>();
        l.s_y = jl.at("s_y").get<int>();
        l.pe = jl.at("pe").get<int>();
        l.simd = jl.at("simd").get<int>();
        l.kernel_cycles = jl.at("kernel_cycles").get<int64_t>();
        l.window_elems = jl.at("window_elems").get<int64_t>();
        l.fifo_depth = jl.at("fifo_depth").get<int64_t>();
        l.wmem_words = jl.at("wmem_words").get<int64_t>();
        l.dsp = jl.at("dsp").get<int64_t>();
        l.bram = jl.at("bram").get<int64_t>();
        l.lut = jl.at("lut").get<int64_t>();
        d.layers.push_back(std::move(l));
    }
    return d;
}

SimReportDoc parse_sim_report(const std::string& text) {
    const json j = parse_doc(text, "sim_report");
    SimReportDoc d;
    d.model = j.at("model").get<std::string>();
    d.clock_mhz = j.at("clock_mhz").get<double>();
    d.total_cycles = j.at("total_cycles").get<int64_t>();
    d.latency_ms = j.at("latency_ms").get<double>();
    d.throughput_gops = j.at("throughput_gops").get<double>();
    d.macs = j.at("macs").get<int64_t>();
    d.adds = j.at("adds").get<int64_t>();
    d.ops = j.at("ops").get<int64_t>();
    d.dsp_used = j.at("dsp_used").get<int64_t>();
    d.bram_used = j.at("bram_used").get<int64_t>();
    d.lut_used = j.at("lut_used").get<int64_t>();
    for (const json& jl : j.at("layers")) {
        LayerStallDesc l;
        l.busy = jl.at("busy").get<int64_t>();
        l.stall_in = jl.at("stall_in").get<int64_t>();
        l.stall_out = jl.at("stall_out").get<int64_t>();
        l.pushed = jl.at("pushed").get<int64_t>();
        l.popped = jl.at("popped").get<int64_t>();
        d.layers.push_back(l);
    }
    return d;
}

}  // namespace nn2c
