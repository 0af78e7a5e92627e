// nn2c: compile a quantized network onto the modeled streaming fabric,
// simulate it cycle by cycle, or run the layer-wise reference.

#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "nn2c/balancer.hpp"
#include "nn2c/error.hpp"
#include "nn2c/formats.hpp"
#include "nn2c/model_ir.hpp"
#include "nn2c/oracle.hpp"
#include "nn2c/report.hpp"
#include "nn2c/stream_sim.hpp"

namespace {

// Exit codes: 0 ok, 1 usage, 2 parse/validation error, 3 infeasible budget,
// 4 tensor-format error, 5 oracle mismatch.
int exit_code(const nn2c::Error& e) {
    switch (e.kind()) {
        case nn2c::ErrorKind::Parse:
        case nn2c::ErrorKind::Validation:
        case nn2c::ErrorKind::Format:
            return 2;
        case nn2c::ErrorKind::InfeasibleBudget:
            return 3;
        case nn2c::ErrorKind::TensorFormat:
            return 4;
        case nn2c::ErrorKind::Mismatch:
            return 5;
        case nn2c::ErrorKind::Deadlock:
            return 6;
    }
    return 2;
}

struct CommonArgs {
    std::string arch_path;
    std::string params_path;
    std::string out_path;
    std::string format = "machine";
    nn2c::ResourceBudget budget;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_budget) {
    cmd->add_option("--arch", args.arch_path, "architecture document (JSON)")
        ->required();
    cmd->add_option("--params", args.params_path, "parameter container (NN2C)")
        ->required();
    cmd->add_option("--out", args.out_path, "output document path");
    cmd->add_option("--format", args.format, "report format: human|machine")
        ->check(CLI::IsMember({"human", "machine"}));
    if (!with_budget) return;
    nn2c::ResourceBudget& b = args.budget;
    cmd->add_option("--dsp", b.dsp, "DSP budget");
    cmd->add_option("--bram", b.bram, "BRAM budget (18-kbit blocks)");
    cmd->add_option("--lut", b.lut, "LUT budget");
    cmd->add_option("--reserve-dsp", b.reserve_dsp, "DSPs held by the host app");
    cmd->add_option("--reserve-bram", b.reserve_bram, "BRAMs held by the host app");
    cmd->add_option("--reserve-lut", b.reserve_lut, "LUTs held by the host app");
    cmd->add_option("--lut-per-binmac", b.lut_per_binary_mac,
                    "LUT cost of one binary MAC lane");
    cmd->add_option("--lut-per-layer", b.lut_per_layer,
                    "fixed per-layer logic overhead");
    cmd->add_option("--fifo-depth", b.fifo_depth_override,
                    "inter-layer FIFO depth override (elements)");
    cmd->add_option("--clock-mhz", b.clock_mhz, "pipeline clock");
}

struct Compiled {
    nn2c::ModelGraph graph;
    nn2c::ParamSet params;
    nn2c::AllocationPlan plan;
    nn2c::ResourceUsage usage;
};

Compiled compile(const CommonArgs& args) {
    Compiled c;
    c.graph = nn2c::parse_architecture(nn2c::read_text_file(args.arch_path));
    c.params = nn2c::load_params(nn2c::read_file(args.params_path), c.graph);
    auto [plan, usage] = nn2c::allocate(c.graph, args.budget, c.params);
    c.plan = std::move(plan);
    c.usage = std::move(usage);
    return c;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::fputs(text.c_str(), stdout);
    else
        nn2c::write_text_file(out_path, text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "nn2c: streaming CNN/FC accelerator compiler and simulator\n"
        "exit codes: 0 ok, 1 usage, 2 parse/validation error, 3 infeasible\n"
        "budget, 4 tensor-format error, 5 oracle mismatch, 6 pipeline deadlock"};
    app.require_subcommand(1);

    CommonArgs compile_args;
    CLI::App* cmd_compile =
        app.add_subcommand("compile", "allocate resources and describe the pipeline");
    add_common(cmd_compile, compile_args, true);

    CommonArgs sim_args;
    std::string sim_input, sim_out_tensor;
    bool sim_oracle = false;
    CLI::App* cmd_simulate =
        app.add_subcommand("simulate", "compile, then run the cycle-level pipeline");
    add_common(cmd_simulate, sim_args, true);
    cmd_simulate->add_option("--input", sim_input, "input tensor (NNTF)")->required();
    cmd_simulate->add_option("--out-tensor", sim_out_tensor, "output tensor path");
    cmd_simulate->add_flag("--oracle", sim_oracle,
                           "cross-check the pipeline against the reference");

    CommonArgs oracle_args;
    std::string oracle_input, oracle_out_tensor, oracle_mode = "quantized";
    CLI::App* cmd_oracle =
        app.add_subcommand("oracle", "run the layer-wise reference implementation");
    add_common(cmd_oracle, oracle_args, false);
    cmd_oracle->add_option("--input", oracle_input, "input tensor (NNTF)")->required();
    cmd_oracle->add_option("--out-tensor", oracle_out_tensor, "output tensor path")
        ->required();
    cmd_oracle->add_option("--mode", oracle_mode, "real|quantized")
        ->check(CLI::IsMember({"real", "quantized"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_compile->parsed()) {
            const Compiled c = compile(compile_args);
            const nn2c::PipelineDescription doc =
                nn2c::describe_pipeline(c.graph, c.plan, c.usage, compile_args.budget);
            const auto fmt = compile_args.format == "human"
                                 ? nn2c::ReportFormat::Human
                                 : nn2c::ReportFormat::Machine;
            emit(nn2c::render_report(doc, fmt), compile_args.out_path);
        } else if (cmd_simulate->parsed()) {
            const Compiled c = compile(sim_args);
            const nn2c::QTensor input = nn2c::load_tensor(nn2c::read_file(sim_input));
            nn2c::SimOptions opts;
            opts.fifo_depth_override = sim_args.budget.fifo_depth_override;
            nn2c::PipelineSim sim(c.graph, c.plan, c.params, opts);
            auto [output, timing] = sim.run(input, sim_args.budget.clock_mhz);
            if (sim_oracle) {
                const nn2c::QTensor expect =
                    nn2c::run_network_quant(c.graph, c.params, input);
                if (!(output == expect))
                    throw nn2c::Error(nn2c::ErrorKind::Mismatch,
                                      "pipeline output differs from the reference");
            }
            if (!sim_out_tensor.empty())
                nn2c::write_file(sim_out_tensor, nn2c::save_tensor(output));
            const nn2c::SimReportDoc doc =
                nn2c::make_sim_report(c.graph, timing, c.usage);
            const auto fmt = sim_args.format == "human" ? nn2c::ReportFormat::Human
                                                        : nn2c::ReportFormat::Machine;
            emit(nn2c::render_report(doc, fmt), sim_args.out_path);
        } else if (cmd_oracle->parsed()) {
            const nn2c::ModelGraph graph =
                nn2c::parse_architecture(nn2c::read_text_file(oracle_args.arch_path));
            const nn2c::ParamSet params =
                nn2c::load_params(nn2c::read_file(oracle_args.params_path), graph);
            const nn2c::QTensor input =
                nn2c::load_tensor(nn2c::read_file(oracle_input));
            const auto mode = oracle_mode == "real" ? nn2c::RefMode::Real
                                                    : nn2c::RefMode::Quantized;
            const nn2c::QTensor out = nn2c::run_network_ref(graph, params, input, mode);
            nn2c::write_file(oracle_out_tensor, nn2c::save_tensor(out));
        }
    } catch (const nn2c::Error& e) {
        std::fprintf(stderr, "nn2c: error: %s\n", e.what());
        return exit_code(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "nn2c: error: %s\n", e.what());
        return 2;
    }
    return 0;
}
