#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nn2c/fixed_point.hpp"

namespace nn2c {

enum class LayerKind { Conv, FC, AvgPool };

const char* to_string(LayerKind k);
const char* to_string(ActFn f);

// One layer of the network IR. All spatial fields are in elements; the
// weight tensor is indexed [c_out][k_y][k_x][c_in].
struct LayerSpec {
    LayerKind kind = LayerKind::Conv;
    int x_in = 0, y_in = 0, c_in = 0;
    int k_x = 0, k_y = 0;
    int s_x = 1, s_y = 1;
    int p_x = 0, p_y = 0;
    int c_out = 0;
    FxFormat w_fmt;  // ignored for AvgPool (no learned weights)
    FxFormat a_fmt;  // output activation format
    ActFn act_fn = ActFn::None;
    bool has_bias = false;

    int x_out() const { return (x_in + 2 * p_x - k_x) / s_x + 1; }
    int y_out() const { return (y_in + 2 * p_y - k_y) / s_y + 1; }

    // Elements of one kernel, and of the whole weight tensor.
    int64_t kernel_elems() const {
        return int64_t(k_x) * k_y * c_in;
    }
    int64_t weight_count() const {
        return kind == LayerKind::AvgPool ? 0 : int64_t(c_out) * kernel_elems();
    }
    int64_t out_positions() const { return int64_t(x_out()) * y_out(); }

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ModelGraph {
    std::string name;
    FxFormat input_fmt;
    std::vector<LayerSpec> layers;

    // Format of the tensor entering layer i (graph input for i == 0).
    const FxFormat& in_fmt(size_t i) const {
        return i == 0 ? input_fmt : layers[i - 1].a_fmt;
    }

    friend bool operator==(const ModelGraph&, const ModelGraph&) = default;
};

// Loaded parameters for one layer. Binary weights are kept as one {0,1}
// code per element here; bit packing is a container/PE-memory concern.
// For BinarySign layers the bias slot holds the signed threshold.
struct LayerParams {
    std::vector<int32_t> weights;  // [c_out][k_y][k_x][c_in]
    std::vector<int32_t> bias;     // per c_out, at the accumulator scale

    int32_t weight_at(const LayerSpec& l, int co, int ky, int kx, int ci) const {
        return weights[((int64_t(co) * l.k_y + ky) * l.k_x + kx) * l.c_in + ci];
    }
};

struct ParamSet {
    std::vector<LayerParams> layers;
};

struct OpCount {
    int64_t macs = 0;  // Conv/FC multiply-accumulates
    int64_t adds = 0;  // AvgPool additions
    int64_t ops() const { return 2 * macs + adds; }
};

// (x_out, y_out, c_out) for a validated layer.
struct OutputDims {
    int x = 0, y = 0, c = 0;
};
OutputDims derive_output_dims(const LayerSpec& layer);

// Validates every layer/graph invariant and the accumulator-width bound;
// throws Error{Validation} naming the offending layer(s).
void validate(const ModelGraph& graph);

// Architecture document (JSON text) <-> ModelGraph. parse validates.
ModelGraph parse_architecture(const std::string& text);
std::string serialize_architecture(const ModelGraph& graph);

// Total operation counts per the reporting convention: one MAC = 2 ops,
// one pooling addition = 1 op.
OpCount op_count(const ModelGraph& graph);

// Checks that a ParamSet structurally matches a graph (counts and ranges).
void validate_params(const ModelGraph& graph, const ParamSet& params);

}  // namespace nn2c
