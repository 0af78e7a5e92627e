#pragma once

#include <vector>

#include "nn2c/model_ir.hpp"
#include "nn2c/tensor.hpp"

namespace nn2c {

// Brute-force layer-wise reference. Deliberately the slow, obviously
// correct path: the streaming simulator must match its quantized output
// bit for bit.

enum class RefMode { Real, Quantized };

// Parameters decoded to real values (bias at the accumulator scale).
struct RealLayerParams {
    std::vector<double> weights;
    std::vector<double> bias;  // threshold for binary_sign layers
};
struct RealParams {
    std::vector<RealLayerParams> layers;
};
RealParams decode_params(const ModelGraph& graph, const ParamSet& params);

// One layer, plain nested loops over (y_out, x_out, c_out, k_y, k_x, c_in)
// with y_in = y_out*s_y - p_y, x_in = x_out*s_x - p_x. Accumulator reset,
// bias and activation happen at the end of each c_out iteration. Padded
// reads contribute zero.
QTensor run_layer_ref(const LayerSpec& layer, const LayerParams& params,
                      const QTensor& input);
RealTensor run_layer_ref(const LayerSpec& layer, const RealLayerParams& params,
                         const RealTensor& input);

// Layer-wise execution of the whole graph; the Quantized mode is the
// bit-exact contract for the stream simulator.
QTensor run_network_quant(const ModelGraph& graph, const ParamSet& params,
                          const QTensor& input);
RealTensor run_network_real(const ModelGraph& graph, const RealParams& params,
                            const RealTensor& input);

// Convenience wrapper for file-level use: Real mode decodes the input,
// runs the real chain and quantizes the final tensor into the network's
// declared output format.
QTensor run_network_ref(const ModelGraph& graph, const ParamSet& params,
                        const QTensor& input, RefMode mode);

// Per-layer max |real - decoded quantized| over a sample set; empty input
// set yields an empty report.
std::vector<double> quantization_divergence(const ModelGraph& graph,
                                            const RealParams& params_real,
                                            const ParamSet& params_quant,
                                            const std::vector<QTensor>& inputs);

}  // namespace nn2c
