#include "nn2c/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "nn2c/error.hpp"

namespace nn2c {

namespace {

void check_input(const LayerSpec& l, int y, int x, int c) {
    if (y != l.y_in || x != l.x_in || c != l.c_in)
        throw Error(ErrorKind::Validation,
                    "input tensor is " + std::to_string(x) + "x" + std::to_string(y) +
                        "x" + std::to_string(c) + ", layer expects " +
                        std::to_string(l.x_in) + "x" + std::to_string(l.y_in) + "x" +
                        std::to_string(l.c_in));
}

// Accumulator scale: operand fractions, binary operands count as integers.
int acc_frac_of(const LayerSpec& l, const FxFormat& in_fmt) {
    if (l.kind == LayerKind::AvgPool) return effective_frac(in_fmt);
    return effective_frac(in_fmt) + effective_frac(l.w_fmt);
}

int32_t pm1(int32_t code) { return code ? 1 : -1; }  // binary {0,1} -> {-1,+1}

}  // namespace

RealParams decode_params(const ModelGraph& graph, const ParamSet& params) {
    validate_params(graph, params);
    RealParams rp;
    for (size_t i = 0; i < graph.layers.size(); ++i) {
        const LayerSpec& l = graph.layers[i];
        const LayerParams& p = params.layers[i];
        RealLayerParams rl;
        rl.weights.reserve(p.weights.size());
        for (int32_t w : p.weights)
            rl.weights.push_back(l.w_fmt.is_binary() ? double(pm1(w))
                                                     : decode(w, l.w_fmt));
        const int acc_frac = acc_frac_of(l, graph.in_fmt(i));
        for (int32_t b : p.bias) rl.bias.push_back(std::ldexp(double(b), -acc_frac));
        rp.layers.push_back(std::move(rl));
    }
    return rp;
}

QTensor run_layer_ref(const LayerSpec& l, const LayerParams& params,
                      const QTensor& input) {
    check_input(l, input.y, input.x, input.c);
    const FxFormat& in_fmt = input.fmt;
    const int acc_frac = acc_frac_of(l, in_fmt);
    const bool bin_w = l.kind != LayerKind::AvgPool && l.w_fmt.is_binary();
    const bool bin_a = in_fmt.is_binary();

    QTensor out = QTensor::zeros(l.y_out(), l.x_out(), l.c_out, l.a_fmt);
    for (int y_out = 0; y_out < l.y_out(); ++y_out) {
        for (int x_out = 0; x_out < l.x_out(); ++x_out) {
            for (int c_out = 0; c_out < l.c_out; ++c_out) {
                int64_t acc = 0;
                for (int k_y = 0; k_y < l.k_y; ++k_y) {
                    for (int k_x = 0; k_x < l.k_x; ++k_x) {
                        for (int c_in = 0; c_in < l.c_in; ++c_in) {
                            const int y_in = y_out * l.s_y - l.p_y + k_y;
                            const int x_in = x_out * l.s_x - l.p_x + k_x;
                            if (y_in < 0 || y_in >= l.y_in || x_in < 0 ||
                                x_in >= l.x_in)
                                continue;  // zero padding contributes nothing
                            const int32_t a = input.at(y_in, x_in, c_in);
                            if (l.kind == LayerKind::AvgPool) {
                                if (c_in == c_out) acc += bin_a ? pm1(a) : a;
                                continue;
                            }
                            const int32_t w = params.weight_at(l, c_out, k_y, k_x, c_in);
                            const int64_t av = bin_a ? pm1(a) : a;
                            const int64_t wv = bin_w ? pm1(w) : w;
                            acc += av * wv;
                        }
                    }
                }
                if (l.kind == LayerKind::AvgPool)
                    acc = reciprocal_divide(acc, l.k_x * l.k_y);
                int64_t threshold = 0;
                if (l.act_fn == ActFn::BinarySign) {
                    if (l.has_bias) threshold = params.bias[c_out];
                } else if (l.has_bias) {
                    acc += params.bias[c_out];
                }
                out.at(y_out, x_out, c_out) =
                    apply_activation(acc, acc_frac, l.act_fn, l.a_fmt, threshold).raw;
            }
        }
    }
    return out;
}

RealTensor run_layer_ref(const LayerSpec& l, const RealLayerParams& params,
                         const RealTensor& input) {
    check_input(l, input.y, input.x, input.c);
    RealTensor out = RealTensor::zeros(l.y_out(), l.x_out(), l.c_out);
    for (int y_out = 0; y_out < l.y_out(); ++y_out) {
        for (int x_out = 0; x_out < l.x_out(); ++x_out) {
            for (int c_out = 0; c_out < l.c_out; ++c_out) {
                double acc = 0.0;
                for (int k_y = 0; k_y < l.k_y; ++k_y) {
                    for (int k_x = 0; k_x < l.k_x; ++k_x) {
                        for (int c_in = 0; c_in < l.c_in; ++c_in) {
                            const int y_in = y_out * l.s_y - l.p_y + k_y;
                            const int x_in = x_out * l.s_x - l.p_x + k_x;
                            if (y_in < 0 || y_in >= l.y_in || x_in < 0 ||
                                x_in >= l.x_in)
                                continue;
                            const double a = input.at(y_in, x_in, c_in);
                            if (l.kind == LayerKind::AvgPool) {
                                if (c_in == c_out) acc += a;
                                continue;
                            }
                            acc += a * params.weights[((size_t(c_out) * l.k_y + k_y) *
                                                           l.k_x + k_x) * l.c_in + c_in];
                        }
                    }
                }
                if (l.kind == LayerKind::AvgPool) acc /= double(l.k_x * l.k_y);
                double r = acc;
                switch (l.act_fn) {
                    case ActFn::None:
                        if (l.has_bias) r += params.bias[c_out];
                        break;
                    case ActFn::ReLU:
                        if (l.has_bias) r += params.bias[c_out];
                        r = std::max(0.0, r);
                        break;
                    case ActFn::BinarySign: {
                        const double th = l.has_bias ? params.bias[c_out] : 0.0;
                        r = acc >= th ? 1.0 : -1.0;
                        break;
                    }
                }
                out.at(y_out, x_out, c_out) = r;
            }
        }
    }
    return out;
}

QTensor run_network_quant(const ModelGraph& graph, const ParamSet& params,
                          const QTensor& input) {
    validate_params(graph, params);
    if (input.fmt != graph.input_fmt)
        throw Error(ErrorKind::TensorFormat,
                    "input tensor format does not match the graph input format");
    QTensor t = input;
    for (size_t i = 0; i < graph.layers.size(); ++i)
        t = run_layer_ref(graph.layers[i], params.layers[i], t);
    return t;
}

RealTensor run_network_real(const ModelGraph& graph, const RealParams& params,
                            const RealTensor& input) {
    RealTensor t = input;
    for (size_t i = 0; i < graph.layers.size(); ++i)
        t = run_layer_ref(graph.layers[i], params.layers[i], t);
    return t;
}

QTensor run_network_ref(const ModelGraph& graph, const ParamSet& params,
                        const QTensor& input, RefMode mode) {
    if (mode == RefMode::Quantized) return run_network_quant(graph, params, input);
    const RealTensor real = run_network_real(graph, decode_params(graph, params),
                                             decode_tensor(input));
    return quantize_tensor(real, graph.layers.back().a_fmt);
}

std::vector<double> quantization_divergence(const ModelGraph& graph,
                                            const RealParams& params_real,
                                            const ParamSet& params_quant,
                                            const std::vector<QTensor>& inputs) {
    if (inputs.empty()) return {};
    std::vector<double> report(graph.layers.size(), 0.0);
    for (const QTensor& in : inputs) {
        RealTensor tr = decode_tensor(in);
        QTensor tq = in;
        for (size_t i = 0; i < graph.layers.size(); ++i) {
            tr = run_layer_ref(graph.layers[i], params_real.layers[i], tr);
            tq = run_layer_ref(graph.layers[i], params_quant.layers[i], tq);
            const RealTensor dq = decode_tensor(tq);
            for (size_t e = 0; e < dq.v.size(); ++e)
                report[i] = std::max(report[i], std::abs(tr.v[e] - dq.v[e]));
        }
    }
    return report;
}

}  // namespace nn2c
