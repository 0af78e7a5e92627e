#include "nn2c/model_ir.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

#include "nn2c/error.hpp"

namespace nn2c {

using json = nlohmann::json;

const char* to_string(LayerKind k) {
    switch (k) {
        case LayerKind::Conv: return "conv";
        case LayerKind::FC: return "fc";
        case LayerKind::AvgPool: return "avgpool";
    }
    return "?";
}

const char* to_string(ActFn f) {
    switch (f) {
        case ActFn::None: return "none";
        case ActFn::ReLU: return "relu";
        case ActFn::BinarySign: return "binary_sign";
    }
    return "?";
}

static LayerKind parse_kind(const std::string& s, size_t idx) {
    if (s == "conv") return LayerKind::Conv;
    if (s == "fc") return LayerKind::FC;
    if (s == "avgpool") return LayerKind::AvgPool;
    throw Error(ErrorKind::Parse,
                "layer " + std::to_string(idx) + ": unsupported layer kind '" + s + "'");
}

static ActFn parse_act(const std::string& s, size_t idx) {
    if (s == "none") return ActFn::None;
    if (s == "relu") return ActFn::ReLU;
    if (s == "binary_sign") return ActFn::BinarySign;
    throw Error(ErrorKind::Parse,
                "layer " + std::to_string(idx) + ": unknown act_fn '" + s + "'");
}

OutputDims derive_output_dims(const LayerSpec& layer) {
    return OutputDims{layer.x_out(), layer.y_out(), layer.c_out};
}

static void validate_format(const FxFormat& f, const std::string& what) {
    if (!f.valid())
        throw Error(ErrorKind::Validation,
                    what + ": invalid format " + std::to_string(f.total_bits) + "/" +
                        std::to_string(f.frac_bits));
}

static void validate_layer(const LayerSpec& l, size_t idx) {
    const std::string where = "layer " + std::to_string(idx);
    auto fail = [&](const std::string& msg) {
        throw Error(ErrorKind::Validation, where + ": " + msg);
    };

    if (l.x_in < 1 || l.y_in < 1 || l.c_in < 1) fail("input dims must be positive");
    if (l.k_x < 1 || l.k_y < 1) fail("kernel extents must be positive");
    if (l.s_x < 1 || l.s_y < 1) fail("strides must be positive");
    if (l.p_x < 0 || l.p_y < 0) fail("padding must be non-negative");
    if (l.c_out < 1) fail("c_out must be positive");

    if ((l.x_in + 2 * l.p_x - l.k_x) % l.s_x != 0 ||
        (l.y_in + 2 * l.p_y - l.k_y) % l.s_y != 0)
        fail("non-integral output dimension");
    if (l.x_out() < 1 || l.y_out() < 1) fail("output dims must be >= 1");

    if (l.kind == LayerKind::FC) {
        if (l.k_x != l.x_in || l.k_y != l.y_in) fail("FC kernel must span input");
        if (l.s_x != 1 || l.s_y != 1 || l.p_x != 0 || l.p_y != 0)
            fail("FC layers take stride 1 and no padding");
    }
    if (l.kind == LayerKind::AvgPool) {
        if (l.c_out != l.c_in) fail("avgpool must keep the channel count");
        if (l.has_bias) fail("avgpool layers have no bias");
    }

    if (l.kind != LayerKind::AvgPool) validate_format(l.w_fmt, where + " weights");
    validate_format(l.a_fmt, where + " activations");
    if ((l.act_fn == ActFn::BinarySign) != l.a_fmt.is_binary())
        fail("binary_sign activation requires a binary output format and vice versa");
}

void validate(const ModelGraph& graph) {
    if (graph.layers.empty())
        throw Error(ErrorKind::Validation, "graph has no layers");
    validate_format(graph.input_fmt, "graph input");

    for (size_t i = 0; i < graph.layers.size(); ++i) {
        const LayerSpec& l = graph.layers[i];
        validate_layer(l, i);

        if (i > 0) {
            const LayerSpec& prev = graph.layers[i - 1];
            if (l.x_in != prev.x_out() || l.y_in != prev.y_out() ||
                l.c_in != prev.c_out)
                throw Error(ErrorKind::Validation,
                            "layer " + std::to_string(i) + " declares input " +
                                std::to_string(l.x_in) + "x" + std::to_string(l.y_in) +
                                "x" + std::to_string(l.c_in) + " but layer " +
                                std::to_string(i - 1) + " produces " +
                                std::to_string(prev.x_out()) + "x" +
                                std::to_string(prev.y_out()) + "x" +
                                std::to_string(prev.c_out));
        }

        // Largest magnitude of a kernel dot product must fit 48 bits:
        // ceil(log2(kernel_elems)) + w_bits + a_bits <= 48.
        const FxFormat& in = graph.in_fmt(i);
        const int kbits = int(std::ceil(std::log2(double(l.kernel_elems()))));
        const int wbits = l.kind == LayerKind::AvgPool ? 1 : l.w_fmt.total_bits;
        if (kbits + wbits + in.total_bits > 48)
            throw Error(ErrorKind::Validation,
                        "layer " + std::to_string(i) +
                            ": accumulation exceeds the 48-bit accumulator");
    }
}

// ---------------------------------------------------------------------------
// Architecture document
// ---------------------------------------------------------------------------

static const char* kLayerKeys[] = {"kind", "x_in",  "y_in",   "c_in",  "k_x",
                                   "k_y",  "s_x",   "s_y",    "p_x",   "p_y",
                                   "c_out", "w_bits", "w_frac", "a_bits",
                                   "a_frac", "act_fn", "has_bias"};

static int get_int(const json& j, const char* key, size_t idx) {
    const auto it = j.find(key);
    if (it == j.end())
        throw Error(ErrorKind::Parse, "layer " + std::to_string(idx) +
                                          ": missing key '" + key + "'");
    if (!it->is_number_integer())
        throw Error(ErrorKind::Parse, "layer " + std::to_string(idx) + ": key '" +
                                          key + "' must be an integer");
    return it->get<int>();
}

ModelGraph parse_architecture(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, std::string("syntax error: ") + e.what());
    }
    if (!doc.is_object())
        throw Error(ErrorKind::Parse, "document root must be an object");
    for (const char* key : {"name", "input_bits", "input_frac", "layers"})
        if (!doc.contains(key))
            throw Error(ErrorKind::Parse, std::string("missing top-level key '") + key + "'");

    ModelGraph g;
    g.name = doc.at("name").get<std::string>();
    g.input_fmt = FxFormat{doc.at("input_bits").get<int>(),
                           doc.at("input_frac").get<int>()};
    const json& layers = doc.at("layers");
    if (!layers.is_array())
        throw Error(ErrorKind::Parse, "'layers' must be an array");

    for (size_t i = 0; i < layers.size(); ++i) {
        const json& jl = layers[i];
        if (!jl.is_object())
            throw Error(ErrorKind::Parse, "layer " + std::to_string(i) + " must be an object");
        for (auto it = jl.begin(); it != jl.end(); ++it) {
            if (std::find_if(std::begin(kLayerKeys), std::end(kLayerKeys),
                             [&](const char* k) { return it.key() == k; }) ==
                std::end(kLayerKeys))
                throw Error(ErrorKind::Parse, "layer " + std::to_string(i) +
                                                  ": unknown key '" + it.key() + "'");
        }

        LayerSpec l;
        if (!jl.contains("kind") || !jl.at("kind").is_string())
            throw Error(ErrorKind::Parse,
                        "layer " + std::to_string(i) + ": missing key 'kind'");
        l.kind = parse_kind(jl.at("kind").get<std::string>(), i);
        l.x_in = get_int(jl, "x_in", i);
        l.y_in = get_int(jl, "y_in", i);
        l.c_in = get_int(jl, "c_in", i);
        l.k_x = get_int(jl, "k_x", i);
        l.k_y = get_int(jl, "k_y", i);
        l.s_x = get_int(jl, "s_x", i);
        l.s_y = get_int(jl, "s_y", i);
        l.p_x = get_int(jl, "p_x", i);
        l.p_y = get_int(jl, "p_y", i);
        l.c_out = get_int(jl, "c_out", i);
        l.w_fmt = FxFormat{get_int(jl, "w_bits", i), get_int(jl, "w_frac", i)};
        l.a_fmt = FxFormat{get_int(jl, "a_bits", i), get_int(jl, "a_frac", i)};
        if (!jl.contains("act_fn") || !jl.at("act_fn").is_string())
            throw Error(ErrorKind::Parse,
                        "layer " + std::to_string(i) + ": missing key 'act_fn'");
        l.act_fn = parse_act(jl.at("act_fn").get<std::string>(), i);
        if (!jl.contains("has_bias") || !jl.at("has_bias").is_boolean())
            throw Error(ErrorKind::Parse,
                        "layer " + std::to_string(i) + ": missing key 'has_bias'");
        l.has_bias = jl.at("has_bias").get<bool>();
        g.layers.push_back(l);
    }

    validate(g);
    return g;
}

std::string serialize_architecture(const ModelGraph& graph) {
    json doc;
    doc["name"] = graph.name;
    doc["input_bits"] = graph.input_fmt.total_bits;
    doc["input_frac"] = graph.input_fmt.frac_bits;
    doc["layers"] = json::array();
    for (const LayerSpec& l : graph.layers) {
        json jl;
        jl["kind"] = to_string(l.kind);
        jl["x_in"] = l.x_in;
        jl["y_in"] = l.y_in;
        jl["c_in"] = l.c_in;
        jl["k_x"] = l.k_x;
        jl["k_y"] = l.k_y;
        jl["s_x"] = l.s_x;
        jl["s_y"] = l.s_y;
        jl["p_x"] = l.p_x;
        jl["p_y"] = l.p_y;
        jl["c_out"] = l.c_out;
        jl["w_bits"] = l.w_fmt.total_bits;
        jl["w_frac"] = l.w_fmt.frac_bits;
        jl["a_bits"] = l.a_fmt.total_bits;
        jl["a_frac"] = l.a_fmt.frac_bits;
        jl["act_fn"] = to_string(l.act_fn);
        jl["has_bias"] = l.has_bias;
        doc["layers"].push_back(jl);
    }
    return doc.dump(2) + "\n";
}

OpCount op_count(const ModelGraph& graph) {
    OpCount c;
    for (const LayerSpec& l : graph.layers) {
        const int64_t per_pos = l.kernel_elems();
        if (l.kind == LayerKind::AvgPool) {
            c.adds += l.out_positions() * per_pos;
        } else {
            c.macs += l.out_positions() * l.c_out * per_pos;
        }
    }
    return c;
}

void validate_params(const ModelGraph& graph, const ParamSet& params) {
    if (params.layers.size() != graph.layers.size())
        throw Error(ErrorKind::Format,
                    "parameter set has " + std::to_string(params.layers.size()) +
                        " layers, graph has " + std::to_string(graph.layers.size()));
    for (size_t i = 0; i < graph.layers.size(); ++i) {
        const LayerSpec& l = graph.layers[i];
        const LayerParams& p = params.layers[i];
        if (int64_t(p.weights.size()) != l.weight_count())
            throw Error(ErrorKind::Format,
                        "layer " + std::to_string(i) + ": expected " +
                            std::to_string(l.weight_count()) + " weights, got " +
                            std::to_string(p.weights.size()));
        const int64_t expect_bias = l.has_bias ? l.c_out : 0;
        if (int64_t(p.bias.size()) != expect_bias)
            throw Error(ErrorKind::Format,
                        "layer " + std::to_string(i) + ": expected " +
                            std::to_string(expect_bias) + " bias values, got " +
                            std::to_string(p.bias.size()));
        if (l.kind != LayerKind::AvgPool) {
            for (int32_t w : p.weights)
                if (!l.w_fmt.holds_raw(w))
                    throw Error(ErrorKind::Format,
                                "layer " + std::to_string(i) +
                                    ": weight raw code out of range: " + std::to_string(w));
        }
    }
}

}  // namespace nn2c
