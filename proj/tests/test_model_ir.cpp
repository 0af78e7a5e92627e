#include <doctest.h>

#include <random>

#include "nn2c/error.hpp"
#include "nn2c/model_ir.hpp"
#include "support/generators.hpp"

using namespace nn2c;

namespace {

std::string layer_json(const std::string& kind, int x, int y, int c, int k, int s,
                       int p, int c_out, const std::string& extra = "") {
    std::string j = "{\"kind\":\"" + kind + "\",\"x_in\":" + std::to_string(x) +
                    ",\"y_in\":" + std::to_string(y) + ",\"c_in\":" + std::to_string(c) +
                    ",\"k_x\":" + std::to_string(k) + ",\"k_y\":" + std::to_string(k) +
                    ",\"s_x\":" + std::to_string(s) + ",\"s_y\":" + std::to_string(s) +
                    ",\"p_x\":" + std::to_string(p) + ",\"p_y\":" + std::to_string(p) +
                    ",\"c_out\":" + std::to_string(c_out) +
                    ",\"w_bits\":8,\"w_frac\":4,\"a_bits\":8,\"a_frac\":4," +
                    "\"act_fn\":\"none\",\"has_bias\":false" + extra + "}";
    return j;
}

std::string doc_of(const std::string& layers) {
    return "{\"name\":\"t\",\"input_bits\":8,\"input_frac\":4,\"layers\":[" + layers +
           "]}";
}

}  // namespace

TEST_CASE("parse_architecture computes same-padding dims") {
    const ModelGraph g = parse_architecture(doc_of(layer_json("conv", 28, 28, 1, 3, 1, 1, 8)));
    CHECK(g.layers.size() == 1);
    CHECK(g.layers[0].x_out() == 28);
    CHECK(g.layers[0].y_out() == 28);
    const OutputDims d = derive_output_dims(g.layers[0]);
    CHECK(d.x == 28);
    CHECK(d.y == 28);
    CHECK(d.c == 8);
}

TEST_CASE("derive_output_dims examples") {
    LayerSpec conv{LayerKind::Conv, 640, 640, 3, 3, 3, 1, 1, 1, 1, 8,
                   {8, 4}, {8, 4}, ActFn::None, false};
    CHECK(derive_output_dims(conv).x == 640);
    CHECK(derive_output_dims(conv).y == 640);

    LayerSpec fc{LayerKind::FC, 28, 28, 1, 28, 28, 1, 1, 0, 0, 10,
                 {8, 4}, {8, 4}, ActFn::None, false};
    CHECK(derive_output_dims(fc).x == 1);
    CHECK(derive_output_dims(fc).y == 1);

    LayerSpec pool{LayerKind::AvgPool, 8, 8, 4, 2, 2, 2, 2, 0, 0, 4,
                   {8, 4}, {8, 4}, ActFn::None, false};
    CHECK(derive_output_dims(pool).x == 4);
    CHECK(derive_output_dims(pool).y == 4);
}

TEST_CASE("FC kernel must span the input") {
    const std::string bad = doc_of(layer_json("fc", 28, 28, 1, 9, 1, 0, 10));
    CHECK_THROWS_WITH_AS(parse_architecture(bad),
                         doctest::Contains("FC kernel must span input"), Error);
}

TEST_CASE("chain mismatch names both layers") {
    // Five-layer chain where the third layer declares 16 input channels
    // but its predecessor produces 32.
    const std::string layers = layer_json("conv", 8, 8, 3, 3, 1, 1, 8) + "," +
                               layer_json("conv", 8, 8, 8, 3, 1, 1, 32) + "," +
                               layer_json("conv", 8, 8, 16, 3, 1, 1, 16) + "," +
                               layer_json("conv", 8, 8, 16, 3, 1, 1, 8) + "," +
                               layer_json("conv", 8, 8, 8, 3, 1, 1, 4);
    try {
        parse_architecture(doc_of(layers));
        FAIL("expected a validation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Validation);
        const std::string msg = e.what();
        CHECK(msg.find("layer 2") != std::string::npos);
        CHECK(msg.find("layer 1") != std::string::npos);
    }
}

TEST_CASE("non-integral output dimension is rejected") {
    const std::string bad = doc_of(layer_json("conv", 7, 7, 1, 2, 2, 0, 4));
    CHECK_THROWS_AS(parse_architecture(bad), Error);
}

TEST_CASE("unsupported layer kind is rejected with position") {
    const std::string bad = doc_of(layer_json("maxpool", 8, 8, 1, 2, 2, 0, 1));
    try {
        parse_architecture(bad);
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find("layer 0") != std::string::npos);
    }
}

TEST_CASE("syntax errors report a position") {
    try {
        parse_architecture("{\"name\":");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find("syntax error") != std::string::npos);
    }
}

TEST_CASE("architecture round-trips through serialization") {
    testgen::Rng rng(101);
    for (int i = 0; i < 50; ++i) {
        const ModelGraph g = testgen::random_graph(rng);
        const ModelGraph back = parse_architecture(serialize_architecture(g));
        REQUIRE(back == g);
    }
}

TEST_CASE("chained derived dims never contradict the chain invariant") {
    testgen::Rng rng(103);
    for (int i = 0; i < 50; ++i) {
        const ModelGraph g = testgen::random_graph(rng);
        for (size_t l = 0; l + 1 < g.layers.size(); ++l) {
            const OutputDims d = derive_output_dims(g.layers[l]);
            REQUIRE(g.layers[l + 1].x_in == d.x);
            REQUIRE(g.layers[l + 1].y_in == d.y);
            REQUIRE(g.layers[l + 1].c_in == d.c);
        }
    }
}

TEST_CASE("op_count examples") {
    SUBCASE("single 1x1 conv on a 1x1x1 input") {
        const ModelGraph g = parse_architecture(doc_of(layer_json("conv", 1, 1, 1, 1, 1, 0, 1)));
        const OpCount c = op_count(g);
        CHECK(c.macs == 1);
        CHECK(c.ops() == 2);
    }
    SUBCASE("conv 4x4x2, k=3, s=1, p=0, c_out=2: enumerate the loop nest") {
        const ModelGraph g = parse_architecture(doc_of(layer_json("conv", 4, 4, 2, 3, 1, 0, 2)));
        // Independent oracle: count loop iterations directly.
        const LayerSpec& l = g.layers[0];
        int64_t n = 0;
        for (int oy = 0; oy < l.y_out(); ++oy)
            for (int ox = 0; ox < l.x_out(); ++ox)
                for (int co = 0; co < l.c_out; ++co)
                    for (int ky = 0; ky < l.k_y; ++ky)
                        for (int kx = 0; kx < l.k_x; ++kx)
                            for (int ci = 0; ci < l.c_in; ++ci) ++n;
        CHECK(n == 144);
        CHECK(op_count(g).macs == n);
    }
    SUBCASE("2x2 avgpool over 4x4x3 counts adds") {
        const ModelGraph g = parse_architecture(doc_of(layer_json("avgpool", 4, 4, 3, 2, 2, 0, 3)));
        const OpCount c = op_count(g);
        CHECK(c.macs == 0);
        CHECK(c.adds == 48);
        CHECK(c.ops() == 48);
    }
}

TEST_CASE("strict key set: unknown layer keys are rejected") {
    const std::string bad =
        doc_of(layer_json("conv", 8, 8, 1, 3, 1, 1, 4, ",\"weird\":1"));
    CHECK_THROWS_AS(parse_architecture(bad), Error);
}

TEST_CASE("binary formats tie to binary_sign activations") {
    std::string l = layer_json("conv", 8, 8, 1, 3, 1, 1, 4);
    // a_bits == 1 without binary_sign violates the invariant.
    size_t p = l.find("\"a_bits\":8");
    l.replace(p, 10, "\"a_bits\":1");
    p = l.find("\"a_frac\":4");
    l.replace(p, 10, "\"a_frac\":0");
    CHECK_THROWS_AS(parse_architecture(doc_of(l)), Error);
}

TEST_CASE("accumulator bound rejects oversized dot products") {
    // 32-bit operands over a huge kernel exceed 48 accumulator bits.
    std::string l = layer_json("conv", 512, 512, 512, 3, 1, 1, 4);
    size_t p = l.find("\"w_bits\":8");
    l.replace(p, 10, "\"w_bits\":32");
    p = l.find("\"a_bits\":8");
    l.replace(p, 10, "\"a_bits\":32");
    std::string doc = "{\"name\":\"t\",\"input_bits\":32,\"input_frac\":4,\"layers\":[" +
                      l + "]}";
    CHECK_THROWS_WITH_AS(parse_architecture(doc), doctest::Contains("48-bit"), Error);
}
