#include <doctest.h>

#include "nn2c/error.hpp"
#include "nn2c/formats.hpp"
#include "support/generators.hpp"

using namespace nn2c;

namespace {

ModelGraph one_layer_graph(FxFormat w_fmt, bool has_bias = false) {
    ModelGraph g;
    g.name = "t";
    g.input_fmt = FxFormat{8, 4};
    LayerSpec l;
    l.kind = LayerKind::Conv;
    l.x_in = l.y_in = 1;
    l.c_in = 1;
    l.k_x = l.k_y = 1;
    l.c_out = 1;
    l.w_fmt = w_fmt;
    l.a_fmt = FxFormat{8, 4};
    l.has_bias = has_bias;
    g.layers.push_back(l);
    validate(g);
    return g;
}

}  // namespace

TEST_CASE("a 1x1x1x1 weight raw=3 in 8/4 decodes to 0.1875") {
    const ModelGraph g = one_layer_graph(FxFormat{8, 4});
    ParamSet ps;
    ps.layers.push_back(LayerParams{{3}, {}});
    const std::vector<uint8_t> bytes = save_params(g, ps);
    const ParamSet back = load_params(bytes, g);
    CHECK(back.layers[0].weights[0] == 3);
    CHECK(decode(back.layers[0].weights[0], g.layers[0].w_fmt) ==
          doctest::Approx(0.1875));
}

TEST_CASE("weight count mismatch is rejected") {
    // Hand-build a container holding 7 weights for an 8-weight layer.
    ModelGraph g;
    g.name = "t";
    g.input_fmt = FxFormat{8, 4};
    LayerSpec l;
    l.kind = LayerKind::Conv;
    l.x_in = l.y_in = 2;
    l.c_in = 2;
    l.k_x = l.k_y = 2;
    l.p_x = l.p_y = 1;
    l.c_out = 1;  // weight_count = 1*2*2*2 = 8
    l.w_fmt = FxFormat{8, 0};
    l.a_fmt = FxFormat{8, 0};
    g.layers.push_back(l);
    validate(g);

    std::vector<uint8_t> bytes = {'N', 'N', '2', 'C', 1, 0, 0, 0, 1, 0, 0, 0};
    bytes.push_back(0);                                       // flags
    for (int i = 0; i < 8; ++i) bytes.push_back(i == 0 ? 7 : 0);  // count u64 = 7
    for (int i = 0; i < 7; ++i) bytes.push_back(1);           // 7 payload bytes
    for (int i = 0; i < 8; ++i) bytes.push_back(0);           // bias count 0
    CHECK_THROWS_WITH_AS(load_params(bytes, g), doctest::Contains("expected 8"),
                         Error);
}

TEST_CASE("binary weights unpack LSB-first") {
    ModelGraph g;
    g.name = "t";
    g.input_fmt = FxFormat{8, 4};
    LayerSpec l;
    l.kind = LayerKind::Conv;
    l.x_in = 3, l.y_in = 1;
    l.c_in = 1;
    l.k_x = 3, l.k_y = 1;
    l.c_out = 1;  // 3 weights
    l.w_fmt = binary_format();
    l.a_fmt = FxFormat{8, 4};
    g.layers.push_back(l);
    validate(g);

    std::vector<uint8_t> bytes = {'N', 'N', '2', 'C', 1, 0, 0, 0, 1, 0, 0, 0};
    bytes.push_back(1);  // flags: binary weights
    bytes.push_back(3);
    for (int i = 0; i < 7; ++i) bytes.push_back(0);  // weight count u64 = 3
    bytes.push_back(0b00000101);                     // packed bits
    for (int i = 0; i < 8; ++i) bytes.push_back(0);  // bias count 0
    const ParamSet ps = load_params(bytes, g);
    CHECK(ps.layers[0].weights == std::vector<int32_t>{1, 0, 1});  // {+1,-1,+1}
}

TEST_CASE("bad magic and short payloads are rejected") {
    const ModelGraph g = one_layer_graph(FxFormat{8, 4});
    ParamSet ps;
    ps.layers.push_back(LayerParams{{3}, {}});
    std::vector<uint8_t> bytes = save_params(g, ps);

    SUBCASE("bad magic") {
        bytes[0] = 'X';
        CHECK_THROWS_WITH_AS(load_params(bytes, g), doctest::Contains("bad magic"),
                             Error);
    }
    SUBCASE("bad version") {
        bytes[4] = 9;
        CHECK_THROWS_WITH_AS(load_params(bytes, g), doctest::Contains("version"),
                             Error);
    }
    SUBCASE("truncated") {
        bytes.pop_back();
        CHECK_THROWS_WITH_AS(load_params(bytes, g), doctest::Contains("truncated"),
                             Error);
    }
    SUBCASE("trailing bytes") {
        bytes.push_back(0);
        CHECK_THROWS_WITH_AS(load_params(bytes, g), doctest::Contains("trailing"),
                             Error);
    }
}

TEST_CASE("parameter containers round-trip on random networks") {
    testgen::Rng rng(211);
    for (int i = 0; i < 40; ++i) {
        const ModelGraph g = testgen::random_graph(rng);
        const ParamSet ps = testgen::random_params(rng, g);
        const ParamSet back = load_params(save_params(g, ps), g);
        REQUIRE(back.layers.size() == ps.layers.size());
        for (size_t l = 0; l < ps.layers.size(); ++l) {
            REQUIRE(back.layers[l].weights == ps.layers[l].weights);
            REQUIRE(back.layers[l].bias == ps.layers[l].bias);
        }
    }
}

TEST_CASE("load_params element counts equal the closed form") {
    testgen::Rng rng(213);
    for (int i = 0; i < 20; ++i) {
        const ModelGraph g = testgen::random_graph(rng);
        const ParamSet ps = load_params(save_params(g, testgen::random_params(rng, g)), g);
        for (size_t l = 0; l < g.layers.size(); ++l) {
            const LayerSpec& spec = g.layers[l];
            const int64_t expect =
                spec.kind == LayerKind::AvgPool
                    ? 0
                    : int64_t(spec.c_out) * spec.k_y * spec.k_x * spec.c_in;
            REQUIRE(int64_t(ps.layers[l].weights.size()) == expect);
        }
    }
}

TEST_CASE("tensor containers round-trip and validate") {
    testgen::Rng rng(217);
    for (int i = 0; i < 30; ++i) {
        const FxFormat fmt = (i % 3 == 0) ? binary_format()
                                          : FxFormat{testgen::pick(rng, 2, 16), 0};
        const QTensor t = testgen::random_tensor(rng, testgen::pick(rng, 1, 6),
                                                 testgen::pick(rng, 1, 6),
                                                 testgen::pick(rng, 1, 6), fmt);
        REQUIRE(load_tensor(save_tensor(t)) == t);
    }

    SUBCASE("bad magic") {
        QTensor t = QTensor::zeros(1, 1, 1, FxFormat{8, 0});
        std::vector<uint8_t> bytes = save_tensor(t);
        bytes[1] = 'x';
        CHECK_THROWS_AS(load_tensor(bytes), Error);
    }
    SUBCASE("short payload") {
        QTensor t = QTensor::zeros(2, 2, 1, FxFormat{8, 0});
        std::vector<uint8_t> bytes = save_tensor(t);
        bytes.resize(bytes.size() - 2);
        CHECK_THROWS_WITH_AS(load_tensor(bytes), doctest::Contains("truncated"),
                             Error);
    }
}
