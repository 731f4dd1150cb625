#include "doctest.h"

#include "nnfl/errors.hpp"
#include "nnfl/model.hpp"
#include "nnfl/quant.hpp"
#include "nnfl/shadow.hpp"
#include "nnfl/train.hpp"
#include "toy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

using namespace nnfl;

namespace {

// Independent reference: plain loops over the shadow arrays, loss from the
// textbook -log(exp(z_y) / sum exp(z)).
double naive_loss(const ShadowModel &m, const std::vector<double> &x, std::size_t label) {
    std::vector<double> a = x;
    for (const auto &l : m.layers) {
        std::vector<double> z(l.out_dim);
        for (std::size_t o = 0; o < l.out_dim; ++o) {
            double s = l.biases[o];
            for (std::size_t i = 0; i < l.in_dim; ++i)
                s += l.weights[o * l.in_dim + i] * a[i];
            z[o] = l.relu ? std::max(0.0, s) : s;
        }
        a = z;
    }
    double denom = 0.0;
    for (double z : a)
        denom += std::exp(z);
    return -std::log(std::exp(a[label]) / denom);
}

// Gradients below 1e-6 are under the roundoff floor of a central difference
// with h = 1e-5 on losses of order 10, so they are compared against that floor.
double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

} // namespace

TEST_CASE("tensor invariants") {
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), ContractViolation);
    CHECK_THROWS_AS(Tensor({1}, {std::nan("")}), ContractViolation);
    CHECK_THROWS_AS(Tensor({0}, {}), ContractViolation);
    const Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.size() == 6);
}

TEST_CASE("quantize examples") {
    const std::vector<double> v{1.0, -1.0};
    const auto q = quantize(v);
    CHECK(q.q == std::vector<std::int8_t>{127, -127});
    CHECK(q.scale == doctest::Approx(1.0 / 127.0).epsilon(1e-15));

    const auto z = quantize(std::vector<double>{0.0, 0.0});
    CHECK(z.scale == 1.0);
    CHECK(z.q == std::vector<std::int8_t>{0, 0});

    CHECK(round_half_away(2.5) == 3);
    CHECK(round_half_away(-2.5) == -3);
    CHECK(round_half_away(0.49999) == 0);
}

TEST_CASE("quantize(dequantize(q)) is identity on [-127,127]") {
    for (double scale : {1.0 / 127.0, 0.013, 3.7}) {
        std::vector<std::int8_t> all;
        for (int q = -127; q <= 127; ++q)
            all.push_back(static_cast<std::int8_t>(q));
        const auto back = quantize_with_scale(dequantize(all, scale), scale);
        CHECK(back == all);
    }
}

TEST_CASE("quantization round-trip error is at most scale/2 and never yields -128") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(1 + uniform_index(rng, 50));
        const double mag = std::pow(10.0, -3.0 + 5.0 * uniform01(rng));
        for (double &x : v)
            x = mag * (2.0 * uniform01(rng) - 1.0);
        const auto q = quantize(v);
        const auto back = dequantize(q.q, q.scale);
        for (std::size_t i = 0; i < v.size(); ++i) {
            CHECK(std::abs(back[i] - v[i]) <= q.scale / 2 * (1 + 1e-12));
            CHECK(q.q[i] != -128);
        }
    }
}

TEST_CASE("bias quantization saturates at int32 range") {
    CHECK(quantize_bias(1e30, 1.0) == std::numeric_limits<std::int32_t>::max());
    CHECK(quantize_bias(-1e30, 1.0) == std::numeric_limits<std::int32_t>::min());
    CHECK(quantize_bias(2.5, 1.0) == 3);
}

TEST_CASE("softmax examples and stability") {
    const auto p = softmax(std::vector<double>{0.0, 0.0});
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));

    const auto big = softmax(std::vector<double>{1000.0, 0.0});
    CHECK(std::isfinite(big[0]));
    CHECK(big[0] == doctest::Approx(1.0));
    CHECK(big[1] < 1e-300);

    CHECK_THROWS_AS(softmax(std::vector<double>{std::numeric_limits<double>::infinity(), 0.0}), ContractViolation);
}

TEST_CASE("softmax preserves argmax and sums to one") {
    Rng rng(2024);
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> z(2 + uniform_index(rng, 12));
        for (double &v : z)
            v = 40.0 * (2.0 * uniform01(rng) - 1.0);
        const auto p = softmax(z);
        CHECK(argmax(p) == argmax(z));
        const double sum = std::accumulate(p.begin(), p.end(), 0.0);
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        for (double v : p)
            CHECK(v > 0.0);
    }
}

TEST_CASE("argmax ties break to lowest index") {
    CHECK(argmax(std::vector<double>{0.1, 0.9, 0.3}) == 1);
    CHECK(argmax(std::vector<double>{0.5, 0.5, 0.5}) == 0);
    CHECK(argmax(std::vector<double>{0.1, 0.7, 0.7}) == 1);
}

TEST_CASE("cross entropy") {
    CHECK(cross_entropy(std::vector<double>{0.0, 0.0}, 0) == doctest::Approx(std::log(2.0)));
    CHECK(cross_entropy(std::vector<double>{50.0, 0.0, 0.0}, 0) < 1e-20);
    CHECK_THROWS_AS(cross_entropy(std::vector<double>{0.0, 0.0}, 2), ContractViolation);

    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> z(3 + uniform_index(rng, 5));
        for (double &v : z)
            v = 6.0 * (2.0 * uniform01(rng) - 1.0);
        const std::size_t y = uniform_index(rng, z.size());
        double denom = 0.0;
        for (double v : z)
            denom += std::exp(v);
        CHECK(cross_entropy(z, y) == doctest::Approx(-std::log(std::exp(z[y]) / denom)).epsilon(1e-12));
    }
}

TEST_CASE("forward: zero network and single weight") {
    const Model zero = toy::zero_model(4, 3);
    InputImage img{{10, 20, 30, 255}, 1};
    DirectReader reader;
    const Tensor logits = forward(zero, img, reader);
    for (double v : logits.data())
        CHECK(v == 0.0);
    CHECK(predict(zero, img) == 0);

    Model one;
    one.input_dim = 1;
    DenseLayer l;
    l.in_dim = 1;
    l.out_dim = 2;
    l.weights_q = {127, 0};
    l.bias_q = {0, 0};
    l.w_scale = 1.0 / 127.0;
    one.layers.push_back(l);
    const Tensor y = forward(one, InputImage{{255}, 0}, reader);
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(y[1] == 0.0);
}

TEST_CASE("forward rejects dimension mismatch and invalid models") {
    const Model zero = toy::zero_model(4, 3);
    DirectReader reader;
    CHECK_THROWS_AS(forward(zero, InputImage{{1, 2, 3}, 0}, reader), ContractViolation);

    Model bad = zero;
    bad.layers[0].bias_q.pop_back();
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
    Model one_class = toy::zero_model(4, 1);
    CHECK_THROWS_AS(one_class.validate(), ContractViolation);
}

TEST_CASE("predict is deterministic") {
    Rng rng(3);
    const Model m = toy::random_model({6, 5, 3}, rng);
    const InputImage img = toy::random_input(6, 0, rng);
    DirectReader reader;
    const auto first = predict(m, img, reader);
    for (int i = 0; i < 5; ++i)
        CHECK(predict(m, img, reader) == first);
}

TEST_CASE("backward: zero network output bias gradient is softmax - onehot") {
    const Model zero = toy::zero_model(5, 4);
    const InputImage img{{1, 2, 3, 4, 5}, 2};
    const auto g = backward(zero, img, 2);
    for (std::size_t c = 0; c < 4; ++c)
        CHECK(g.biases[0][c] == doctest::Approx(0.25 - (c == 2 ? 1.0 : 0.0)));
    CHECK(g.loss == doctest::Approx(std::log(4.0)));
}

TEST_CASE("backward matches central finite differences on random small nets") {
    Rng rng(77);
    const double h = 1e-5;
    double worst = 0.0;
    for (int net = 0; net < 20; ++net) {
        const std::size_t d = 3 + uniform_index(rng, 4);
        const std::size_t hidden = 2 + uniform_index(rng, 5);
        const std::size_t classes = 2 + uniform_index(rng, 3);
        std::vector<std::size_t> dims{d, hidden};
        if (net % 2 == 1)
            dims.push_back(2 + uniform_index(rng, 4));
        dims.push_back(classes);
        const Model q = toy::random_model(dims, rng);
        ShadowModel m = to_shadow(q);
        std::vector<double> x(d);
        for (double &v : x)
            v = uniform01(rng);
        const std::size_t y = uniform_index(rng, classes);

        const auto g = backward(m, x, y);
        CHECK(g.loss == doctest::Approx(naive_loss(m, x, y)).epsilon(1e-10));

        for (std::size_t li = 0; li < m.layers.size(); ++li) {
            for (std::size_t k = 0; k < m.layers[li].weights.size(); ++k) {
                const double orig = m.layers[li].weights[k];
                m.layers[li].weights[k] = orig + h;
                const double up = naive_loss(m, x, y);
                m.layers[li].weights[k] = orig - h;
                const double down = naive_loss(m, x, y);
                m.layers[li].weights[k] = orig;
                worst = std::max(worst, rel_err((up - down) / (2 * h), g.weights[li][k]));
            }
            for (std::size_t k = 0; k < m.layers[li].biases.size(); ++k) {
                const double orig = m.layers[li].biases[k];
                m.layers[li].biases[k] = orig + h;
                const double up = naive_loss(m, x, y);
                m.layers[li].biases[k] = orig - h;
                const double down = naive_loss(m, x, y);
                m.layers[li].biases[k] = orig;
                worst = std::max(worst, rel_err((up - down) / (2 * h), g.biases[li][k]));
            }
        }
        for (std::size_t i = 0; i < d; ++i) {
            auto xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            worst = std::max(worst, rel_err((naive_loss(m, xp, y) - naive_loss(m, xm, y)) / (2 * h), g.input[i]));
        }
    }
    CHECK(worst <= 1e-3);
}

TEST_CASE("backward: pixel with all-zero weight column has zero gradient") {
    Rng rng(8);
    Model m = toy::random_model({5, 4, 3}, rng);
    for (std::size_t o = 0; o < 4; ++o)
        m.layers[0].weights_q[o * 5 + 2] = 0;
    const auto g = backward(m, toy::random_input(5, 1, rng), 1);
    CHECK(g.input[2] == 0.0);
}

TEST_CASE("saliency ranking") {
    Rng rng(12);
    Model m = toy::random_model({8, 6, 3}, rng);
    for (std::size_t o = 0; o < 6; ++o)
        m.layers[0].weights_q[o * 8 + 5] = 0;
    const InputImage img = toy::random_input(8, 0, rng);

    const auto top = saliency_rank(m, img, 4);
    CHECK(top.size() == 4);
    CHECK(std::find(top.begin(), top.end(), 5) == top.end());

    auto all = saliency_rank(m, img, 8);
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(all[i] == i);

    CHECK_THROWS_AS(saliency_rank(m, img, 9), ContractViolation);
}

TEST_CASE("activation faults") {
    Rng rng(21);
    const Model m = toy::random_model({6, 5, 3}, rng);
    const InputImage img = toy::random_input(6, 0, rng);
    DirectReader reader;
    const auto clean = forward(m, img, reader);

    // Disabling every hidden neuron leaves only the output biases.
    std::vector<ActivationFault> all;
    for (std::size_t n = 0; n < 5; ++n)
        all.push_back({0, n, std::nullopt});
    const auto off = forward(m, img, reader, all);
    for (std::size_t c = 0; c < 3; ++c)
        CHECK(off[c] == doctest::Approx(m.layers[1].b_scale * m.layers[1].bias_q[c]));

    // Resetting a bit that is already clear (code 0 under a huge scale) changes nothing.
    const ActivationFault set_top{0, 0, ActivationFault::CodeFault{FaultKind::BitReset, 7, 1e9}};
    CHECK(forward(m, img, reader, std::vector{set_top}) == clean);

    CHECK_THROWS_AS(forward(m, img, reader, std::vector{ActivationFault{1, 0, std::nullopt}}), ContractViolation);
}

TEST_CASE("train_sgd: memorizes a single example") {
    Dataset one;
    one.dim = 4;
    one.samples.push_back({{10, 200, 30, 90}, 1});
    Architecture arch;
    arch.hidden = {4};
    arch.num_classes = 3;
    TrainConfig cfg;
    cfg.epochs = 50;
    const auto r = train_sgd(one, arch, cfg);
    CHECK(r.train_accuracy == 1.0);
}

TEST_CASE("train_sgd: empty dataset and bad config are rejected") {
    Dataset empty;
    empty.dim = 4;
    CHECK_THROWS_AS(train_sgd(empty, Architecture{}, TrainConfig{}), ContractViolation);
    Dataset one;
    one.dim = 2;
    one.samples.push_back({{1, 2}, 0});
    TrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(train_sgd(one, Architecture{}, cfg), ContractViolation);
}

TEST_CASE("train_sgd: fixed seed gives identical models") {
    io::BlobConfig blobs;
    blobs.count = 200;
    blobs.dim = 16;
    blobs.classes = 4;
    const auto data = io::generate_blobs(blobs);
    Architecture arch;
    arch.hidden = {8};
    arch.num_classes = 4;
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 42;
    CHECK(train_sgd(data, arch, cfg).model == train_sgd(data, arch, cfg).model);
}

TEST_CASE("train_sgd: toy blobs reach 90% test accuracy") {
    const auto start = std::chrono::steady_clock::now();
    const auto &s = toy::setup();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    MESSAGE("toy model: train acc " << s.trained.train_accuracy << ", test acc " << s.trained.test_accuracy
                                    << ", " << secs << " s");
    CHECK(s.trained.test_accuracy >= 0.90);
    CHECK(secs < 60.0);
    CHECK(s.data.train.size() == 800);
    CHECK(s.data.test.size() == 200);
}
