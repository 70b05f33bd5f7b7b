#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bbarena/netmod/io.hpp"
#include "bbarena/netmod/model.hpp"
#include "bbarena/netmod/train.hpp"
#include "bbarena/numkit/error.hpp"

using namespace bbarena;
using namespace bbarena::netmod;

namespace {

Dataset small_blobs(std::uint64_t seed = 3) {
    BlobOptions opts;
    opts.spread = 0.05;
    return make_blobs(8, 3, 300, 0.6, seed, opts);
}

}  // namespace

TEST_CASE("forward pass of a hand-built network") {
    DenseLayer l1{2, 2, {1, -1, 0.5, 0.5}, {0, -1}};
    DenseLayer l2{2, 2, {1, 0, 0, 2}, {0.1, 0}};
    const MlpModel m = MlpModel::from_layers({l1, l2});
    // hidden = relu([1-2, 0.5+1-1]) = [0, 0.5]; out = [0.1, 1.0]
    const auto out = m.forward(std::vector<double>{1.0, 2.0});
    CHECK(out[0] == doctest::Approx(0.1));
    CHECK(out[1] == doctest::Approx(1.0));
    CHECK(argmax(out) == 1);
    CHECK(argmax(std::vector<double>{2.0, 2.0}) == 0);
    CHECK(m.parameter_count() == 12);
    CHECK_THROWS_AS(MlpModel::from_layers({l1, DenseLayer{3, 2, std::vector<double>(6), {0, 0}}}),
                    ContractViolation);
}

TEST_CASE("parameter gradients match finite differences") {
    MlpModel m = MlpModel::random({5, 4, 3}, 9);
    const std::vector<double> x{0.1, 0.7, 0.3, 0.9, 0.4};
    Gradients g(m);
    loss_and_gradient(m, x, 2, g);
    const double h = 1e-6;
    for (std::size_t l = 0; l < m.layers().size(); ++l) {
        for (std::size_t k = 0; k < m.layers()[l].weights.size(); k += 3) {
            double& w = m.layers()[l].weights[k];
            const double saved = w;
            w = saved + h;
            const double up = cross_entropy(m, x, 2);
            w = saved - h;
            const double down = cross_entropy(m, x, 2);
            w = saved;
            CHECK(g.weights[l][k] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-5));
        }
    }
}

TEST_CASE("blobs are balanced, bounded and deterministic") {
    const Dataset a = small_blobs(), b = small_blobs(), c = small_blobs(4);
    CHECK(a.size() == 300);
    CHECK(a.dim() == 8);
    std::vector<int> counts(3, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++counts[a.label(i)];
        for (double v : a.input(i)) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK(counts == std::vector<int>{100, 100, 100});
    CHECK(a.inputs() == b.inputs());
    CHECK(a.inputs() != c.inputs());
    CHECK_THROWS_AS(make_blobs(8, 3, 300, 100.0, 1), ContractViolation);
}

TEST_CASE("training reaches high accuracy and is deterministic") {
    const Dataset data = small_blobs();
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.seed = 5;
    const TrainReport r1 = train(MlpModel::random({8, 16, 3}, 5), data, cfg);
    const TrainReport r2 = train(MlpModel::random({8, 16, 3}, 5), data, cfg);
    CHECK(r1.train_accuracy > 0.95);
    CHECK(accuracy(r1.model, data) == doctest::Approx(r1.train_accuracy));
    CHECK(r1.epoch_losses.size() == 10);
    CHECK(r1.epoch_losses.back() < r1.epoch_losses.front());
    CHECK(r1.model.layers()[0].weights == r2.model.layers()[0].weights);
}

TEST_CASE("training config validation") {
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(10), ContractViolation);
    cfg = {};
    cfg.batch_size = 11;
    CHECK_THROWS_AS(cfg.validate(10), ContractViolation);
    cfg = {};
    CHECK_THROWS_AS(gf_finetune(MlpModel::random({8, 3}, 1), small_blobs(), cfg), ContractViolation);
    cfg.schedule = LrSchedule::Cyclic;
    CHECK(cfg.rate_at(0, 100) == doctest::Approx(cfg.learning_rate / 10).epsilon(0.05));
    CHECK(cfg.rate_at(50, 100) == doctest::Approx(cfg.learning_rate).epsilon(0.05));
    CHECK(parse_schedule("cyclic") == LrSchedule::Cyclic);
    CHECK_THROWS(parse_schedule("bogus"));
}

TEST_CASE("noisy accuracy degrades with noise") {
    const Dataset data = small_blobs();
    TrainConfig cfg;
    cfg.epochs = 10;
    const MlpModel m = train(MlpModel::random({8, 16, 3}, 2), data, cfg).model;
    RngStream r0(1, 0), r1(1, 0);
    CHECK(accuracy(m, data, 0.0, r0) == accuracy(m, data));
    CHECK(r0.counter() == 0);
    CHECK(accuracy(m, data, 2.0, r1) < accuracy(m, data));
}

TEST_CASE("model and dataset files round-trip exactly") {
    const MlpModel m = MlpModel::random({6, 5, 4}, 12);
    std::stringstream buf;
    write_model(buf, m);
    const MlpModel back = read_model(buf);
    CHECK(back.layer_dims() == m.layer_dims());
    for (std::size_t l = 0; l < m.layers().size(); ++l) {
        CHECK(back.layers()[l].weights == m.layers()[l].weights);
        CHECK(back.layers()[l].bias == m.layers()[l].bias);
    }

    const Dataset data = small_blobs();
    std::stringstream csv;
    write_dataset_csv(csv, data);
    const Dataset d2 = read_dataset_csv(csv, "copy");
    CHECK(d2.inputs() == data.inputs());
    CHECK(d2.labels() == data.labels());
    CHECK(d2.num_classes() == 3);
}

TEST_CASE("malformed files are rejected") {
    std::stringstream bad_model("MODELv2\n2 2\n");
    CHECK_THROWS(read_model(bad_model));
    std::stringstream bad_csv("label,f0\n0,0.5\n1\n");
    CHECK_THROWS(read_dataset_csv(bad_csv, "bad"));
    std::stringstream out_of_range("label,f0\n0,1.5\n");
    CHECK_THROWS(read_dataset_csv(out_of_range, "bad"));
    CHECK_THROWS(load_model("/nonexistent/model.txt"));
}

TEST_CASE("shuffled indices are a permutation") {
    RngStream r(2, 2);
    auto idx = shuffled_indices(50, r);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i = 0; i < 50; ++i) CHECK(idx[i] == i);
}
