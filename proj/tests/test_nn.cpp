#include <doctest.h>

#include <cmath>
#include <cstring>

#include "artlab/error.hpp"
#include "artlab/losses.hpp"
#include "artlab/mlp.hpp"
#include "artlab/trainer.hpp"
#include "test_util.hpp"

using namespace artlab;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(r, c);
    for (auto& v : m.values()) v = rng.normal();
    return m;
}

double loss_at(const MlpModel& model, const Matrix& x, const std::vector<Label>& y, const LossSpec& spec, int epoch) {
    return evaluate_loss(spec, forward(model, x), y, epoch).mean;
}

// Max relative error of analytic vs central-difference gradients.
double gradient_error(const LossSpec& spec, int epoch, std::uint64_t seed) {
    MlpModel model = init_mlp({4, 6, 3}, seed);
    // Non-zero biases so the check also covers them.
    Rng rng(seed + 1);
    for (std::size_t l = 0; l < model.layers().size(); ++l)
        for (auto& b : model.bias(l)) b = 0.1 * rng.normal();
    const Matrix x = random_matrix(5, 4, seed + 2);
    const std::vector<Label> y{0, 1, 2, 1, 0};
    const auto analytic = backward(model, x, y, spec, epoch).grads;
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t i = 0; i < model.parameter_count(); ++i) {
        if (std::abs(analytic[i]) <= 1e-6) continue;
        MlpModel plus = model, minus = model;
        plus.parameters()[i] += h;
        minus.parameters()[i] -= h;
        const double numeric = (loss_at(plus, x, y, spec, epoch) - loss_at(minus, x, y, spec, epoch)) / (2 * h);
        const double rel = std::abs(analytic[i] - numeric) / std::max(std::abs(analytic[i]), std::abs(numeric));
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace

TEST_CASE("init_mlp") {
    const MlpModel m = init_mlp({2, 1}, 11);
    CHECK(m.bias(0).size() == 1);
    CHECK(m.bias(0)[0] == 0.0);
    CHECK(init_mlp({8, 64, 2}, 1).parameter_count() == 706);

    const MlpModel a = init_mlp({8, 64, 2}, 99), b = init_mlp({8, 64, 2}, 99);
    CHECK(std::memcmp(a.parameters().data(), b.parameters().data(), a.parameter_count() * sizeof(double)) == 0);
    CHECK(init_mlp({8, 64, 2}, 100).parameters() != a.parameters());

    // He scaling: weight variance near 2 / fan_in.
    const MlpModel wide = init_mlp({200, 300, 2}, 5);
    double ss = 0;
    for (double w : wide.weights(0)) ss += w * w;
    CHECK(ss / static_cast<double>(wide.weights(0).size()) == doctest::Approx(2.0 / 200.0).epsilon(0.05));
    CHECK_THROWS_AS(init_mlp({3, 0, 2}, 1), Error);
    CHECK_THROWS_AS(init_mlp({3}, 1), Error);
}

TEST_CASE("forward") {
    MlpModel zero({3, 5, 4});
    const Matrix p = softmax(forward(zero, random_matrix(2, 3, 1)));
    for (double v : p.values()) CHECK(v == doctest::Approx(0.25));

    MlpModel identity({2, 2});
    identity.weights(0)[0] = 1;  // W stored [in][out]
    identity.weights(0)[3] = 1;
    const Matrix x = random_matrix(3, 2, 4);
    CHECK(forward(identity, x) == x);

    const MlpModel m = init_mlp({4, 16, 16, 5}, 3);
    const Matrix s = softmax(forward(m, random_matrix(10, 4, 8)));
    for (std::size_t i = 0; i < s.rows(); ++i) {
        double sum = 0;
        for (double v : s.row(i)) sum += v;
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
    CHECK_THROWS_AS(forward(m, Matrix(2, 3)), Error);
}

TEST_CASE("softmax is translation invariant") {
    Matrix z = random_matrix(4, 3, 17);
    Matrix shifted = z;
    for (std::size_t i = 0; i < 4; ++i)
        for (auto& v : shifted.row(i)) v += 100.0 * static_cast<double>(i + 1);
    const Matrix a = softmax(z), b = softmax(shifted);
    for (std::size_t i = 0; i < a.values().size(); ++i) CHECK(std::abs(a.values()[i] - b.values()[i]) <= 1e-12);
}

TEST_CASE("cross-entropy gradient on logits is softmax minus one-hot") {
    Matrix z(1, 3);
    z(0, 0) = 0.2;
    z(0, 1) = -1.0;
    z(0, 2) = 0.7;
    const std::vector<Label> y{2};
    const LossEval e = cross_entropy(z, y);
    const Matrix p = softmax(z);
    CHECK(e.grad(0, 0) == doctest::Approx(p(0, 0)));
    CHECK(e.grad(0, 1) == doctest::Approx(p(0, 1)));
    CHECK(e.grad(0, 2) == doctest::Approx(p(0, 2) - 1.0));
}

TEST_CASE("gradient check for every loss") {
    LossSpec ce;
    CHECK(gradient_error(ce, 1, 21) < 1e-4);

    LossSpec weighted;
    weighted.kind = LossKind::cost_sensitive;
    weighted.class_weights = {0.5, 2.0, 1.25};
    CHECK(gradient_error(weighted, 1, 22) < 1e-4);

    LossSpec focal;
    focal.kind = LossKind::focal;
    focal.gamma = 2.0;
    CHECK(gradient_error(focal, 1, 23) < 1e-4);
    focal.gamma = 0.5;
    CHECK(gradient_error(focal, 1, 24) < 1e-4);

    LossSpec ohem;
    ohem.kind = LossKind::ohem;
    ohem.ohem_fraction = 0.6;
    CHECK(gradient_error(ohem, 1, 25) < 1e-4);

    LossSpec ldam;
    ldam.kind = LossKind::ldam_drw;
    ldam.ldam_margins = {0.2, 0.5, 0.3};
    ldam.drw_start_epoch = 5;
    ldam.drw_priors = {0.5, 0.2, 0.3};
    CHECK(gradient_error(ldam, 1, 26) < 1e-4);
    CHECK(gradient_error(ldam, 5, 27) < 1e-4);
}

TEST_CASE("gradient vanishes at a one-parameter minimum") {
    // Single bias-only logit pair: loss over labels {0,1} is minimised at equal logits.
    MlpModel m({1, 2});
    const Matrix x(2, 1, 0.0);
    const std::vector<Label> y{0, 1};
    const auto g = backward(m, x, y, LossSpec{}).grads;
    for (double v : g) CHECK(std::abs(v) < 1e-8);
}

TEST_CASE("adamw_step") {
    TrainerConfig cfg;
    cfg.weight_decay = 0.1;
    MlpModel m = init_mlp({3, 4, 2}, 2);
    const auto before = m.parameters();
    AdamWState st = AdamWState::for_model(m, cfg);
    std::vector<double> zero(m.parameter_count(), 0.0);
    adamw_step(st, m, zero, 0.01);
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(m.parameters()[i] == doctest::Approx(before[i] * (1 - 0.01 * 0.1)));
    CHECK(st.step == 1);

    cfg.weight_decay = 0.0;
    MlpModel n = init_mlp({3, 4, 2}, 2);
    AdamWState st2 = AdamWState::for_model(n, cfg);
    std::vector<double> g(n.parameter_count(), 0.37);
    adamw_step(st2, n, g, 0.001);
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK(std::abs(n.parameters()[i] - before[i]) == doctest::Approx(0.001).epsilon(1e-6));

    std::vector<double> bad(n.parameter_count(), 0.0);
    bad[n.layers()[1].weight_offset] = std::nan("");
    try {
        adamw_step(st2, n, bad, 0.001);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
    }
}

TEST_CASE("cosine_lr") {
    CHECK(cosine_lr(0, 10, 1e-3, 1e-5) == 1e-3);
    CHECK(cosine_lr(10, 10, 1e-3, 1e-5) == 1e-5);
    CHECK(cosine_lr(5, 10, 1e-3, 1e-5) == doctest::Approx((1e-3 + 1e-5) / 2));
    double prev = 1.0;
    for (int t = 0; t <= 37; ++t) {
        const double lr = cosine_lr(t, 37, 0.5, 0.0);
        CHECK(lr <= prev);
        prev = lr;
    }
    CHECK_THROWS_AS(cosine_lr(11, 10, 1, 0), Error);
}

TEST_CASE("early stopping") {
    MlpModel m({1, 2});
    SUBCASE("monotone improvement never stops") {
        EarlyStopState s(10);
        for (double l : {1.0, 0.9, 0.8}) CHECK(s.observe(l, m) == StopDecision::proceed);
        CHECK(s.best_loss == 0.8);
    }
    SUBCASE("eleven non-improving epochs stop on the eleventh") {
        EarlyStopState s(10);
        CHECK(s.observe(1.0, m) == StopDecision::proceed);
        for (int i = 1; i <= 10; ++i) {
            CHECK(s.observe(1.0, m) == StopDecision::proceed);
            CHECK(s.epochs_since_improvement <= s.patience);
        }
        CHECK(s.observe(1.5, m) == StopDecision::stop);
    }
    SUBCASE("stop restores the best snapshot") {
        EarlyStopState s(0);
        m.parameters()[0] = 1.0;
        s.observe(0.5, m);
        m.parameters()[0] = 2.0;
        CHECK(s.observe(0.7, m) == StopDecision::stop);
        CHECK(m.parameters()[0] == 1.0);
    }
}

TEST_CASE("fit") {
    const Dataset train = testutil::blobs({40, 40}, 2, 31, 6.0);
    const Dataset val = testutil::blobs({10, 10}, 2, 32, 6.0);
    TrainerConfig cfg;
    cfg.hidden_widths = {8};
    cfg.epochs = 50;
    cfg.patience = 50;
    cfg.lr_max = 0.01;

    SUBCASE("separable blobs reach training accuracy 1") {
        cfg.lr_max = 0.05;
        Rng rng(1);
        const FitResult r = fit(init_mlp(layer_widths(2, cfg, 2), 4), train, val, LossSpec{}, cfg, rng);
        const auto pred = predict(r.model, train.features());
        CHECK(pred == train.labels());
    }
    SUBCASE("no-op hook and repeat runs are byte-identical") {
        Rng r1(1), r2(1), r3(1);
        const auto a = fit(init_mlp({2, 8, 2}, 4), train, val, LossSpec{}, cfg, r1);
        const auto b = fit(init_mlp({2, 8, 2}, 4), train, val, LossSpec{}, cfg, r2,
                           [](const EpochContext&) { return std::optional<Dataset>{}; });
        const auto c = fit(init_mlp({2, 8, 2}, 4), train, val, LossSpec{}, cfg, r3);
        CHECK(a.model.parameters() == b.model.parameters());
        CHECK(a.model.parameters() == c.model.parameters());
        REQUIRE(a.history.size() == c.history.size());
        for (std::size_t i = 0; i < a.history.size(); ++i) {
            CHECK(a.history[i].train_loss == c.history[i].train_loss);
            CHECK(a.history[i].val_loss == c.history[i].val_loss);
            CHECK(a.history[i].lr == b.history[i].lr);
        }
    }
    SUBCASE("returned model has the best recorded validation loss") {
        // Noisy overlapping blobs and a high rate so validation loss turns up early.
        const Dataset noisy = testutil::blobs({60, 60}, 2, 41, 1.0);
        const Dataset nval = testutil::blobs({20, 20}, 2, 42, 1.0);
        cfg.hidden_widths = {64};
        cfg.patience = 3;
        cfg.epochs = 200;
        cfg.lr_max = 0.05;
        Rng rng(2);
        const auto r = fit(init_mlp({2, 64, 2}, 5), noisy, nval, LossSpec{}, cfg, rng);
        CHECK(r.stopped_early);
        double best = 1e300;
        for (const auto& h : r.history) best = std::min(best, h.val_loss);
        CHECK(r.history[static_cast<std::size_t>(r.best_epoch - 1)].val_loss == best);
        const double again = cross_entropy(forward(r.model, nval.features()), nval.labels()).mean;
        CHECK(again == doctest::Approx(best).epsilon(1e-12));
    }
    SUBCASE("errors") {
        Rng rng(1);
        CHECK_THROWS_AS(fit(init_mlp({2, 2}, 1), Dataset(Matrix(0, 2), {}, 2), val, LossSpec{}, cfg, rng), Error);
        LossSpec ldam;
        ldam.kind = LossKind::ldam_drw;
        ldam.ldam_margins = {0.5, 0.5};
        ldam.drw_priors = {1.0, 0.0};
        CHECK_THROWS_AS(fit(init_mlp({2, 2}, 1), testutil::blobs({10, 0}, 2, 1), val, ldam, cfg, rng), Error);
    }
}
