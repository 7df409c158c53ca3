#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "swdo/dataset.hpp"
#include "swdo/minimodel.hpp"

using namespace swdo;

namespace {

LabeledImage image_of(const Plane<double>& p, int label)
{
    LabeledImage li;
    li.pixels.channels.push_back(p);
    li.label = label;
    return li;
}

std::vector<LabeledImage> random_batch(std::uint64_t seed, int channels, int size, int n)
{
    RngStream rng(seed, 0);
    std::vector<LabeledImage> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < channels; ++c)
            out[i].pixels.channels.push_back(Plane<double>::NullaryExpr(size, size, [&] { return rng.uniform(); }));
        out[i].label = i % 2;
    }
    return out;
}

// Class 0 pixels lie in [0.05, 0.45], class 1 in [0.55, 0.95]; the mean pixel separates them.
std::vector<LabeledImage> separable_set(std::size_t n, std::uint64_t seed)
{
    RngStream rng(seed, 0);
    std::vector<LabeledImage> out;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = static_cast<int>(i % 2);
        const double lo = y == 0 ? 0.05 : 0.55;
        out.push_back(image_of(Plane<double>::NullaryExpr(16, 16, [&] { return rng.uniform(lo, lo + 0.4); }), y));
    }
    return out;
}

ModelConfig small_config(int kernel = 3)
{
    ModelConfig c;
    c.filters_size = 4;
    c.kernel_size = kernel;
    c.lr = 0.03;
    c.batch_size = 16;
    c.epochs = 3;
    return c;
}

} // namespace

TEST_CASE("config helpers")
{
    CHECK(nearest_odd(4.0) == 5);
    CHECK(nearest_odd(3.2) == 3);
    CHECK(nearest_odd(6.9) == 7);
    ModelConfig c;
    c.kernel_size = 4;
    CHECK(normalized(c).kernel_size == 5);
    CHECK_THROWS_AS(validate(c), ConfigError);
    CHECK_NOTHROW(validate(ModelConfig{}));

    auto tiny = small_config();
    CHECK_THROWS_AS(validate(tiny), ConfigError);
    CHECK_NOTHROW(validate(tiny, true));
    tiny.lr = -1.0;
    CHECK_THROWS_AS(validate(tiny, true), ConfigError);

    CHECK(describe(ModelConfig{}).find("filters=64") != std::string::npos);
}

TEST_CASE("layer dimensions")
{
    const auto d = layer_dims(small_config(3), ModelShape{1, 32, 32, 4});
    CHECK(d.conv_rows == 30);
    CHECK(d.crop_rows == 30);
    CHECK(d.band_rows == 15);
    CHECK(d.tokens == 225);
    CHECK(d.token_width == 16);
    const auto odd = layer_dims(small_config(5), ModelShape{1, 8, 9, 2});
    CHECK(odd.conv_rows == 4);
    CHECK(odd.conv_cols == 5);
    CHECK(odd.crop_cols == 4);
    CHECK(odd.tokens == 4);
    CHECK_THROWS(layer_dims(small_config(9), ModelShape{1, 8, 8, 2}));
}

TEST_CASE("convolution")
{
    Plane<double> p(2, 2);
    p << 1, 2, 3, 4;
    Eigen::MatrixXd diag(4, 1);
    diag << 1, 0, 0, 1;
    const auto out = conv2d_valid({p}, diag, Eigen::VectorXd::Zero(1), 2);
    REQUIRE(out.size() == 1);
    REQUIRE(out[0].size() == 1);
    CHECK(out[0](0, 0) == 5.0);

    RngStream rng(5, 5);
    const Plane<double> q = Plane<double>::NullaryExpr(6, 7, [&] { return rng.uniform(); });
    const auto id = conv2d_valid({q}, Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1), 1);
    CHECK(id[0] == q);
    const auto zero = conv2d_valid({q}, Eigen::MatrixXd::Zero(9, 2), Eigen::VectorXd::Zero(2), 3);
    CHECK(zero.size() == 2);
    CHECK(zero[1].isZero(0.0));
    CHECK(zero[1].rows() == 4);
    CHECK_THROWS(conv2d_valid({q}, Eigen::MatrixXd::Zero(49, 1), Eigen::VectorXd::Zero(1), 7));

    // Kernel row layout c*k*k + u*k + v, checked against a direct loop.
    const std::vector<Plane<double>> two{q, q.array().square().matrix()};
    const Eigen::MatrixXd K = Eigen::MatrixXd::NullaryExpr(18, 3, [&] { return rng.uniform(-1.0, 1.0); });
    const Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(3, [&] { return rng.uniform(); });
    const auto got = conv2d_valid(two, K, b, 3);
    for (int f = 0; f < 3; ++f)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 5; ++j) {
                double s = b[f];
                for (int c = 0; c < 2; ++c)
                    for (int u = 0; u < 3; ++u)
                        for (int v = 0; v < 3; ++v)
                            s += K(c * 9 + u * 3 + v, f) * two[c](i + u, j + v);
                CHECK(got[f](i, j) == doctest::Approx(s).epsilon(1e-13));
            }
}

TEST_CASE("crop to even size")
{
    CHECK(crop_even(Plane<double>::Ones(5, 7)).rows() == 4);
    CHECK(crop_even(Plane<double>::Ones(5, 7)).cols() == 6);
    CHECK(crop_even(Plane<double>::Ones(4, 4)).size() == 16);
}

TEST_CASE("attention")
{
    RngStream rng(2, 7);
    const Eigen::MatrixXd tokens = Eigen::MatrixXd::NullaryExpr(6, 8, [&] { return rng.uniform(-1.0, 1.0); });
    const Eigen::MatrixXd wv = Eigen::MatrixXd::NullaryExpr(8, 3, [&] { return rng.uniform(-1.0, 1.0); });
    const auto uniform = attention_forward(tokens, Eigen::MatrixXd::Zero(8, 3), Eigen::MatrixXd::Zero(8, 3), wv);
    CHECK((uniform.attn.array() - 1.0 / 6.0).abs().maxCoeff() < 1e-15);
    const Eigen::RowVectorXd mean = uniform.v.colwise().mean();
    for (int t = 0; t < 6; ++t)
        CHECK((uniform.out.row(t) - mean).cwiseAbs().maxCoeff() < 1e-14);

    const auto single = attention_forward(tokens.topRows(1), wv, wv, wv);
    CHECK(single.attn(0, 0) == 1.0);

    const Eigen::MatrixXd wq = Eigen::MatrixXd::NullaryExpr(8, 3, [&] { return rng.uniform(-3.0, 3.0); });
    const auto r = attention_forward(tokens, wq, wv, wv);
    CHECK((r.attn.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK((r.attn.array() >= 0.0).all());
}

TEST_CASE("forward with zero weights is undecided")
{
    const auto c = small_config();
    const auto batch = random_batch(1, 1, 8, 4);
    const auto w = zero_weights(c, ModelShape{1, 8, 8, 2});
    for (double p : forward(c, w, batch))
        CHECK(p == 0.5);
}

TEST_CASE("cross-entropy")
{
    const auto c = small_config();
    const auto w = zero_weights(c, ModelShape{1, 8, 8, 2});
    const std::vector<double> half{0.5}, sure{1.0 - 1e-7}, pair{0.5, 0.5};
    const std::vector<int> one{1}, both{0, 1};
    CHECK(bce_loss(half, one, c, w) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(bce_loss(sure, one, c, w) == doctest::Approx(1e-7).epsilon(1e-6));
    CHECK(bce_loss(pair, both, c, w) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("regularization gradient")
{
    auto c = small_config();
    c.l2_reg = 3e-3;
    c.l1_reg = 2e-3;
    c.att_reg_weight = 5e-3;
    auto plain = c;
    plain.l2_reg = plain.l1_reg = plain.att_reg_weight = 0.0;
    const ModelShape s{1, 8, 8, 2};
    const auto w = init_weights(c, s, 4);
    const auto batch = random_batch(2, 1, 8, 3);
    const auto with = backward(c, w, batch).grad;
    const auto without = backward(plain, w, batch).grad;
    const auto reg = [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
        return 2.0 * c.l2_reg * x.array() + c.l1_reg * x.array().sign();
    };
    CHECK((with.conv_kernels - without.conv_kernels - reg(w.conv_kernels)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((with.dense - without.dense - reg(w.dense)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((with.wq - without.wq - 2.0 * c.att_reg_weight * w.wq).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((with.conv_bias - without.conv_bias).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(with.dense_bias == doctest::Approx(without.dense_bias).epsilon(1e-15));
}

TEST_CASE("dense bias gradient on a blank batch")
{
    const auto c = small_config();
    const ModelShape s{1, 8, 8, 2};
    std::vector<LabeledImage> batch{image_of(Plane<double>::Zero(8, 8), 0), image_of(Plane<double>::Zero(8, 8), 0)};
    const auto g = backward(c, zero_weights(c, s), batch);
    CHECK(g.grad.dense_bias == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("analytic gradients match finite differences")
{
    RngStream rng(9, 9);
    for (int t = 0; t < 3; ++t) {
        auto c = small_config(t == 0 ? 3 : 5);
        c.l2_reg = 1e-3;
        c.l1_reg = 1e-3;
        c.att_reg_weight = 1e-3;
        const ModelShape s{t + 1, 8, 8, 2 + t};
        const auto w = init_weights(c, s, rng());
        const auto err = gradient_check(c, w, random_batch(rng(), s.channels, 8, 3));
        for (std::size_t g = 0; g < err.size(); ++g) {
            CAPTURE(weight_group_names[g]);
            CHECK(err[g] < 1e-6);
        }
    }
}

TEST_CASE("pack and unpack round trip")
{
    const auto c = small_config();
    const auto w = init_weights(c, ModelShape{2, 8, 8, 3}, 12);
    const auto flat = pack(w);
    Eigen::Index total = 0;
    for (auto n : group_sizes(w))
        total += n;
    CHECK(flat.size() == total);
    auto back = zero_weights(c, ModelShape{2, 8, 8, 3});
    unpack(flat, back);
    CHECK(back == w);
}

TEST_CASE("learning-rate schedule")
{
    CHECK(lr_schedule(0, 1e-3) == 1e-3);
    CHECK(lr_schedule(10, 1e-3) == doctest::Approx(5.987369392383787e-4).epsilon(1e-12));
    for (int e = 1; e < 30; ++e)
        CHECK(lr_schedule(e, 0.1) < lr_schedule(e - 1, 0.1));
    CHECK_THROWS(lr_schedule(-1, 0.1));
}

TEST_CASE("training separates a linearly separable set")
{
    const auto data = separable_set(400, 3);
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto split = train_val_split(idx, seed);
        const auto tr = gather(data, split.train), va = gather(data, split.val);
        auto c = small_config(5);
        c.epochs = 6;
        const auto a = train(c, tr, va, seed);
        REQUIRE(a.history.size() == 6);
        CHECK(a.history.back().train_accuracy >= 0.95);
        CHECK(a.best_val_accuracy >= 0.95);
        const auto b = train(c, tr, va, seed);
        CHECK(a.weights == b.weights);
        CHECK(a.history.back().train_loss == b.history.back().train_loss);
    }
    CHECK_THROWS(train(small_config(), std::vector<LabeledImage>{}, data, 1));
}

TEST_CASE("loss drops over the first epoch at a small learning rate")
{
    const auto data = separable_set(400, 5);
    auto c = small_config(5);
    c.lr = 1e-3;
    c.epochs = 1;
    std::vector<int> labels;
    for (const auto& d : data)
        labels.push_back(d.label);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto w0 = init_weights(c, shape_of(data), hash_combine({seed, 1}));
        const double before = bce_loss(forward(c, w0, data), labels, c, w0);
        const auto r = train(c, data, data, seed);
        const double after = bce_loss(forward(c, r.weights, data), labels, c, r.weights);
        CHECK(after < before);
    }
}

TEST_CASE("weights survive a save and load")
{
    const auto c = small_config();
    const ModelShape s{1, 8, 8, 2};
    const auto w = init_weights(c, s, 99);
    const auto dir = std::filesystem::temp_directory_path() / "swdo_weights_test";
    std::filesystem::create_directories(dir);
    save_weights(dir / "m", w, c, s, 99);
    const auto loaded = load_weights(dir / "m");
    CHECK(loaded.weights == w);
    CHECK(loaded.config == c);
    CHECK(loaded.seed == 99);
    CHECK(loaded.shape.attention_dim == 2);

    std::ofstream(dir / "m.bin", std::ios::binary | std::ios::trunc) << "short";
    CHECK_THROWS(load_weights(dir / "m"));
    std::filesystem::remove_all(dir);
}
