#include "swdo/minimodel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "swdo/format.hpp"
#include "swdo/rng.hpp"

namespace swdo {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

int nearest_odd(double k)
{
    const double r = std::floor(k + 0.5);
    const auto i = static_cast<int>(r);
    return i % 2 == 0 ? i + 1 : i;
}

ModelConfig normalized(ModelConfig c)
{
    c.kernel_size = nearest_odd(c.kernel_size);
    return c;
}

namespace {

void check_range(const char* name, double v, double lo, double hi)
{
    if (!(v >= lo && v <= hi)) {
        std::ostringstream os;
        os << "ModelConfig: " << name << " = " << format_double(v) << " outside [" << format_double(lo) << ", "
           << format_double(hi) << "]";
        throw ConfigError(os.str());
    }
}

} // namespace

void validate(const ModelConfig& c, bool desk_scale)
{
    if (c.kernel_size % 2 == 0)
        throw ConfigError("ModelConfig: kernel_size must be odd");
    if (desk_scale) {
        constexpr double inf = std::numeric_limits<double>::infinity();
        check_range("filters_size", c.filters_size, 1, inf);
        check_range("kernel_size", c.kernel_size, 1, inf);
        check_range("lr", c.lr, std::numeric_limits<double>::min(), inf);
        check_range("l2_reg", c.l2_reg, 0, inf);
        check_range("l1_reg", c.l1_reg, 0, inf);
        check_range("batch_size", c.batch_size, 1, inf);
        check_range("epochs", c.epochs, 1, inf);
        check_range("att_reg_weight", c.att_reg_weight, 0, inf);
        return;
    }
    check_range("filters_size", c.filters_size, 64, 256);
    check_range("kernel_size", c.kernel_size, 3, 9);
    check_range("lr", c.lr, 1e-5, 1e-2);
    check_range("l2_reg", c.l2_reg, 1e-5, 1e-2);
    check_range("l1_reg", c.l1_reg, 1e-5, 1e-2);
    check_range("batch_size", c.batch_size, 16, 128);
    check_range("epochs", c.epochs, 10, 100);
    check_range("att_reg_weight", c.att_reg_weight, 1e-5, 1e-3);
}

std::string describe(const ModelConfig& c)
{
    std::ostringstream os;
    os << "filters=" << c.filters_size << " kernel=" << c.kernel_size << " lr=" << format_double(c.lr)
       << " l2=" << format_double(c.l2_reg) << " l1=" << format_double(c.l1_reg) << " batch=" << c.batch_size
       << " epochs=" << c.epochs << " att_reg=" << format_double(c.att_reg_weight);
    return os.str();
}

LayerDims layer_dims(const ModelConfig& c, const ModelShape& s)
{
    if (c.filters_size < 1 || c.kernel_size < 1 || s.attention_dim < 1 || s.channels < 1)
        throw ContractError("layer_dims: sizes must be positive");
    LayerDims d{};
    d.conv_rows = s.height - c.kernel_size + 1;
    d.conv_cols = s.width - c.kernel_size + 1;
    if (d.conv_rows < 2 || d.conv_cols < 2)
        throw ContractError("layer_dims: kernel " + std::to_string(c.kernel_size) + " too large for " +
                            std::to_string(s.height) + "x" + std::to_string(s.width) + " input");
    d.crop_rows = d.conv_rows - d.conv_rows % 2;
    d.crop_cols = d.conv_cols - d.conv_cols % 2;
    d.band_rows = d.crop_rows / 2;
    d.band_cols = d.crop_cols / 2;
    d.tokens = d.band_rows * d.band_cols;
    d.token_width = 4 * c.filters_size;
    d.attention_dim = s.attention_dim;
    return d;
}

bool operator==(const ModelWeights& a, const ModelWeights& b)
{
    auto same = [](const auto& x, const auto& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() && (x.array() == y.array()).all();
    };
    return same(a.conv_kernels, b.conv_kernels) && same(a.conv_bias, b.conv_bias) && same(a.wq, b.wq) &&
           same(a.wk, b.wk) && same(a.wv, b.wv) && same(a.dense, b.dense) && a.dense_bias == b.dense_bias;
}

std::array<Index, 7> group_sizes(const ModelWeights& w)
{
    return {w.conv_kernels.size(), w.conv_bias.size(), w.wq.size(), w.wk.size(), w.wv.size(), w.dense.size(), 1};
}

VectorXd pack(const ModelWeights& w)
{
    const auto sizes = group_sizes(w);
    VectorXd flat(std::accumulate(sizes.begin(), sizes.end(), Index{0}));
    Index o = 0;
    auto put = [&](const auto& m) {
        flat.segment(o, m.size()) = Eigen::Map<const VectorXd>(m.data(), m.size());
        o += m.size();
    };
    put(w.conv_kernels);
    put(w.conv_bias);
    put(w.wq);
    put(w.wk);
    put(w.wv);
    put(w.dense);
    flat[o] = w.dense_bias;
    return flat;
}

void unpack(const VectorXd& flat, ModelWeights& w)
{
    const auto sizes = group_sizes(w);
    if (flat.size() != std::accumulate(sizes.begin(), sizes.end(), Index{0}))
        throw ContractError("unpack: flat vector has the wrong length");
    Index o = 0;
    auto get = [&](auto& m) {
        Eigen::Map<VectorXd>(m.data(), m.size()) = flat.segment(o, m.size());
        o += m.size();
    };
    get(w.conv_kernels);
    get(w.conv_bias);
    get(w.wq);
    get(w.wk);
    get(w.wv);
    get(w.dense);
    w.dense_bias = flat[o];
}

ModelWeights zero_weights(const ModelConfig& c, const ModelShape& s)
{
    const auto d = layer_dims(c, s);
    const int k = c.kernel_size, F = c.filters_size;
    ModelWeights w;
    w.conv_kernels = MatrixXd::Zero(s.channels * k * k, F);
    w.conv_bias = VectorXd::Zero(F);
    w.wq = MatrixXd::Zero(d.token_width, d.attention_dim);
    w.wk = MatrixXd::Zero(d.token_width, d.attention_dim);
    w.wv = MatrixXd::Zero(d.token_width, d.attention_dim);
    w.dense = VectorXd::Zero(static_cast<Index>(d.tokens) * d.attention_dim);
    return w;
}

ModelWeights init_weights(const ModelConfig& c, const ModelShape& s, std::uint64_t seed)
{
    auto w = zero_weights(c, s);
    const auto d = layer_dims(c, s);
    const double kk = static_cast<double>(c.kernel_size) * c.kernel_size;
    RngStream root(seed, 0x1A17);
    auto fill = [](auto& m, double fan_in, double fan_out, RngStream rng) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (Index i = 0; i < m.size(); ++i)
            m.data()[i] = rng.uniform(-limit, limit);
    };
    fill(w.conv_kernels, s.channels * kk, c.filters_size * kk, root.derive(0));
    fill(w.wq, d.token_width, d.attention_dim, root.derive(2));
    fill(w.wk, d.token_width, d.attention_dim, root.derive(3));
    fill(w.wv, d.token_width, d.attention_dim, root.derive(4));
    fill(w.dense, static_cast<double>(d.tokens) * d.attention_dim, 1.0, root.derive(5));
    return w;
}

namespace {

void require_finite(const auto& m, const char* layer)
{
    if (!m.allFinite())
        throw NumericError(std::string("non-finite activation in layer '") + layer + "'");
}

// Rows are output positions (row-major), columns follow the kernel layout.
MatrixXd im2col(const std::vector<Plane<double>>& input, int k, int out_rows, int out_cols)
{
    const auto C = static_cast<int>(input.size());
    MatrixXd p(static_cast<Index>(out_rows) * out_cols, static_cast<Index>(C) * k * k);
    for (int c = 0; c < C; ++c)
        for (int u = 0; u < k; ++u)
            for (int v = 0; v < k; ++v) {
                const Index col = (static_cast<Index>(c) * k + u) * k + v;
                for (int i = 0; i < out_rows; ++i)
                    for (int j = 0; j < out_cols; ++j)
                        p(static_cast<Index>(i) * out_cols + j, col) = input[c](i + u, j + v);
            }
    return p;
}

void check_conv_args(const std::vector<Plane<double>>& input, const MatrixXd& kernels, const VectorXd& bias, int k)
{
    if (input.empty())
        throw ContractError("conv2d_valid: empty input");
    if (k < 1 || k > input[0].rows() || k > input[0].cols())
        throw ContractError("conv2d_valid: kernel " + std::to_string(k) + " larger than input " +
                            std::to_string(input[0].rows()) + "x" + std::to_string(input[0].cols()));
    if (kernels.rows() != static_cast<Index>(input.size()) * k * k || kernels.cols() != bias.size())
        throw ContractError("conv2d_valid: kernel/bias shapes do not match input");
}

// Attention with the score matrix kept transposed so the softmax runs down
// contiguous columns: at(j, i) = A(i, j).
struct AttentionCache {
    MatrixXd q, k, v, at, out;
};

AttentionCache attention_columns(const MatrixXd& tokens, const MatrixXd& wq, const MatrixXd& wk, const MatrixXd& wv)
{
    if (wq.rows() != tokens.cols() || wk.rows() != tokens.cols() || wv.rows() != tokens.cols() ||
        wk.cols() != wq.cols() || wv.cols() != wq.cols())
        throw ContractError("attention_forward: projection shapes do not match tokens");
    AttentionCache r;
    r.q.noalias() = tokens * wq;
    r.k.noalias() = tokens * wk;
    r.v.noalias() = tokens * wv;
    r.at.noalias() = r.k * r.q.transpose();
    r.at *= 1.0 / std::sqrt(static_cast<double>(wq.cols()));
    for (Index j = 0; j < r.at.cols(); ++j) {
        auto col = r.at.col(j);
        col.array() = (col.array() - col.maxCoeff()).exp();
        col /= col.sum();
    }
    r.out.noalias() = r.at.transpose() * r.v;
    return r;
}

struct ForwardCache {
    LayerDims dims;
    MatrixXd patches; // positions x C*k*k
    MatrixXd z;       // positions x F, pre-activation
    MatrixXd tokens;  // tokens x 4F
    AttentionCache att;
    double logit = 0.0;
    double prob = 0.5;
    bool clipped = false;
};

ForwardCache forward_one(const ModelConfig& c, const ModelWeights& w, const Image& img, int attention_dim)
{
    ForwardCache fc;
    const ModelShape shape{static_cast<int>(img.depth()), static_cast<int>(img.rows()), static_cast<int>(img.cols()),
                           attention_dim};
    fc.dims = layer_dims(c, shape);
    const auto& d = fc.dims;
    const int F = c.filters_size;
    check_conv_args(img.channels, w.conv_kernels, w.conv_bias, c.kernel_size);

    fc.patches = im2col(img.channels, c.kernel_size, d.conv_rows, d.conv_cols);
    fc.z = fc.patches * w.conv_kernels;
    fc.z.rowwise() += w.conv_bias.transpose();
    require_finite(fc.z, "conv");

    std::vector<Plane<double>> act(static_cast<std::size_t>(F), Plane<double>(d.crop_rows, d.crop_cols));
    for (int f = 0; f < F; ++f)
        for (int i = 0; i < d.crop_rows; ++i)
            for (int j = 0; j < d.crop_cols; ++j)
                act[f](i, j) = std::max(0.0, fc.z(static_cast<Index>(i) * d.conv_cols + j, f));

    const auto bands = subband_concat(act);
    fc.tokens.resize(d.tokens, d.token_width);
    for (int b = 0; b < d.token_width; ++b)
        for (int i = 0; i < d.band_rows; ++i)
            for (int j = 0; j < d.band_cols; ++j)
                fc.tokens(static_cast<Index>(i) * d.band_cols + j, b) = bands[b](i, j);
    require_finite(fc.tokens, "dwt");

    fc.att = attention_columns(fc.tokens, w.wq, w.wk, w.wv);
    require_finite(fc.att.out, "attention");

    const Eigen::Map<const RowMajorMatrix> head(w.dense.data(), d.tokens, d.attention_dim);
    fc.logit = (fc.att.out.array() * head.array()).sum() + w.dense_bias;
    if (!std::isfinite(fc.logit))
        throw NumericError("non-finite activation in layer 'dense'");
    const double p = 1.0 / (1.0 + std::exp(-fc.logit));
    fc.clipped = p < prob_epsilon || p > 1.0 - prob_epsilon;
    fc.prob = std::clamp(p, prob_epsilon, 1.0 - prob_epsilon);
    return fc;
}

// Accumulates the gradient of `g_logit * logit` into `grad`.
void backward_one(const ModelConfig& c, const ModelWeights& w, const ForwardCache& fc, double g_logit,
                  ModelWeights& grad)
{
    const auto& d = fc.dims;
    const int F = c.filters_size;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d.attention_dim));

    grad.dense_bias += g_logit;
    Eigen::Map<RowMajorMatrix> g_head(grad.dense.data(), d.tokens, d.attention_dim);
    g_head += g_logit * fc.att.out;
    const Eigen::Map<const RowMajorMatrix> head(w.dense.data(), d.tokens, d.attention_dim);
    const MatrixXd g_out = g_logit * head;

    const auto& At = fc.att.at;
    const MatrixXd g_v = At * g_out;
    MatrixXd g_st = fc.att.v * g_out.transpose(); // transposed gradient of A
    const Eigen::RowVectorXd col_dot = (g_st.array() * At.array()).colwise().sum();
    g_st = (At.array() * (g_st.rowwise() - col_dot).array()).matrix() * inv_sqrt_d;
    const MatrixXd g_q = g_st.transpose() * fc.att.k;
    const MatrixXd g_k = g_st * fc.att.q;

    grad.wq.noalias() += fc.tokens.transpose() * g_q;
    grad.wk.noalias() += fc.tokens.transpose() * g_k;
    grad.wv.noalias() += fc.tokens.transpose() * g_v;
    MatrixXd g_tokens = g_q * w.wq.transpose();
    g_tokens.noalias() += g_k * w.wk.transpose();
    g_tokens.noalias() += g_v * w.wv.transpose();

    std::vector<Plane<double>> g_bands(static_cast<std::size_t>(d.token_width), Plane<double>(d.band_rows, d.band_cols));
    for (int b = 0; b < d.token_width; ++b)
        for (int i = 0; i < d.band_rows; ++i)
            for (int j = 0; j < d.band_cols; ++j)
                g_bands[b](i, j) = g_tokens(static_cast<Index>(i) * d.band_cols + j, b);
    const auto g_act = subband_concat_adjoint(g_bands);

    MatrixXd g_z = MatrixXd::Zero(fc.z.rows(), F);
    for (int f = 0; f < F; ++f)
        for (int i = 0; i < d.crop_rows; ++i)
            for (int j = 0; j < d.crop_cols; ++j) {
                const Index r = static_cast<Index>(i) * d.conv_cols + j;
                if (fc.z(r, f) > 0.0)
                    g_z(r, f) = g_act[f](i, j);
            }
    grad.conv_kernels.noalias() += fc.patches.transpose() * g_z;
    grad.conv_bias += g_z.colwise().sum().transpose();
}

double sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

void add_regularization_gradient(const ModelConfig& c, const ModelWeights& w, ModelWeights& grad)
{
    auto add = [](auto& g, const auto& x, double l2, double l1) {
        g.array() += 2.0 * l2 * x.array() + l1 * x.array().unaryExpr([](double v) { return sign(v); });
    };
    add(grad.conv_kernels, w.conv_kernels, c.l2_reg, c.l1_reg);
    add(grad.dense, w.dense, c.l2_reg, c.l1_reg);
    add(grad.wq, w.wq, c.att_reg_weight, 0.0);
    add(grad.wk, w.wk, c.att_reg_weight, 0.0);
    add(grad.wv, w.wv, c.att_reg_weight, 0.0);
}

int attention_dim_of(const ModelWeights& w) { return static_cast<int>(w.wq.cols()); }

std::vector<const LabeledImage*> pointers(std::span<const LabeledImage> batch)
{
    std::vector<const LabeledImage*> out;
    out.reserve(batch.size());
    for (const auto& s : batch)
        out.push_back(&s);
    return out;
}

double cross_entropy(double p, int y) { return -(y != 0 ? std::log(p) : std::log1p(-p)); }

LossGradient backward_ptrs(const ModelConfig& c, const ModelWeights& w, const std::vector<const LabeledImage*>& batch)
{
    if (batch.empty())
        throw ContractError("backward: empty batch");
    LossGradient lg;
    lg.grad = w;
    auto zero = [](auto& m) { m.setZero(); };
    zero(lg.grad.conv_kernels);
    zero(lg.grad.conv_bias);
    zero(lg.grad.wq);
    zero(lg.grad.wk);
    zero(lg.grad.wv);
    zero(lg.grad.dense);
    lg.grad.dense_bias = 0.0;

    const double n = static_cast<double>(batch.size());
    double data_loss = 0.0;
    for (const auto* s : batch) {
        const auto fc = forward_one(c, w, s->pixels, attention_dim_of(w));
        lg.probs.push_back(fc.prob);
        data_loss += cross_entropy(fc.prob, s->label);
        if (!fc.clipped)
            backward_one(c, w, fc, (fc.prob - (s->label != 0 ? 1.0 : 0.0)) / n, lg.grad);
    }
    add_regularization_gradient(c, w, lg.grad);
    lg.loss = data_loss / n + regularization(c, w);
    return lg;
}

double batch_loss(const ModelConfig& c, const ModelWeights& w, std::span<const LabeledImage> batch)
{
    double acc = 0.0;
    for (const auto& s : batch)
        acc += cross_entropy(predict(c, w, s.pixels), s.label);
    return acc / static_cast<double>(batch.size()) + regularization(c, w);
}

} // namespace

std::vector<Plane<double>> conv2d_valid(const std::vector<Plane<double>>& input, const MatrixXd& kernels,
                                        const VectorXd& bias, int k)
{
    check_conv_args(input, kernels, bias, k);
    const auto rows = static_cast<int>(input[0].rows()) - k + 1, cols = static_cast<int>(input[0].cols()) - k + 1;
    MatrixXd z = im2col(input, k, rows, cols) * kernels;
    z.rowwise() += bias.transpose();
    std::vector<Plane<double>> out(static_cast<std::size_t>(kernels.cols()), Plane<double>(rows, cols));
    for (Index f = 0; f < kernels.cols(); ++f)
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                out[f](i, j) = z(static_cast<Index>(i) * cols + j, f);
    return out;
}

Plane<double> crop_even(const Plane<double>& p)
{
    return p.topLeftCorner(p.rows() - p.rows() % 2, p.cols() - p.cols() % 2);
}

AttentionResult attention_forward(const MatrixXd& tokens, const MatrixXd& wq, const MatrixXd& wk, const MatrixXd& wv)
{
    auto c = attention_columns(tokens, wq, wk, wv);
    return {std::move(c.q), std::move(c.k), std::move(c.v), c.at.transpose(), std::move(c.out)};
}

double predict(const ModelConfig& c, const ModelWeights& w, const Image& img)
{
    return forward_one(c, w, img, attention_dim_of(w)).prob;
}

std::vector<double> forward(const ModelConfig& c, const ModelWeights& w, std::span<const LabeledImage> batch)
{
    std::vector<double> out;
    out.reserve(batch.size());
    for (const auto& s : batch)
        out.push_back(predict(c, w, s.pixels));
    return out;
}

double regularization(const ModelConfig& c, const ModelWeights& w)
{
    const double sq = w.conv_kernels.squaredNorm() + w.dense.squaredNorm();
    const double ab = w.conv_kernels.lpNorm<1>() + w.dense.lpNorm<1>();
    const double att = w.wq.squaredNorm() + w.wk.squaredNorm() + w.wv.squaredNorm();
    return c.l2_reg * sq + c.l1_reg * ab + c.att_reg_weight * att;
}

double bce_loss(std::span<const double> probs, std::span<const int> labels, const ModelConfig& c,
                const ModelWeights& w)
{
    if (probs.size() != labels.size())
        throw ContractError("bce_loss: probs and labels differ in length");
    if (probs.empty())
        throw ContractError("bce_loss: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i)
        acc += cross_entropy(std::clamp(probs[i], prob_epsilon, 1.0 - prob_epsilon), labels[i]);
    return acc / static_cast<double>(probs.size()) + regularization(c, w);
}

LossGradient backward(const ModelConfig& c, const ModelWeights& w, std::span<const LabeledImage> batch)
{
    return backward_ptrs(c, w, pointers(batch));
}

std::array<double, 7> gradient_check(const ModelConfig& c, const ModelWeights& w, std::span<const LabeledImage> batch,
                                     double step)
{
    const auto analytic = pack(backward(c, w, batch).grad);
    const VectorXd base = pack(w);
    VectorXd numeric(base.size());
    ModelWeights probe = w;
    for (Index i = 0; i < base.size(); ++i) {
        VectorXd x = base;
        x[i] = base[i] + step;
        unpack(x, probe);
        const double up = batch_loss(c, probe, batch);
        x[i] = base[i] - step;
        unpack(x, probe);
        const double down = batch_loss(c, probe, batch);
        numeric[i] = (up - down) / (2.0 * step);
    }
    std::array<double, 7> out{};
    const auto sizes = group_sizes(w);
    Index o = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        const VectorXd a = analytic.segment(o, sizes[g]), n = numeric.segment(o, sizes[g]);
        const double scale = std::max({a.cwiseAbs().maxCoeff(), n.cwiseAbs().maxCoeff(), 1e-300});
        out[g] = (a - n).cwiseAbs().maxCoeff() / scale;
        o += sizes[g];
    }
    return out;
}

double lr_schedule(int epoch, double base_lr)
{
    if (epoch < 0)
        throw ContractError("lr_schedule: epoch must be >= 0");
    return base_lr * std::pow(0.95, epoch);
}

ModelShape shape_of(std::span<const LabeledImage> data, int attention_dim)
{
    if (data.empty())
        throw ContractError("shape_of: empty data set");
    const auto& first = data.front().pixels;
    for (const auto& s : data)
        if (s.pixels.depth() != first.depth() || s.pixels.rows() != first.rows() || s.pixels.cols() != first.cols())
            throw ContractError("images differ in shape (" + s.source_id + ")");
    return {static_cast<int>(first.depth()), static_cast<int>(first.rows()), static_cast<int>(first.cols()),
            attention_dim};
}

TrainResult train(const ModelConfig& config, std::span<const LabeledImage> train_set,
                  std::span<const LabeledImage> val_set, std::uint64_t seed, int attention_dim)
{
    if (train_set.empty() || val_set.empty())
        throw ContractError("train: training and validation sets must be nonempty");
    const ModelConfig c = normalized(config);
    validate(c, true);
    const auto shape = shape_of(train_set, attention_dim);
    if (shape.height % 2 != 0 || shape.width % 2 != 0)
        throw ContractError("train: image dimensions must be even");
    if (shape_of(val_set, attention_dim).height != shape.height)
        throw ContractError("train: validation images differ in shape from training images");

    ModelWeights w = init_weights(c, shape, hash_combine({seed, 1}));
    TrainResult result;
    result.best_val_accuracy = -1.0;
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto batch = static_cast<std::size_t>(c.batch_size);

    for (int epoch = 0; epoch < c.epochs; ++epoch) {
        RngStream rng(seed, hash_combine({2, static_cast<std::uint64_t>(epoch)}));
        shuffle(order, rng);
        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = lr_schedule(epoch, c.lr);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            std::vector<const LabeledImage*> ptrs;
            for (std::size_t i = start; i < std::min(order.size(), start + batch); ++i)
                ptrs.push_back(&train_set[order[i]]);
            auto lg = backward_ptrs(c, w, ptrs);
            loss_sum += lg.loss * static_cast<double>(ptrs.size());
            for (std::size_t i = 0; i < ptrs.size(); ++i)
                correct += static_cast<std::size_t>((lg.probs[i] >= 0.5) == (ptrs[i]->label != 0));
            w.conv_kernels -= rec.lr * lg.grad.conv_kernels;
            w.conv_bias -= rec.lr * lg.grad.conv_bias;
            w.wq -= rec.lr * lg.grad.wq;
            w.wk -= rec.lr * lg.grad.wk;
            w.wv -= rec.lr * lg.grad.wv;
            w.dense -= rec.lr * lg.grad.dense;
            w.dense_bias -= rec.lr * lg.grad.dense_bias;
            if (!pack(w).allFinite())
                throw NumericError("non-finite weights after an update in epoch " + std::to_string(epoch));
        }
        rec.train_loss = loss_sum / static_cast<double>(order.size());
        rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());

        const auto probs = forward(c, w, val_set);
        std::vector<int> labels;
        std::size_t val_correct = 0;
        for (std::size_t i = 0; i < val_set.size(); ++i) {
            labels.push_back(val_set[i].label);
            val_correct += static_cast<std::size_t>((probs[i] >= 0.5) == (val_set[i].label != 0));
        }
        rec.val_loss = bce_loss(probs, labels, c, w);
        rec.val_accuracy = static_cast<double>(val_correct) / static_cast<double>(val_set.size());
        if (rec.val_accuracy > result.best_val_accuracy) {
            result.best_val_accuracy = rec.val_accuracy;
            result.best_epoch = epoch;
            result.weights = w;
        }
        result.history.push_back(rec);
    }
    return result;
}

namespace {

nlohmann::json config_json(const ModelConfig& c)
{
    return {{"filters_size", c.filters_size}, {"kernel_size", c.kernel_size}, {"lr", c.lr},
            {"l2_reg", c.l2_reg},             {"l1_reg", c.l1_reg},           {"batch_size", c.batch_size},
            {"epochs", c.epochs},             {"att_reg_weight", c.att_reg_weight}};
}

} // namespace

void save_weights(const std::filesystem::path& prefix, const ModelWeights& w, const ModelConfig& c,
                  const ModelShape& s, std::uint64_t seed)
{
    const auto flat = pack(w);
    const auto sizes = group_sizes(w);
    nlohmann::json groups = nlohmann::json::array();
    auto shape_of_group = [](const auto& m) { return nlohmann::json::array({m.rows(), m.cols()}); };
    const std::array<nlohmann::json, 7> shapes{shape_of_group(w.conv_kernels), shape_of_group(w.conv_bias),
                                               shape_of_group(w.wq),           shape_of_group(w.wk),
                                               shape_of_group(w.wv),           shape_of_group(w.dense),
                                               nlohmann::json::array({1, 1})};
    for (std::size_t g = 0; g < sizes.size(); ++g)
        groups.push_back({{"name", weight_group_names[g]}, {"shape", shapes[g]}});
    nlohmann::json header = {{"format", "float64-le"},
                             {"count", flat.size()},
                             {"groups", groups},
                             {"config", config_json(c)},
                             {"shape",
                              {{"channels", s.channels},
                               {"height", s.height},
                               {"width", s.width},
                               {"attention_dim", s.attention_dim}}},
                             {"seed", seed}};
    std::ofstream js(prefix.string() + ".json");
    if (!js)
        throw DataError("cannot write " + prefix.string() + ".json");
    js << header.dump(2) << '\n';

    std::ofstream bin(prefix.string() + ".bin", std::ios::binary);
    if (!bin)
        throw DataError("cannot write " + prefix.string() + ".bin");
    for (Index i = 0; i < flat.size(); ++i) {
        const auto bits = std::bit_cast<std::uint64_t>(flat[i]);
        char bytes[8];
        for (int b = 0; b < 8; ++b)
            bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
        bin.write(bytes, 8);
    }
}

LoadedModel load_weights(const std::filesystem::path& prefix)
{
    std::ifstream js(prefix.string() + ".json");
    if (!js)
        throw DataError("cannot open " + prefix.string() + ".json");
    LoadedModel m;
    try {
        const auto h = nlohmann::json::parse(js);
        const auto& cj = h.at("config");
        m.config = {cj.at("filters_size"), cj.at("kernel_size"), cj.at("lr"),     cj.at("l2_reg"),
                    cj.at("l1_reg"),       cj.at("batch_size"),  cj.at("epochs"), cj.at("att_reg_weight")};
        const auto& sj = h.at("shape");
        m.shape = {sj.at("channels"), sj.at("height"), sj.at("width"), sj.at("attention_dim")};
        m.seed = h.at("seed");
    } catch (const nlohmann::json::exception& e) {
        throw DataError(prefix.string() + ".json: " + e.what());
    }
    m.weights = zero_weights(m.config, m.shape);
    VectorXd flat(pack(m.weights).size());
    std::ifstream bin(prefix.string() + ".bin", std::ios::binary);
    if (!bin)
        throw DataError("cannot open " + prefix.string() + ".bin");
    for (Index i = 0; i < flat.size(); ++i) {
        unsigned char bytes[8];
        if (!bin.read(reinterpret_cast<char*>(bytes), 8))
            throw DataError(prefix.string() + ".bin: truncated");
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
        flat[i] = std::bit_cast<double>(bits);
    }
    if (bin.peek() != EOF)
        throw DataError(prefix.string() + ".bin: trailing data");
    unpack(flat, m.weights);
    return m;
}

} // namespace swdo
