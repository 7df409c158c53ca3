#include "swdo/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "swdo/core.hpp"
#include "swdo/format.hpp"

namespace swdo {

namespace {

double smoothstep_edge(double signed_distance, double softness)
{
    return 1.0 / (1.0 + std::exp(signed_distance / softness));
}

Plane<double> synthetic_plane(int size, int label, RngStream& rng)
{
    const double half = 0.5 * (size - 1);
    const double cy = half + rng.uniform(-0.12, 0.12) * size;
    const double cx = half + rng.uniform(-0.12, 0.12) * size;
    const double theta = rng.uniform(0.0, std::numbers::pi);
    const double skin = rng.uniform(0.68, 0.85);
    const double tilt_r = rng.uniform(-0.1, 0.1) / size, tilt_c = rng.uniform(-0.1, 0.1) / size;
    // Melanoma-like lesions are darker and larger on average; the ranges overlap.
    const double lesion = label == 0 ? rng.uniform(0.35, 0.6) : rng.uniform(0.1, 0.4);
    const double grow = label == 0 ? 1.0 : 1.25;
    const double ra = rng.uniform(0.18, 0.3) * size * grow, rb = rng.uniform(0.14, 0.24) * size * grow;
    std::array<double, 5> lobe_amp{}, lobe_phase{};
    for (std::size_t m = 0; m < lobe_amp.size(); ++m) {
        lobe_amp[m] = rng.uniform(0.06, 0.16);
        lobe_phase[m] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    const double texture_freq = rng.uniform(0.38, 0.5) * std::numbers::pi * 2.0;
    const double texture_dir = rng.uniform(0.0, std::numbers::pi);

    Plane<double> p(size, size);
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            const double dy = r - cy, dx = c - cx;
            const double u = dx * std::cos(theta) + dy * std::sin(theta);
            const double v = -dx * std::sin(theta) + dy * std::cos(theta);
            const double bg = skin + tilt_r * (r - half) + tilt_c * (c - half);
            double value;
            if (label == 0) {
                const double rho = std::sqrt((u / ra) * (u / ra) + (v / rb) * (v / rb));
                const double inside = smoothstep_edge((rho - 1.0) * std::min(ra, rb), 1.5);
                value = bg + (lesion - bg) * inside;
            } else {
                const double ang = std::atan2(v, u);
                double radius = 1.0;
                for (std::size_t m = 0; m < lobe_amp.size(); ++m)
                    radius += lobe_amp[m] * std::cos(static_cast<double>(m + 3) * ang + lobe_phase[m]);
                radius *= 0.5 * (ra + rb);
                const double inside = smoothstep_edge(std::hypot(u, v) - radius, 0.35);
                const double stripes =
                    std::sin(texture_freq * (r * std::cos(texture_dir) + c * std::sin(texture_dir)));
                const double speckle = rng.uniform(-0.15, 0.15);
                value = bg + (lesion - bg + 0.14 * stripes + speckle) * inside;
            }
            p(r, c) = std::clamp(value + rng.uniform(-0.02, 0.02), 0.0, 1.0);
        }
    }
    return p;
}

} // namespace

std::vector<LabeledImage> generate_synthetic(std::size_t n, std::uint64_t seed, int size)
{
    if (n < 2)
        throw ContractError("generate_synthetic: n must be >= 2");
    if (size < 4)
        throw ContractError("generate_synthetic: size must be >= 4");
    std::vector<LabeledImage> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        RngStream rng(seed, hash_combine({0x5E7, i}));
        const int label = static_cast<int>(i % 2);
        out.push_back({Image{{synthetic_plane(size, label, rng)}}, label, "synthetic-" + std::to_string(i)});
    }
    return out;
}

int parse_label(std::string_view text)
{
    const auto t = to_lower(trim(text));
    if (t == "melanoma" || t == "1")
        return 1;
    if (t == "benign" || t == "0")
        return 0;
    return -1;
}

std::vector<LabeledImage> load_manifest(const std::filesystem::path& manifest)
{
    std::ifstream in(manifest);
    if (!in)
        throw DataError("cannot open manifest " + manifest.string());
    const auto base = manifest.parent_path();
    std::string line;
    if (!std::getline(in, line))
        throw DataError(manifest.string() + ": empty manifest");
    const auto header = split_csv_line(line);
    if (header.size() != 2 || to_lower(header[0]) != "filename" || to_lower(header[1]) != "label")
        throw DataError(manifest.string() + ": malformed header, expected 'filename,label'");

    std::vector<LabeledImage> out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty())
            continue;
        ++row;
        const auto where = manifest.string() + " row " + std::to_string(row);
        const auto cells = split_csv_line(line);
        if (cells.size() != 2)
            throw DataError(where + ": expected 2 columns, found " + std::to_string(cells.size()));
        const int label = parse_label(cells[1]);
        if (label < 0)
            throw DataError(where + ": unknown label '" + cells[1] + "'");
        const std::filesystem::path listed(cells[0]);
        const auto file = listed.is_absolute() ? listed : base / listed;
        if (!std::filesystem::exists(file))
            throw DataError(where + ": missing file " + file.string());
        try {
            out.push_back({normalize(read_pnm(file)), label, cells[0]});
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
    }
    if (out.empty())
        throw DataError(manifest.string() + ": no data rows");
    return out;
}

double sample_bilinear(const Plane<double>& p, double r, double c)
{
    const double rmax = static_cast<double>(p.rows() - 1), cmax = static_cast<double>(p.cols() - 1);
    r = std::clamp(r, 0.0, rmax);
    c = std::clamp(c, 0.0, cmax);
    const auto r0 = static_cast<Eigen::Index>(std::floor(r)), c0 = static_cast<Eigen::Index>(std::floor(c));
    const auto r1 = std::min(r0 + 1, p.rows() - 1), c1 = std::min(c0 + 1, p.cols() - 1);
    const double fr = r - static_cast<double>(r0), fc = c - static_cast<double>(c0);
    if (fr == 0.0 && fc == 0.0)
        return p(r0, c0);
    const double top = p(r0, c0) * (1.0 - fc) + p(r0, c1) * fc;
    const double bottom = p(r1, c0) * (1.0 - fc) + p(r1, c1) * fc;
    return top * (1.0 - fr) + bottom * fr;
}

Image resize_bilinear(const Image& img, int out_h, int out_w)
{
    if (out_h < 1 || out_w < 1)
        throw ContractError("resize_bilinear: output dimensions must be >= 1");
    const double sr = out_h > 1 ? static_cast<double>(img.rows() - 1) / (out_h - 1) : 0.0;
    const double sc = out_w > 1 ? static_cast<double>(img.cols() - 1) / (out_w - 1) : 0.0;
    Image out;
    for (const auto& p : img.channels) {
        Plane<double> q(out_h, out_w);
        for (int r = 0; r < out_h; ++r)
            for (int c = 0; c < out_w; ++c)
                q(r, c) = sample_bilinear(p, r * sr, c * sc);
        out.channels.push_back(std::move(q));
    }
    return out;
}

std::string_view to_string(AugmentOp op)
{
    switch (op) {
    case AugmentOp::hflip: return "hflip";
    case AugmentOp::vflip: return "vflip";
    case AugmentOp::rot90: return "rot90";
    case AugmentOp::rot180: return "rot180";
    case AugmentOp::rot270: return "rot270";
    case AugmentOp::rotate: return "rotate";
    case AugmentOp::zoom: return "zoom";
    case AugmentOp::translate: return "translate";
    }
    return "?";
}

AugmentOp parse_augment_op(std::string_view name)
{
    for (auto op : {AugmentOp::hflip, AugmentOp::vflip, AugmentOp::rot90, AugmentOp::rot180, AugmentOp::rot270,
                    AugmentOp::rotate, AugmentOp::zoom, AugmentOp::translate})
        if (to_string(op) == name)
            return op;
    throw ConfigError("unknown augmentation '" + std::string(name) + "'");
}

namespace {

// Inverse-maps every output pixel through `src` and samples bilinearly.
template <typename Map>
Image resample(const Image& img, Map src)
{
    Image out;
    for (const auto& p : img.channels) {
        Plane<double> q(p.rows(), p.cols());
        for (Eigen::Index r = 0; r < p.rows(); ++r)
            for (Eigen::Index c = 0; c < p.cols(); ++c) {
                const auto [sr, sc] = src(static_cast<double>(r), static_cast<double>(c));
                q(r, c) = sample_bilinear(p, sr, sc);
            }
        out.channels.push_back(std::move(q));
    }
    return out;
}

template <typename F>
Image per_channel(const Image& img, F f)
{
    Image out;
    for (const auto& p : img.channels)
        out.channels.push_back(f(p));
    return out;
}

} // namespace

Image augment(const Image& img, AugmentOp op, const AugmentParams& params)
{
    const double cy = 0.5 * static_cast<double>(img.rows() - 1), cx = 0.5 * static_cast<double>(img.cols() - 1);
    switch (op) {
    case AugmentOp::hflip: return per_channel(img, [](const Plane<double>& p) -> Plane<double> { return p.rowwise().reverse(); });
    case AugmentOp::vflip: return per_channel(img, [](const Plane<double>& p) -> Plane<double> { return p.colwise().reverse(); });
    case AugmentOp::rot90:
        return per_channel(img, [](const Plane<double>& p) -> Plane<double> { return p.transpose().colwise().reverse(); });
    case AugmentOp::rot180: return per_channel(img, [](const Plane<double>& p) -> Plane<double> { return p.reverse(); });
    case AugmentOp::rot270:
        return per_channel(img, [](const Plane<double>& p) -> Plane<double> { return p.transpose().rowwise().reverse(); });
    case AugmentOp::rotate: {
        const double a = params.degrees * std::numbers::pi / 180.0, ca = std::cos(a), sa = std::sin(a);
        return resample(img, [=](double r, double c) {
            const double y = r - cy, x = c - cx;
            return std::pair{cy + ca * y - sa * x, cx + sa * y + ca * x};
        });
    }
    case AugmentOp::zoom: {
        if (!(params.zoom > 0.0))
            throw ContractError("augment: zoom factor must be > 0");
        const double z = params.zoom;
        return resample(img, [=](double r, double c) { return std::pair{cy + (r - cy) / z, cx + (c - cx) / z}; });
    }
    case AugmentOp::translate: {
        const double dr = params.shift_rows, dc = params.shift_cols;
        return resample(img, [=](double r, double c) { return std::pair{r - dr, c - dc}; });
    }
    }
    throw ContractError("augment: unknown op");
}

Image augment(const Image& img, AugmentOp op, RngStream& rng, const AugmentRanges& ranges)
{
    AugmentParams p;
    switch (op) {
    case AugmentOp::rotate: p.degrees = rng.uniform(-ranges.max_degrees, ranges.max_degrees); break;
    case AugmentOp::zoom: p.zoom = rng.uniform(ranges.min_zoom, ranges.max_zoom); break;
    case AugmentOp::translate: {
        const auto mr = static_cast<std::int64_t>(std::floor(ranges.max_shift_fraction * static_cast<double>(img.rows())));
        const auto mc = static_cast<std::int64_t>(std::floor(ranges.max_shift_fraction * static_cast<double>(img.cols())));
        p.shift_rows = static_cast<int>(rng.uniform_int(-mr, mr));
        p.shift_cols = static_cast<int>(rng.uniform_int(-mc, mc));
        break;
    }
    default: break;
    }
    return augment(img, op, p);
}

std::vector<std::size_t> FoldPlan::fold(std::size_t f) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] == f)
            out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldPlan::complement(std::size_t f) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] != f)
            out.push_back(i);
    return out;
}

FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed)
{
    if (k < 2 || k > n)
        throw ContractError("kfold_split: need 2 <= k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream rng(seed, 0xF01D);
    shuffle(order, rng);
    FoldPlan plan{k, std::vector<std::size_t>(n)};
    for (std::size_t i = 0; i < n; ++i)
        plan.assignments[order[i]] = i % k;
    return plan;
}

TrainValSplit train_val_split(std::vector<std::size_t> indices, std::uint64_t seed, double val_fraction)
{
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw ContractError("train_val_split: val_fraction must lie in (0, 1)");
    if (indices.size() < 2)
        throw ContractError("train_val_split: need at least 2 samples");
    RngStream rng(seed, 0x5B117);
    shuffle(indices, rng);
    const auto n = indices.size();
    const auto v = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n))),
                                           1, n - 1);
    TrainValSplit s;
    s.val.assign(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(v));
    s.train.assign(indices.begin() + static_cast<std::ptrdiff_t>(v), indices.end());
    return s;
}

std::vector<LabeledImage> gather(const std::vector<LabeledImage>& data, const std::vector<std::size_t>& indices)
{
    std::vector<LabeledImage> out;
    out.reserve(indices.size());
    for (auto i : indices)
        out.push_back(data.at(i));
    return out;
}

double detail_energy(const Image& img)
{
    double e = 0.0;
    for (const auto& p : img.channels)
        e += dwt2_forward(p.topLeftCorner(p.rows() - p.rows() % 2, p.cols() - p.cols() % 2)).detail_energy();
    return e;
}

} // namespace swdo
