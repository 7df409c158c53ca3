#ifndef SWDO_WAVELET_HPP
#define SWDO_WAVELET_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace swdo {

/// One feature-map channel.
template <typename Scalar = double>
using Plane = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The four half-resolution bands of one orthonormal Haar level.
///   ll: approximation, lh: horizontal differences (across columns),
///   hl: vertical differences (across rows), hh: diagonal.
template <typename Scalar = double>
struct SubbandSet {
    Plane<Scalar> ll, lh, hl, hh;

    Eigen::Index rows() const noexcept { return ll.rows(); }
    Eigen::Index cols() const noexcept { return ll.cols(); }

    Scalar detail_energy() const { return lh.squaredNorm() + hl.squaredNorm() + hh.squaredNorm(); }
    Scalar energy() const { return ll.squaredNorm() + detail_energy(); }
};

template <typename Derived>
void require_even(const Eigen::MatrixBase<Derived>& p, const char* what = "dwt2_forward")
{
    if (p.rows() == 0 || p.cols() == 0)
        throw ShapeError(std::string(what) + ": empty plane");
    if (p.rows() % 2 != 0)
        throw ShapeError(std::string(what) + ": height " + std::to_string(p.rows()) + " is odd");
    if (p.cols() % 2 != 0)
        throw ShapeError(std::string(what) + ": width " + std::to_string(p.cols()) + " is odd");
}

/// Single-level 2-D Haar analysis. For each 2x2 block [[a, b], [c, d]]:
/// ll = (a+b+c+d)/2, lh = (a-b+c-d)/2, hl = (a+b-c-d)/2, hh = (a-b-c+d)/2.
template <typename Derived>
SubbandSet<typename Derived::Scalar> dwt2_forward(const Eigen::MatrixBase<Derived>& p)
{
    using S = typename Derived::Scalar;
    require_even(p);
    const Eigen::Index h = p.rows() / 2, w = p.cols() / 2;
    SubbandSet<S> s{Plane<S>(h, w), Plane<S>(h, w), Plane<S>(h, w), Plane<S>(h, w)};
    for (Eigen::Index j = 0; j < w; ++j) {
        for (Eigen::Index i = 0; i < h; ++i) {
            const S a = p(2 * i, 2 * j), b = p(2 * i, 2 * j + 1);
            const S c = p(2 * i + 1, 2 * j), d = p(2 * i + 1, 2 * j + 1);
            s.ll(i, j) = (a + b + c + d) / S(2);
            s.lh(i, j) = (a - b + c - d) / S(2);
            s.hl(i, j) = (a + b - c - d) / S(2);
            s.hh(i, j) = (a - b - c + d) / S(2);
        }
    }
    return s;
}

/// Exact inverse of dwt2_forward. The transform is orthonormal, so this is
/// also its adjoint.
template <typename Scalar>
Plane<Scalar> dwt2_inverse(const SubbandSet<Scalar>& s)
{
    const Eigen::Index h = s.ll.rows(), w = s.ll.cols();
    auto same = [&](const Plane<Scalar>& b) { return b.rows() == h && b.cols() == w; };
    if (!same(s.lh) || !same(s.hl) || !same(s.hh))
        throw ShapeError("dwt2_inverse: sub-band shapes differ");
    Plane<Scalar> p(2 * h, 2 * w);
    for (Eigen::Index j = 0; j < w; ++j) {
        for (Eigen::Index i = 0; i < h; ++i) {
            const Scalar ll = s.ll(i, j), lh = s.lh(i, j), hl = s.hl(i, j), hh = s.hh(i, j);
            p(2 * i, 2 * j) = (ll + lh + hl + hh) / Scalar(2);
            p(2 * i, 2 * j + 1) = (ll - lh + hl - hh) / Scalar(2);
            p(2 * i + 1, 2 * j) = (ll + lh - hl - hh) / Scalar(2);
            p(2 * i + 1, 2 * j + 1) = (ll - lh - hl + hh) / Scalar(2);
        }
    }
    return p;
}

/// Decomposes each channel and stacks the bands band-major:
/// [ll_0..ll_{C-1}, lh_0.., hl_0.., hh_0..].
template <typename Scalar>
std::vector<Plane<Scalar>> subband_concat(const std::vector<Plane<Scalar>>& stack)
{
    const std::size_t C = stack.size();
    std::vector<Plane<Scalar>> out(4 * C);
    for (std::size_t c = 0; c < C; ++c) {
        if (stack[c].rows() != stack[0].rows() || stack[c].cols() != stack[0].cols())
            throw ShapeError("subband_concat: channels differ in size");
        auto s = dwt2_forward(stack[c]);
        out[c] = std::move(s.ll);
        out[C + c] = std::move(s.lh);
        out[2 * C + c] = std::move(s.hl);
        out[3 * C + c] = std::move(s.hh);
    }
    return out;
}

/// Adjoint (= inverse) of subband_concat: 4C half-size planes back to C planes.
template <typename Scalar>
std::vector<Plane<Scalar>> subband_concat_adjoint(const std::vector<Plane<Scalar>>& bands)
{
    if (bands.size() % 4 != 0)
        throw ShapeError("subband_concat_adjoint: band count must be a multiple of 4");
    const std::size_t C = bands.size() / 4;
    std::vector<Plane<Scalar>> out(C);
    for (std::size_t c = 0; c < C; ++c)
        out[c] = dwt2_inverse(SubbandSet<Scalar>{bands[c], bands[C + c], bands[2 * C + c], bands[3 * C + c]});
    return out;
}

} // namespace swdo

#endif
