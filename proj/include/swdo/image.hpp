#ifndef SWDO_IMAGE_HPP
#define SWDO_IMAGE_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "swdo/evalstats.hpp"
#include "swdo/wavelet.hpp"

namespace swdo {

/// Channel-major real image; every channel has the same size.
struct Image {
    std::vector<Plane<double>> channels;

    Eigen::Index rows() const noexcept { return channels.empty() ? 0 : channels.front().rows(); }
    Eigen::Index cols() const noexcept { return channels.empty() ? 0 : channels.front().cols(); }
    std::size_t depth() const noexcept { return channels.size(); }

    friend bool operator==(const Image& a, const Image& b)
    {
        if (a.depth() != b.depth())
            return false;
        for (std::size_t c = 0; c < a.depth(); ++c)
            if (a.channels[c].rows() != b.channels[c].rows() || a.channels[c].cols() != b.channels[c].cols() ||
                a.channels[c] != b.channels[c])
                return false;
        return true;
    }
};

struct LabeledImage {
    Image pixels;
    int label = 0; ///< 1 = melanoma
    std::string source_id;
};

/// Raw 8-bit image as decoded from PGM (1 channel) or PPM (3 channels).
struct RawImage {
    int width = 0, height = 0, channels = 0;
    std::vector<std::uint8_t> data; ///< interleaved, row-major
};

/// Reads binary P5/P6 with maxval 255. Throws DataError.
RawImage read_pnm(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const RawImage& img);
void write_pnm(const std::filesystem::path& path, const RawImage& img);

/// value / 255 per channel.
Image normalize(const RawImage& raw);

/// Rounds [0, 1] values to 8 bits (clamping outside values).
RawImage to_raw(const Image& img);

} // namespace swdo

#endif
