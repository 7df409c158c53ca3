#include "swdo/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

namespace swdo {

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string header_token(std::istream& in)
{
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n')
                ;
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty())
                break;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    return tok;
}

int header_int(std::istream& in, const std::filesystem::path& path, const char* what)
{
    const auto tok = header_token(in);
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); }))
        throw DataError(path.string() + ": malformed header (" + what + ")");
    return std::stoi(tok);
}

} // namespace

RawImage read_pnm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open image " + path.string());
    const auto magic = header_token(in);
    RawImage img;
    if (magic == "P5")
        img.channels = 1;
    else if (magic == "P6")
        img.channels = 3;
    else
        throw DataError(path.string() + ": not a binary PGM/PPM (magic '" + magic + "')");
    img.width = header_int(in, path, "width");
    img.height = header_int(in, path, "height");
    const int maxval = header_int(in, path, "maxval");
    if (img.width <= 0 || img.height <= 0)
        throw DataError(path.string() + ": empty image");
    if (maxval != 255)
        throw DataError(path.string() + ": maxval " + std::to_string(maxval) + " unsupported (need 255)");
    img.data.resize(static_cast<std::size_t>(img.width) * img.height * img.channels);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
        throw DataError(path.string() + ": truncated pixel data");
    return img;
}

void write_pnm(const std::filesystem::path& path, const RawImage& img)
{
    if (img.channels != 1 && img.channels != 3)
        throw DataError("write_pnm: channel count must be 1 or 3");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write " + path.string());
    out << (img.channels == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
}

void write_pgm(const std::filesystem::path& path, const RawImage& img)
{
    if (img.channels != 1)
        throw DataError("write_pgm: image must have one channel");
    write_pnm(path, img);
}

Image normalize(const RawImage& raw)
{
    Image img;
    img.channels.assign(static_cast<std::size_t>(raw.channels), Plane<double>(raw.height, raw.width));
    std::size_t k = 0;
    for (int r = 0; r < raw.height; ++r)
        for (int c = 0; c < raw.width; ++c)
            for (int ch = 0; ch < raw.channels; ++ch)
                img.channels[static_cast<std::size_t>(ch)](r, c) = raw.data[k++] / 255.0;
    return img;
}

RawImage to_raw(const Image& img)
{
    RawImage raw;
    raw.height = static_cast<int>(img.rows());
    raw.width = static_cast<int>(img.cols());
    raw.channels = static_cast<int>(img.depth());
    raw.data.reserve(static_cast<std::size_t>(raw.width) * raw.height * raw.channels);
    for (int r = 0; r < raw.height; ++r)
        for (int c = 0; c < raw.width; ++c)
            for (const auto& plane : img.channels)
                raw.data.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(plane(r, c), 0.0, 1.0) * 255.0)));
    return raw;
}

} // namespace swdo
