#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "swdo/dataset.hpp"
#include "swdo/evalstats.hpp"

using namespace swdo;
namespace fs = std::filesystem;

namespace {

Image plane_image(const Plane<double>& p)
{
    Image img;
    img.channels.push_back(p);
    return img;
}

Image random_image(std::uint64_t seed, int h, int w)
{
    RngStream rng(seed, 1);
    return plane_image(Plane<double>::NullaryExpr(h, w, [&] { return rng.uniform(); }));
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name)
    {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_gray(const fs::path& p, int w, int h, std::uint8_t v)
{
    write_pgm(p, RawImage{w, h, 1, std::vector<std::uint8_t>(static_cast<std::size_t>(w * h), v)});
}

} // namespace

TEST_CASE("synthetic set is balanced and reproducible")
{
    const auto a = generate_synthetic(10, 3);
    REQUIRE(a.size() == 10);
    CHECK(std::count_if(a.begin(), a.end(), [](const auto& s) { return s.label == 1; }) == 5);
    const auto b = generate_synthetic(10, 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].pixels == b[i].pixels);
        CHECK(a[i].pixels.rows() == 32);
        CHECK(a[i].pixels.channels[0].minCoeff() >= 0.0);
        CHECK(a[i].pixels.channels[0].maxCoeff() <= 1.0);
    }
    CHECK_FALSE(generate_synthetic(10, 4)[0].pixels == a[0].pixels);
    CHECK_THROWS_AS(generate_synthetic(1, 3), ContractError);
}

TEST_CASE("the two synthetic classes differ in fine detail")
{
    const auto data = generate_synthetic(40, 1);
    double e0 = 0, e1 = 0;
    for (const auto& s : data)
        (s.label ? e1 : e0) += detail_energy(s.pixels);
    CHECK(e1 > 4.0 * e0);
}

TEST_CASE("labels")
{
    CHECK(parse_label("melanoma") == 1);
    CHECK(parse_label("Melanoma") == 1);
    CHECK(parse_label("benign") == 0);
    CHECK(parse_label("1") == 1);
    CHECK(parse_label("0") == 0);
    CHECK(parse_label("nevus?") == -1);
}

TEST_CASE("manifest loading")
{
    TempDir dir("swdo_manifest_test");
    write_gray(dir.path / "a.pgm", 4, 2, 51);
    write_gray(dir.path / "b.pgm", 4, 2, 255);
    std::ofstream(dir.path / "ok.csv") << "filename,label\na.pgm,melanoma\nb.pgm,benign\n";
    const auto data = load_manifest(dir.path / "ok.csv");
    REQUIRE(data.size() == 2);
    CHECK(data[0].label == 1);
    CHECK(data[1].label == 0);
    CHECK(data[0].pixels.channels[0](0, 0) == doctest::Approx(0.2));
    CHECK(data[1].pixels.channels[0](1, 3) == 1.0);

    std::ofstream(dir.path / "missing.csv") << "filename,label\na.pgm,melanoma\nnope.pgm,benign\n";
    CHECK_THROWS_WITH_AS(load_manifest(dir.path / "missing.csv"), doctest::Contains("row 2"), DataError);
    std::ofstream(dir.path / "label.csv") << "filename,label\na.pgm,maybe\n";
    CHECK_THROWS_WITH_AS(load_manifest(dir.path / "label.csv"), doctest::Contains("row 1"), DataError);
    std::ofstream(dir.path / "header.csv") << "file,class\na.pgm,benign\n";
    CHECK_THROWS_AS(load_manifest(dir.path / "header.csv"), DataError);
    CHECK_THROWS_AS(load_manifest(dir.path / "absent.csv"), DataError);
}

TEST_CASE("8-bit normalization")
{
    const auto img = normalize(RawImage{3, 1, 1, {0, 51, 255}});
    CHECK(img.channels[0](0, 0) == 0.0);
    CHECK(img.channels[0](0, 1) == 0.2);
    CHECK(img.channels[0](0, 2) == 1.0);
}

TEST_CASE("bilinear resize")
{
    const auto flat = resize_bilinear(plane_image(Plane<double>::Constant(5, 3, 0.7)), 9, 4);
    CHECK((flat.channels[0].array() - 0.7).abs().maxCoeff() < 1e-15);
    const auto img = random_image(2, 6, 5);
    CHECK(resize_bilinear(img, 6, 5) == img);

    Plane<double> ramp(2, 2);
    ramp << 0, 1, 0, 1;
    const auto wide = resize_bilinear(plane_image(ramp), 2, 4).channels[0];
    // Corner-aligned: output column j samples input column j * (2 - 1) / (4 - 1).
    for (int r = 0; r < 2; ++r)
        for (int j = 0; j < 4; ++j)
            CHECK(wide(r, j) == doctest::Approx(j / 3.0).epsilon(1e-14));
    CHECK(sample_bilinear(ramp, 0.0, 1.0) == 1.0);
}

TEST_CASE("augmentation identities")
{
    const auto img = random_image(4, 6, 6);
    CHECK(augment(augment(img, AugmentOp::hflip), AugmentOp::hflip) == img);
    CHECK(augment(augment(img, AugmentOp::vflip), AugmentOp::vflip) == img);
    auto turned = img;
    for (int i = 0; i < 4; ++i)
        turned = augment(turned, AugmentOp::rot90);
    CHECK(turned == img);
    CHECK(augment(augment(img, AugmentOp::rot90), AugmentOp::rot90) == augment(img, AugmentOp::rot180));
    CHECK(augment(augment(img, AugmentOp::rot90), AugmentOp::rot270) == img);
    CHECK(augment(img, AugmentOp::zoom, AugmentParams{0.0, 1.0, 0, 0}) == img);
    CHECK(augment(img, AugmentOp::rotate, AugmentParams{0.0, 1.0, 0, 0}) == img);
    CHECK(augment(img, AugmentOp::translate, AugmentParams{}) == img);
    CHECK_THROWS_AS(augment(img, AugmentOp::zoom, AugmentParams{0.0, 0.0, 0, 0}), ContractError);

    // Quarter turn is counter-clockwise: the top-right pixel moves to the top-left.
    CHECK(augment(img, AugmentOp::rot90).channels[0](0, 0) == img.channels[0](0, 5));

    RngStream rng(1, 1);
    const auto moved = augment(img, AugmentOp::rotate, rng);
    CHECK(moved.rows() == 6);
    CHECK((moved.channels[0].array() >= 0.0).all());
    CHECK(parse_augment_op(to_string(AugmentOp::translate)) == AugmentOp::translate);
    CHECK_THROWS_AS(parse_augment_op("shear"), ConfigError);
}

TEST_CASE("k-fold plans")
{
    const auto p = kfold_split(10, 5, 1);
    std::vector<std::size_t> all;
    for (std::size_t f = 0; f < 5; ++f) {
        const auto fold = p.fold(f);
        CHECK(fold.size() == 2);
        all.insert(all.end(), fold.begin(), fold.end());
        const auto rest = p.complement(f);
        CHECK(rest.size() == 8);
        for (auto i : fold)
            CHECK(std::find(rest.begin(), rest.end(), i) == rest.end());
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect(10);
    std::iota(expect.begin(), expect.end(), std::size_t{0});
    CHECK(all == expect);

    std::multiset<std::size_t> sizes;
    const auto q = kfold_split(11, 5, 2);
    for (std::size_t f = 0; f < 5; ++f)
        sizes.insert(q.fold(f).size());
    CHECK(sizes == std::multiset<std::size_t>{2, 2, 2, 2, 3});
    CHECK_THROWS_AS(kfold_split(4, 5, 1), ContractError);
    CHECK_THROWS_AS(kfold_split(10, 1, 1), ContractError);
    CHECK(kfold_split(10, 5, 1).assignments == p.assignments);
}

TEST_CASE("train/validation split")
{
    const auto split = [](std::size_t n, std::uint64_t seed) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        return train_val_split(idx, seed);
    };
    const auto a = split(100, 5);
    CHECK(a.train.size() == 85);
    CHECK(a.val.size() == 15);
    const auto b = split(7, 5);
    CHECK(b.train.size() == 6);
    CHECK(b.val.size() == 1);
    const auto c = split(100, 5);
    CHECK(a.train == c.train);
    CHECK(a.val == c.val);
    std::set<std::size_t> both(a.train.begin(), a.train.end());
    both.insert(a.val.begin(), a.val.end());
    CHECK(both.size() == 100);
    CHECK_THROWS_AS(split(1, 5), ContractError);
}
