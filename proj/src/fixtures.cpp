#include "swdo/fixtures.hpp"

#include "swdo/format.hpp"

namespace swdo::fixtures {

namespace {

struct FoldRow {
    const char* model;
    std::array<double, 5> folds;
};

const std::vector<FoldRow> kIsic2016 = {
    {"Xception", {0.9511, 0.9421, 0.9233, 0.9540, 0.9544}},
    {"Xception+Wavelet", {0.9712, 0.9695, 0.9655, 0.9705, 0.9712}},
    {"Xception+Wavelet+IGWO", {0.9715, 0.9754, 0.9665, 0.9623, 0.9627}},
    {"Xception+Wavelet+Fox", {0.9802, 0.9700, 0.9569, 0.9613, 0.9725}},
    {"Xception+Wavelet+MGTO", {0.9811, 0.9699, 0.9666, 0.9643, 0.9715}},
    {"Inception", {0.9601, 0.9632, 0.9651, 0.9501, 0.9391}},
    {"Inception+Wavelet", {0.9630, 0.9630, 0.9614, 0.9743, 0.9698}},
    {"Inception+Wavelet+IGWO", {0.9790, 0.9712, 0.9743, 0.9719, 0.9716}},
    {"Inception+Wavelet+Fox", {0.9721, 0.9703, 0.9703, 0.9718, 0.9756}},
    {"Inception+Wavelet+MGTO", {0.9787, 0.9776, 0.9776, 0.9719, 0.9756}},
    {"DenseNet", {0.9701, 0.9700, 0.9702, 0.9721, 0.9753}},
    {"DenseNet+Wavelet", {0.9756, 0.9690, 0.9678, 0.9612, 0.9856}},
    {"DenseNet+Wavelet+IGWO", {0.9782, 0.9782, 0.9714, 0.9781, 0.9851}},
    {"DenseNet+Wavelet+Fox", {0.9743, 0.9723, 0.9723, 0.9683, 0.9813}},
    {"DenseNet+Wavelet+MGTO", {0.9744, 0.9712, 0.9710, 0.9676, 0.9823}},
    {"MobileNet", {0.9709, 0.9800, 0.9713, 0.9687, 0.9780}},
    {"MobileNet+Wavelet", {0.9809, 0.9712, 0.9710, 0.9802, 0.9702}},
    {"MobileNet+Wavelet+IGWO", {0.9831, 0.9804, 0.9810, 0.9810, 0.9813}},
    {"MobileNet+Wavelet+Fox", {0.9876, 0.9612, 0.9700, 0.9822, 0.9743}},
    {"MobileNet+Wavelet+MGTO", {0.9811, 0.9604, 0.9805, 0.9799, 0.9823}},
};

const std::vector<FoldRow> kIsic2017 = {
    {"Xception", {0.9515, 0.9190, 0.9265, 0.9665, 0.9080}},
    {"Xception+Wavelet", {0.9510, 0.9175, 0.9585, 0.9630, 0.9625}},
    {"Xception+Wavelet+IGWO", {0.9665, 0.9612, 0.9625, 0.9775, 0.9625}},
    {"Xception+Wavelet+Fox", {0.9762, 0.9676, 0.9622, 0.9776, 0.9623}},
    {"Xception+Wavelet+MGTO", {0.9776, 0.9653, 0.9665, 0.9767, 0.9646}},
    {"Inception", {0.9311, 0.9361, 0.9791, 0.9125, 0.9515}},
    {"Inception+Wavelet", {0.9355, 0.9460, 0.9700, 0.9105, 0.9510}},
    {"Inception+Wavelet+IGWO", {0.9510, 0.9690, 0.9680, 0.9590, 0.9505}},
    {"Inception+Wavelet+Fox", {0.9725, 0.9795, 0.9700, 0.9680, 0.9690}},
    {"Inception+Wavelet+MGTO", {0.9771, 0.9715, 0.9700, 0.9701, 0.9791}},
    {"DenseNet", {0.9590, 0.9505, 0.9523, 0.9414, 0.9570}},
    {"DenseNet+Wavelet", {0.9653, 0.9555, 0.9543, 0.9423, 0.9523}},
    {"DenseNet+Wavelet+IGWO", {0.9691, 0.9523, 0.9512, 0.9643, 0.9575}},
    {"DenseNet+Wavelet+Fox", {0.9545, 0.9674, 0.9620, 0.9605, 0.9523}},
    {"DenseNet+Wavelet+MGTO", {0.9700, 0.9650, 0.9690, 0.9689, 0.9723}},
    {"MobileNet", {0.9300, 0.9235, 0.9610, 0.9435, 0.9585}},
    {"MobileNet+Wavelet", {0.9412, 0.9333, 0.9620, 0.9423, 0.9553}},
    {"MobileNet+Wavelet+IGWO", {0.9498, 0.9498, 0.9672, 0.9443, 0.9524}},
    {"MobileNet+Wavelet+Fox", {0.9585, 0.9590, 0.9590, 0.9620, 0.9680}},
    {"MobileNet+Wavelet+MGTO", {0.9680, 0.9680, 0.9675, 0.9788, 0.9755}},
};

const std::vector<FoldRow> kIsic2016Amended = {
    {"Xception", {0.9511, 0.9421, 0.9233, 0.9540, 0.9544}},
    {"Xception+Wavelet", {0.9712, 0.9695, 0.9655, 0.9705, 0.9712}},
    {"Xception+Wavelet+IGWO", {0.9715, 0.9754, 0.9665, 0.9623, 0.9627}},
    {"Xception+Wavelet+Fox", {0.9802, 0.9700, 0.9569, 0.9613, 0.9725}},
    {"Xception+Wavelet+MGTO", {0.9811, 0.9699, 0.9666, 0.9643, 0.9715}},
    {"Inception", {0.9601, 0.9632, 0.9651, 0.9501, 0.9391}},
    {"Inception+Wavelet", {0.9630, 0.9630, 0.9614, 0.9743, 0.9698}},
    {"Inception+Wavelet+IGWO", {0.9790, 0.9712, 0.9743, 0.9719, 0.9716}},
    {"Inception+Wavelet+Fox", {0.9721, 0.9703, 0.9700, 0.9718, 0.9756}},
    {"Inception+Wavelet+MGTO", {0.9787, 0.9776, 0.9767, 0.9719, 0.9756}},
    {"DenseNet", {0.9701, 0.9700, 0.9702, 0.9721, 0.9753}},
    {"DenseNet+Wavelet", {0.9756, 0.9690, 0.9678, 0.9612, 0.9856}},
    {"DenseNet+Wavelet+IGWO", {0.9782, 0.9743, 0.9714, 0.9781, 0.9851}},
    {"DenseNet+Wavelet+Fox", {0.9743, 0.9742, 0.9723, 0.9683, 0.9813}},
    {"DenseNet+Wavelet+MGTO", {0.9744, 0.9712, 0.9710, 0.9676, 0.9823}},
    {"MobileNet", {0.9709, 0.9800, 0.9713, 0.9687, 0.9780}},
    {"MobileNet+Wavelet", {0.9809, 0.9712, 0.9710, 0.9802, 0.9702}},
    {"MobileNet+Wavelet+IGWO", {0.9831, 0.9804, 0.9810, 0.9810, 0.9813}},
    {"MobileNet+Wavelet+Fox", {0.9876, 0.9612, 0.9700, 0.9822, 0.9743}},
    {"MobileNet+Wavelet+MGTO", {0.9811, 0.9604, 0.9805, 0.9799, 0.9823}},
};

const std::vector<PublishedFamily> kPublished2016Data = {
    {"Xception",
     {"Xception", "Xception+Wavelet", "Xception+Wavelet+IGWO", "Xception+Wavelet+Fox", "Xception+Wavelet+MGTO"},
     {
      {{0.0, 1.0}, {-4.1328, 0.0032}, {-3.5555, 0.0074}, {-3.2377, 0.01191}, {-3.935, 0.0043}},
      {{4.1328, 0.0032}, {0.0, 1.0}, {0.689, 0.5102}, {0.3282, 0.7511}, {-0.3569, 0.7303}},
      {{3.5555, 0.0074}, {-0.689, 0.5102}, {0.0, 1.0}, {-0.1031, 0.9204}, {-0.7791, 0.4583}},
      {{3.2377, 0.01191}, {-0.3282, 0.7511}, {0.1031, 0.9204}, {0.0, 1.0}, {-0.4959, 0.6332}},
      {{3.935, 0.0043}, {0.3569, 0.7303}, {0.7791, 0.4583}, {0.4959, 0.6332}, {0.0, 1.0}},
     }},
    {"Inception",
     {"Inception", "Inception+Wavelet", "Inception+Wavelet+IGWO", "Inception+Wavelet+Fox", "Inception+Wavelet+MGTO"},
     {
      {{0.0, 1.0}, {-1.9801, 0.083}, {-3.5697, 0.0072}, {-3.3192, 0.0105}, {-4.1243, 0.0033}},
      {{1.9801, 0.083}, {0.0, 1.0}, {-2.5466, 0.0343}, {-2.1246, 0.0663}, {-3.5868, 0.0071}},
      {{3.5697, 0.0072}, {2.5466, 0.0343}, {0.0, 1.0}, {0.93, 0.3795}, {-1.3405, 0.2168}},
      {{3.3192, 0.0105}, {2.1246, 0.0663}, {-0.93, 0.3795}, {0.0, 1.0}, {-2.6962, 0.0272}},
      {{4.1243, 0.0033}, {3.5868, 0.0071}, {1.3405, 0.2168}, {2.6962, 0.0272}, {0.0, 1.0}},
     }},
    {"DenseNet",
     {"DenseNet", "DenseNet+Wavelet", "DenseNet+Wavelet+IGWO", "DenseNet+Wavelet+Fox", "DenseNet+Wavelet+MGTO"},
     {
      {{0.0, 1.0}, {-0.0705, 0.9454}, {-2.3359, 0.0477}, {-1.0857, 0.3092}, {-0.6534, 0.5318}},
      {{0.0705, 0.9454}, {0.0, 1.0}, {-1.1801, 0.2718}, {-0.4831, 0.6419}, {-0.3026, 0.7698}},
      {{2.3359, 0.0477}, {1.1801, 0.2718}, {0.0, 1.0}, {1.0702, 0.3157}, {1.2137, 0.2594}},
      {{1.0857, 0.3092}, {0.4831, 0.6419}, {-1.0702, 0.3157}, {0.0, 1.0}, {0.2389, 0.8171}},
      {{0.6534, 0.5318}, {0.3026, 0.7698}, {-1.2137, 0.2594}, {-0.2389, 0.8171}, {0.0, 1.0}},
     }},
    {"MobileNet",
     {"MobileNet", "MobileNet+Wavelet", "MobileNet+Wavelet+IGWO", "MobileNet+Wavelet+Fox", "MobileNet+Wavelet+MGTO"},
     {
      {{0.0, 1.0}, {-0.2828, 0.7844}, {-3.3737, 0.0097}, {-0.2502, 0.8087}, {-0.654, 0.5314}},
      {{0.2828, 0.7844}, {0.0, 1.0}, {-2.7292, 0.0258}, {-0.0691, 0.9465}, {-0.4482, 0.6658}},
      {{3.3737, 0.0097}, {2.7292, 0.0258}, {0.0, 1.0}, {1.3575, 0.2116}, {1.0879, 0.3082}},
      {{0.2502, 0.8087}, {0.0691, 0.9465}, {-1.3575, 0.2116}, {0.0, 1.0}, {-0.2873, 0.7811}},
      {{0.654, 0.5314}, {0.4482, 0.6658}, {-1.0879, 0.3082}, {0.2873, 0.7811}, {0.0, 1.0}},
     }},
};

FoldTable to_table(const std::vector<FoldRow>& rows)
{
    FoldTable t;
    for (const auto& r : rows) {
        t.models.emplace_back(r.model);
        t.folds.emplace_back(r.folds.begin(), r.folds.end());
    }
    return t;
}

} // namespace

std::filesystem::path default_dir() { return SWDO_FIXTURE_DIR; }

std::filesystem::path path_of(std::string_view name, const std::filesystem::path& dir)
{
    return dir / (std::string(name) + "_folds.csv");
}

FoldTable builtin(std::string_view name)
{
    if (name == "isic2016")
        return to_table(kIsic2016);
    if (name == "isic2017")
        return to_table(kIsic2017);
    if (name == "isic2016_amended")
        return to_table(kIsic2016Amended);
    throw DataError("unknown fixture '" + std::string(name) + "' (expected isic2016, isic2017 or isic2016_amended)");
}

FoldTable load(std::string_view name, const std::filesystem::path& dir)
{
    const FoldTable expected = builtin(name);
    const auto path = path_of(name, dir);
    FoldTable got;
    try {
        got = read_fold_table(path);
    } catch (const DataError& e) {
        throw DataError("fixture '" + std::string(name) + "' is unreadable: " + e.what());
    }
    if (got.models != expected.models || got.folds != expected.folds)
        throw DataError("fixture '" + std::string(name) + "' (" + path.string() +
                        ") does not match the bundled values; it has been modified or corrupted");
    return got;
}

const std::vector<PublishedFamily>& published_isic2016() { return kPublished2016Data; }

} // namespace swdo::fixtures
