#ifndef SWDO_DATASET_HPP
#define SWDO_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <utility>
#include <vector>

#include "swdo/core.hpp"
#include "swdo/image.hpp"
#include "swdo/rng.hpp"

namespace swdo {

/// Balanced two-class set of size x size grayscale images. Label 1 samples are
/// irregular blobs with fine texture, label 0 samples smooth ellipses. Labels
/// alternate 0, 1, 0, ...
std::vector<LabeledImage> generate_synthetic(std::size_t n, std::uint64_t seed, int size = 32);

/// Maps melanoma/1 -> 1 and benign/0 -> 0, case-insensitive. Returns -1 otherwise.
int parse_label(std::string_view text);

/// Reads a `filename,label` CSV. Filenames are relative to the manifest's
/// directory. Errors name the 1-based data row.
std::vector<LabeledImage> load_manifest(const std::filesystem::path& manifest);

/// Bilinear resampling with corner-aligned sample positions.
Image resize_bilinear(const Image& img, int out_h, int out_w);

/// Edge-replicated bilinear sample at fractional (row, col).
double sample_bilinear(const Plane<double>& p, double r, double c);

enum class AugmentOp { hflip, vflip, rot90, rot180, rot270, rotate, zoom, translate };

std::string_view to_string(AugmentOp op);
AugmentOp parse_augment_op(std::string_view name);

/// Parameters read by the continuous ops.
struct AugmentParams {
    double degrees = 0.0; ///< rotate: counter-clockwise about the centre
    double zoom = 1.0;    ///< zoom: > 1 magnifies
    int shift_rows = 0;   ///< translate: content moves down
    int shift_cols = 0;   ///< translate: content moves right
};

/// Default draw ranges for random augmentation.
struct AugmentRanges {
    double max_degrees = 20.0;
    double min_zoom = 0.9, max_zoom = 1.1;
    double max_shift_fraction = 0.1;
};

/// Flips and quarter turns are exact permutations; the rest resample
/// bilinearly with edge replication.
Image augment(const Image& img, AugmentOp op, const AugmentParams& params = {});

/// Draws the parameters for `op` from `ranges`.
Image augment(const Image& img, AugmentOp op, RngStream& rng, const AugmentRanges& ranges = {});

struct FoldPlan {
    std::size_t k = 0;
    std::vector<std::size_t> assignments; ///< fold of each sample

    std::vector<std::size_t> fold(std::size_t f) const;
    std::vector<std::size_t> complement(std::size_t f) const;
};

/// Seeded shuffle, then round-robin assignment to k folds.
FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

struct TrainValSplit {
    std::vector<std::size_t> train, val;
};

/// Seeded shuffle; the validation part holds max(1, round(fraction * n)) items.
TrainValSplit train_val_split(std::vector<std::size_t> indices, std::uint64_t seed, double val_fraction = 0.15);

/// Copies of data[i] for each index.
std::vector<LabeledImage> gather(const std::vector<LabeledImage>& data, const std::vector<std::size_t>& indices);

/// Sum of squared detail coefficients over all channels.
double detail_energy(const Image& img);

} // namespace swdo

#endif
