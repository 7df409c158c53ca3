#ifndef SWDO_TUNER_HPP
#define SWDO_TUNER_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "swdo/minimodel.hpp"
#include "swdo/optimizers.hpp"

namespace swdo {

/// Physical bounds of the eight tuned dimensions, in this order:
/// filters, kernel, lr, l2, l1, batch, epochs, att_reg.
struct HyperSpace {
    static constexpr std::size_t dims = 8;
    static constexpr std::array<std::string_view, dims> names{"filters", "kernel", "lr",     "l2",
                                                              "l1",      "batch",  "epochs", "att_reg"};
    static constexpr std::array<bool, dims> integer{true, true, false, false, false, true, true, false};
    static constexpr std::array<bool, dims> log_scale{false, false, true, true, true, false, false, true};

    std::array<double, dims> lower{}, upper{};
    /// Configs outside the tuning table are allowed (validated loosely).
    bool desk_scale = false;

    /// The published tuning ranges.
    static HyperSpace table();
    /// A reduced box that trains in about a second on one core at 32x32.
    static HyperSpace desk();
};

/// The unit box [0, 1]^8 the optimizers search.
SearchSpace<double> encode_space();

struct Decoded {
    ModelConfig config;
    bool clamped = false; ///< the position left the unit box
};

/// Unit position -> config. Integer dimensions map linearly and round half
/// up (kernel then bumps to the next odd value); the other four map linearly
/// in log10. Out-of-box coordinates are clamped and flagged.
Decoded decode(const Position<double>& x, const HyperSpace& space = HyperSpace::table());

/// Inverse of decode for configs inside the space (integers land exactly).
Position<double> encode(const ModelConfig& c, const HyperSpace& space = HyperSpace::table());

/// Result of one fitness call.
struct FitnessOutcome {
    double fitness = 0.0;
    double val_accuracy = 0.0;
    std::uint64_t seed = 0;
    std::string cause; ///< why fitness is +inf, if it is
    bool config_keyed = true; ///< identical configs always score identically
};

/// Validation-error fitness on a fixed 85/15 split. Results are cached by
/// config; each config trains with seed hash(master, config), so any
/// evaluation order gives the same numbers.
class TrainingFitness {
public:
    TrainingFitness(std::vector<LabeledImage> data, std::uint64_t seed, bool desk_scale = false,
                    double val_fraction = 0.15, int attention_dim = 4);

    FitnessOutcome operator()(const ModelConfig& c);

    std::uint64_t training_seed(const ModelConfig& c) const;
    std::size_t trainings() const;
    const std::vector<LabeledImage>& train_set() const noexcept { return train_; }
    const std::vector<LabeledImage>& val_set() const noexcept { return val_; }

private:
    std::vector<LabeledImage> train_, val_;
    std::uint64_t seed_;
    bool desk_scale_;
    int attention_dim_;
    mutable std::mutex mutex_;
    std::map<std::string, FitnessOutcome> cache_;
    std::size_t trainings_ = 0;
};

std::uint64_t config_hash(const ModelConfig& c);

struct EvalLogRow {
    std::size_t iteration = 0;
    std::size_t agent = 0;
    std::size_t phase = 0; ///< 1 for opposition-point evaluations
    ModelConfig config;
    bool clamped = false;
    double fitness = 0.0;
    double val_accuracy = 0.0;
    std::uint64_t seed = 0;
    bool cached = false; ///< an earlier row already evaluated this config
    std::string cause;
};

struct TuneReport {
    Algorithm algorithm = Algorithm::mgto;
    std::uint64_t seed = 0;
    Budget budget;
    ModelConfig best_config;
    double best_fitness = 0.0;
    double best_val_accuracy = 0.0;
    std::vector<IterationRecord> history;
    /// Sorted by (iteration, phase, agent).
    std::vector<EvalLogRow> log;
    std::size_t cache_hits = 0;
};

struct TuneOptions {
    Budget budget{6, 8};
    std::uint64_t seed = 0;
    HyperSpace space = HyperSpace::table();
    OptimizerParams params;
    std::size_t workers = 1;
};

using ConfigFitness = std::function<FitnessOutcome(const ModelConfig&, const Position<double>&)>;

/// Runs `algorithm` over encode_space() with `fitness`, logging every call.
TuneReport tune(Algorithm algorithm, const ConfigFitness& fitness, const TuneOptions& opts);

/// Training-based tuning on `data`.
TuneReport tune(Algorithm algorithm, const std::vector<LabeledImage>& data, const TuneOptions& opts);

/// Quadratic bowl sum((x - 0.5)^2) on the unit box, optimum at the centre.
double surrogate_bowl(const Position<double>& x);

ConfigFitness surrogate_fitness();

void write_tune_log_csv(std::ostream& out, const TuneReport& r);
std::string tune_report_json(const TuneReport& r);
std::string config_json_text(const ModelConfig& c);

} // namespace swdo

#endif
