#include "swdo/tuner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include <json.hpp>

#include "swdo/dataset.hpp"
#include "swdo/format.hpp"

namespace swdo {

HyperSpace HyperSpace::table()
{
    HyperSpace s;
    s.lower = {64, 3, 1e-5, 1e-5, 1e-5, 16, 10, 1e-5};
    s.upper = {256, 9, 1e-2, 1e-2, 1e-2, 128, 100, 1e-3};
    return s;
}

HyperSpace HyperSpace::desk()
{
    HyperSpace s;
    s.lower = {2, 3, 1e-3, 1e-5, 1e-5, 16, 2, 1e-5};
    s.upper = {8, 9, 1e-1, 1e-2, 1e-2, 64, 6, 1e-3};
    s.desk_scale = true;
    return s;
}

SearchSpace<double> encode_space() { return SearchSpace<double>::box(HyperSpace::dims, 0.0, 1.0); }

namespace {

int decode_int(double x, double lo, double hi) { return static_cast<int>(std::floor(lo + x * (hi - lo) + 0.5)); }

double decode_log(double x, double lo, double hi)
{
    if (x <= 0.0)
        return lo;
    if (x >= 1.0)
        return hi;
    return std::pow(10.0, std::log10(lo) + x * (std::log10(hi) - std::log10(lo)));
}

} // namespace

Decoded decode(const Position<double>& x, const HyperSpace& space)
{
    if (x.size() != static_cast<Eigen::Index>(HyperSpace::dims))
        throw ContractError("decode: position must have 8 coordinates");
    Decoded d;
    std::array<double, HyperSpace::dims> u{};
    for (std::size_t i = 0; i < HyperSpace::dims; ++i) {
        const double v = x[static_cast<Eigen::Index>(i)];
        u[i] = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
        d.clamped = d.clamped || u[i] != v;
    }
    const auto& lo = space.lower;
    const auto& hi = space.upper;
    auto& c = d.config;
    c.filters_size = decode_int(u[0], lo[0], hi[0]);
    c.kernel_size = decode_int(u[1], lo[1], hi[1]);
    if (c.kernel_size % 2 == 0)
        c.kernel_size += c.kernel_size + 1 <= hi[1] ? 1 : -1;
    c.lr = decode_log(u[2], lo[2], hi[2]);
    c.l2_reg = decode_log(u[3], lo[3], hi[3]);
    c.l1_reg = decode_log(u[4], lo[4], hi[4]);
    c.batch_size = decode_int(u[5], lo[5], hi[5]);
    c.epochs = decode_int(u[6], lo[6], hi[6]);
    c.att_reg_weight = decode_log(u[7], lo[7], hi[7]);
    return d;
}

Position<double> encode(const ModelConfig& c, const HyperSpace& space)
{
    const std::array<double, HyperSpace::dims> v{static_cast<double>(c.filters_size),
                                                 static_cast<double>(c.kernel_size),
                                                 c.lr,
                                                 c.l2_reg,
                                                 c.l1_reg,
                                                 static_cast<double>(c.batch_size),
                                                 static_cast<double>(c.epochs),
                                                 c.att_reg_weight};
    Position<double> x(HyperSpace::dims);
    for (std::size_t i = 0; i < HyperSpace::dims; ++i) {
        const double lo = space.lower[i], hi = space.upper[i];
        const double u = HyperSpace::log_scale[i]
                             ? (std::log10(v[i]) - std::log10(lo)) / (std::log10(hi) - std::log10(lo))
                             : (v[i] - lo) / (hi - lo);
        x[static_cast<Eigen::Index>(i)] = std::clamp(u, 0.0, 1.0);
    }
    return x;
}

std::uint64_t config_hash(const ModelConfig& c)
{
    return hash_combine({static_cast<std::uint64_t>(c.filters_size), static_cast<std::uint64_t>(c.kernel_size),
                         std::bit_cast<std::uint64_t>(c.lr), std::bit_cast<std::uint64_t>(c.l2_reg),
                         std::bit_cast<std::uint64_t>(c.l1_reg), static_cast<std::uint64_t>(c.batch_size),
                         static_cast<std::uint64_t>(c.epochs), std::bit_cast<std::uint64_t>(c.att_reg_weight)});
}

TrainingFitness::TrainingFitness(std::vector<LabeledImage> data, std::uint64_t seed, bool desk_scale,
                                 double val_fraction, int attention_dim)
    : seed_(seed), desk_scale_(desk_scale), attention_dim_(attention_dim)
{
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto split = train_val_split(std::move(idx), seed, val_fraction);
    train_ = gather(data, split.train);
    val_ = gather(data, split.val);
}

std::uint64_t TrainingFitness::training_seed(const ModelConfig& c) const
{
    return hash_combine({seed_, config_hash(c)});
}

std::size_t TrainingFitness::trainings() const
{
    std::lock_guard lock(mutex_);
    return trainings_;
}

FitnessOutcome TrainingFitness::operator()(const ModelConfig& c)
{
    const auto key = describe(c);
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end())
            return it->second;
    }
    FitnessOutcome out;
    out.seed = training_seed(c);
    try {
        validate(c, desk_scale_);
        const auto r = train(c, train_, val_, out.seed, attention_dim_);
        out.val_accuracy = r.best_val_accuracy;
        out.fitness = 1.0 - r.best_val_accuracy;
    } catch (const std::exception& e) {
        out.fitness = std::numeric_limits<double>::infinity();
        out.cause = e.what();
    }
    std::lock_guard lock(mutex_);
    ++trainings_;
    cache_.emplace(key, out);
    return out;
}

TuneReport tune(Algorithm algorithm, const ConfigFitness& fitness, const TuneOptions& opts)
{
    opts.budget.validate();
    std::mutex log_mutex;
    std::vector<EvalLogRow> log;
    const Objective<double> objective([&](const Position<double>& x, const EvalContext& ctx) {
        const auto d = decode(x, opts.space);
        EvalLogRow row;
        row.iteration = ctx.iteration;
        row.agent = ctx.agent;
        row.phase = ctx.phase;
        row.config = d.config;
        row.clamped = d.clamped;
        FitnessOutcome out;
        try {
            out = fitness(d.config, x);
        } catch (const std::exception& e) {
            out.fitness = std::numeric_limits<double>::infinity();
            out.cause = e.what();
        }
        if (!std::isfinite(out.fitness)) {
            out.fitness = std::numeric_limits<double>::infinity();
            if (out.cause.empty())
                out.cause = "non-finite fitness";
        }
        row.fitness = out.fitness;
        row.val_accuracy = out.val_accuracy;
        row.seed = out.seed;
        row.cause = out.cause;
        row.cached = out.config_keyed; // resolved after sorting
        std::lock_guard lock(log_mutex);
        log.push_back(std::move(row));
        return out.fitness;
    });

    const auto result =
        optimize(algorithm, objective, encode_space(), opts.budget, opts.seed, opts.params, RunOptions{opts.workers});

    std::sort(log.begin(), log.end(), [](const EvalLogRow& a, const EvalLogRow& b) {
        return std::tie(a.iteration, a.phase, a.agent) < std::tie(b.iteration, b.phase, b.agent);
    });
    TuneReport r;
    r.algorithm = algorithm;
    r.seed = opts.seed;
    r.budget = opts.budget;
    r.history = result.history;
    std::set<std::string> seen;
    for (auto& row : log) {
        const bool keyed = row.cached;
        row.cached = keyed && !seen.insert(describe(row.config)).second;
        r.cache_hits += static_cast<std::size_t>(row.cached);
    }
    r.log = std::move(log);
    if (r.log.empty())
        throw ContractError("tune: optimizer made no evaluations");
    const auto best = std::min_element(r.log.begin(), r.log.end(),
                                       [](const EvalLogRow& a, const EvalLogRow& b) { return a.fitness < b.fitness; });
    r.best_config = best->config;
    r.best_fitness = best->fitness;
    r.best_val_accuracy = best->val_accuracy;
    return r;
}

TuneReport tune(Algorithm algorithm, const std::vector<LabeledImage>& data, const TuneOptions& opts)
{
    TrainingFitness fit(data, opts.seed, opts.space.desk_scale);
    return tune(algorithm, [&](const ModelConfig& c, const Position<double>&) { return fit(c); }, opts);
}

double surrogate_bowl(const Position<double>& x) { return (x - 0.5).square().sum(); }

ConfigFitness surrogate_fitness()
{
    return [](const ModelConfig&, const Position<double>& x) {
        FitnessOutcome out;
        out.fitness = surrogate_bowl(x);
        out.config_keyed = false;
        return out;
    };
}

void write_tune_log_csv(std::ostream& out, const TuneReport& r)
{
    out << "iteration,agent,filters,kernel,lr,l2,l1,batch,epochs,att_reg,fitness,seed,phase,cached\n";
    for (const auto& row : r.log) {
        const auto& c = row.config;
        out << row.iteration << ',' << row.agent << ',' << c.filters_size << ',' << c.kernel_size << ','
            << format_double(c.lr) << ',' << format_double(c.l2_reg) << ',' << format_double(c.l1_reg) << ','
            << c.batch_size << ',' << c.epochs << ',' << format_double(c.att_reg_weight) << ','
            << format_double(row.fitness) << ',' << row.seed << ',' << row.phase << ',' << (row.cached ? 1 : 0)
            << '\n';
    }
}

namespace {

nlohmann::json to_json(const ModelConfig& c)
{
    return {{"filters_size", c.filters_size}, {"kernel_size", c.kernel_size}, {"lr", c.lr},
            {"l2_reg", c.l2_reg},             {"l1_reg", c.l1_reg},           {"batch_size", c.batch_size},
            {"epochs", c.epochs},             {"att_reg_weight", c.att_reg_weight}};
}

// JSON number that survives non-finite values.
nlohmann::json number(double v)
{
    if (std::isfinite(v))
        return v;
    return format_double(v);
}

} // namespace

std::string config_json_text(const ModelConfig& c) { return to_json(c).dump(); }

std::string tune_report_json(const TuneReport& r)
{
    nlohmann::json history = nlohmann::json::array();
    for (const auto& h : r.history)
        history.push_back({{"best", number(h.best)}, {"mean", number(h.mean)}});
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& row : r.log)
        if (!row.cause.empty())
            failures.push_back({{"iteration", row.iteration}, {"agent", row.agent}, {"cause", row.cause}});
    nlohmann::json j = {{"algorithm", std::string(to_string(r.algorithm))},
                        {"seed", r.seed},
                        {"population", r.budget.population_size},
                        {"iterations", r.budget.max_iterations},
                        {"best_config", to_json(r.best_config)},
                        {"best_fitness", number(r.best_fitness)},
                        {"best_val_accuracy", r.best_val_accuracy},
                        {"evaluations", r.log.size()},
                        {"cache_hits", r.cache_hits},
                        {"history", history},
                        {"failures", failures}};
    return j.dump(2);
}

} // namespace swdo
