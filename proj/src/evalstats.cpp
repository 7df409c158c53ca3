#include "swdo/evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "swdo/format.hpp"

namespace swdo {

ConfusionCounts confusion(std::span<const double> probs, std::span<const int> labels, double threshold)
{
    if (probs.size() != labels.size())
        throw std::invalid_argument("confusion: probs and labels differ in length");
    if (probs.empty())
        throw std::invalid_argument("confusion: empty input");
    ConfusionCounts c;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const bool predicted = probs[i] >= threshold;
        const bool actual = labels[i] != 0;
        if (predicted && actual)
            ++c.tp;
        else if (!predicted && !actual)
            ++c.tn;
        else if (predicted)
            ++c.fp;
        else
            ++c.fn;
    }
    return c;
}

namespace {

Metric ratio(std::uint64_t num, std::uint64_t den)
{
    if (den == 0)
        return {0.0, true};
    return {static_cast<double>(num) / static_cast<double>(den), false};
}

} // namespace

Metric accuracy(const ConfusionCounts& c) { return ratio(c.tp + c.tn, c.total()); }

Metric precision(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fp); }

Metric recall(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fn); }

Metric f_measure(const ConfusionCounts& c)
{
    const Metric p = precision(c), r = recall(c);
    if (p.degenerate || r.degenerate || p.value + r.value == 0.0)
        return {0.0, true};
    return {2.0 * p.value * r.value / (p.value + r.value), false};
}

ClassificationMetrics classification_metrics(const ConfusionCounts& c)
{
    return {accuracy(c), precision(c), recall(c), f_measure(c)};
}

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x)
{
    constexpr int max_iter = 500;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny)
        d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny)
            d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny)
            d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps)
            break;
    }
    return h;
}

} // namespace

double incomplete_beta(double a, double b, double x)
{
    if (!(a > 0.0 && b > 0.0))
        throw std::invalid_argument("incomplete_beta: a and b must be positive");
    if (x <= 0.0)
        return 0.0;
    if (x >= 1.0)
        return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
    return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

namespace {

// P(T > |t|) for Student's t.
double upper_tail(double t, double df)
{
    if (std::isinf(t))
        return 0.0;
    const double x = df / (df + t * t);
    return 0.5 * incomplete_beta(0.5 * df, 0.5, x);
}

} // namespace

double student_t_cdf(double t, double df)
{
    if (!(df > 0.0))
        throw std::invalid_argument("student_t_cdf: df must be positive");
    if (std::isnan(t))
        return std::numeric_limits<double>::quiet_NaN();
    const double tail = upper_tail(t, df);
    return t > 0.0 ? 1.0 - tail : tail;
}

TTestResult ttest(std::span<const double> s1, std::span<const double> s2, DfRule rule)
{
    if (s1.size() < 2 || s2.size() < 2)
        throw std::invalid_argument("ttest: each sample needs at least 2 values");
    const double n1 = static_cast<double>(s1.size()), n2 = static_cast<double>(s2.size());
    const double m1 = std::accumulate(s1.begin(), s1.end(), 0.0) / n1;
    const double m2 = std::accumulate(s2.begin(), s2.end(), 0.0) / n2;
    auto sample_var = [](std::span<const double> s, double m) {
        double acc = 0.0;
        for (double v : s)
            acc += (v - m) * (v - m);
        return acc / static_cast<double>(s.size() - 1);
    };
    const double q1 = sample_var(s1, m1) / n1;
    const double q2 = sample_var(s2, m2) / n2;

    TTestResult r;
    r.df = rule == DfRule::pooled ? n1 + n2 - 2.0
                                  : (q1 + q2) * (q1 + q2) / (q1 * q1 / (n1 - 1.0) + q2 * q2 / (n2 - 1.0));
    const double se = std::sqrt(q1 + q2);
    const double diff = m1 - m2;
    if (se == 0.0) {
        if (!std::isfinite(r.df))
            r.df = n1 + n2 - 2.0;
        if (diff == 0.0)
            return {0.0, 1.0, r.df};
        return {std::copysign(std::numeric_limits<double>::infinity(), diff), 0.0, r.df};
    }
    r.statistic = diff / se;
    r.p_value = std::clamp(2.0 * upper_tail(r.statistic, r.df), 0.0, 1.0);
    return r;
}

std::size_t FoldTable::index_of(const std::string& model) const
{
    const auto it = std::find(models.begin(), models.end(), model);
    if (it == models.end())
        throw DataError("fold table has no model '" + model + "'");
    return static_cast<std::size_t>(it - models.begin());
}

void FoldTable::validate() const
{
    if (models.size() != folds.size())
        throw DataError("fold table: model and row counts differ");
    for (std::size_t i = 0; i < folds.size(); ++i) {
        if (folds[i].size() != fold_count())
            throw DataError("fold table: model '" + models[i] + "' has a different fold count");
        for (double v : folds[i])
            if (!(v >= 0.0 && v <= 1.0))
                throw DataError("fold table: accuracy outside [0, 1] for model '" + models[i] + "'");
    }
}

FoldTable read_fold_table(std::istream& in)
{
    FoldTable t;
    std::string line;
    std::size_t line_no = 0;
    std::size_t k = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        auto cells = split_csv_line(line);
        if (k == 0) {
            if (cells.size() < 3 || to_lower(cells[0]) != "model")
                throw DataError("fold table line " + std::to_string(line_no) +
                                ": expected header 'model,fold1,...' with at least 2 folds");
            k = cells.size() - 1;
            continue;
        }
        if (cells.size() != k + 1)
            throw DataError("fold table line " + std::to_string(line_no) + ": expected " + std::to_string(k + 1) +
                            " columns, found " + std::to_string(cells.size()));
        std::vector<double> row;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cells[c], &used));
                if (used != cells[c].size())
                    throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw DataError("fold table line " + std::to_string(line_no) + ": '" + cells[c] + "' is not a number");
            }
        }
        t.models.push_back(cells[0]);
        t.folds.push_back(std::move(row));
    }
    if (k == 0)
        throw DataError("fold table: missing header");
    if (t.models.empty())
        throw DataError("fold table: no model rows");
    t.validate();
    return t;
}

FoldTable read_fold_table(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open fold table " + path.string());
    try {
        return read_fold_table(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_fold_table(std::ostream& out, const FoldTable& t)
{
    out << "model";
    for (std::size_t k = 0; k < t.fold_count(); ++k)
        out << ",fold" << k + 1;
    out << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << t.models[i];
        for (double v : t.folds[i])
            out << ',' << format_double(v);
        out << '\n';
    }
}

ComparisonMatrix comparison_matrix(const FoldTable& t, std::span<const std::size_t> rows, DfRule rule)
{
    if (rows.size() < 2)
        throw std::invalid_argument("comparison_matrix: need at least 2 models");
    ComparisonMatrix m;
    for (auto r : rows)
        m.models.push_back(t.models.at(r));
    m.cells.resize(rows.size() * rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.size(); ++j)
            m.cells[i * rows.size() + j] =
                i == j ? TTestResult{0.0, 1.0, 2.0 * t.fold_count() - 2.0}
                       : ttest(t.folds[rows[i]], t.folds[rows[j]], rule);
    return m;
}

ComparisonMatrix comparison_matrix(const FoldTable& t, DfRule rule)
{
    std::vector<std::size_t> rows(t.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return comparison_matrix(t, rows, rule);
}

void write_comparison_csv(std::ostream& out, const ComparisonMatrix& m)
{
    out << "model_a,model_b,statistic,p_value\n";
    const auto n = m.models.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out << m.models[i] << ',' << m.models[j] << ',' << format_double(m.at(i, j).statistic) << ','
                << format_double(m.at(i, j).p_value) << '\n';
}

} // namespace swdo
