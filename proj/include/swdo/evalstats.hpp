#ifndef SWDO_EVALSTATS_HPP
#define SWDO_EVALSTATS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace swdo {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Melanoma is the positive class.
struct ConfusionCounts {
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;

    std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// A metric value; `degenerate` is set when the denominator was zero and the
/// value was defined as 0.
struct Metric {
    double value = 0.0;
    bool degenerate = false;
};

/// Tally predictions (prob >= threshold is positive) against binary labels.
ConfusionCounts confusion(std::span<const double> probs, std::span<const int> labels, double threshold = 0.5);

Metric accuracy(const ConfusionCounts& c);
Metric precision(const ConfusionCounts& c);
Metric recall(const ConfusionCounts& c);
Metric f_measure(const ConfusionCounts& c);

struct ClassificationMetrics {
    Metric accuracy, precision, recall, f_measure;
};

ClassificationMetrics classification_metrics(const ConfusionCounts& c);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// CDF of Student's t distribution with `df` degrees of freedom.
double student_t_cdf(double t, double df);

enum class DfRule {
    pooled, ///< n1 + n2 - 2
    welch,  ///< Welch-Satterthwaite
};

struct TTestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double df = 0.0;
};

/// Two-sample t statistic (mean difference over sqrt(s1^2/n1 + s2^2/n2)) with a
/// two-sided p-value. Zero spread with equal means gives (0, 1).
TTestResult ttest(std::span<const double> sample1, std::span<const double> sample2, DfRule rule = DfRule::pooled);

/// Per-model fold accuracies.
struct FoldTable {
    std::vector<std::string> models;
    std::vector<std::vector<double>> folds;

    std::size_t size() const noexcept { return models.size(); }
    std::size_t fold_count() const noexcept { return folds.empty() ? 0 : folds.front().size(); }
    std::size_t index_of(const std::string& model) const;
    void validate() const;
};

/// Parses `model,fold1..foldk` CSV. Throws DataError with the line number.
FoldTable read_fold_table(std::istream& in);
FoldTable read_fold_table(const std::filesystem::path& path);
void write_fold_table(std::ostream& out, const FoldTable& t);

/// Square matrix of pairwise results, row-major.
struct ComparisonMatrix {
    std::vector<std::string> models;
    std::vector<TTestResult> cells;

    const TTestResult& at(std::size_t i, std::size_t j) const { return cells[i * models.size() + j]; }
};

ComparisonMatrix comparison_matrix(const FoldTable& t, DfRule rule = DfRule::pooled);
ComparisonMatrix comparison_matrix(const FoldTable& t, std::span<const std::size_t> rows, DfRule rule = DfRule::pooled);

/// CSV with columns model_a,model_b,statistic,p_value (every ordered pair).
void write_comparison_csv(std::ostream& out, const ComparisonMatrix& m);

} // namespace swdo

#endif
