#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mailsig/stats.hpp"
#include "mailsig/types.hpp"

namespace mailsig {

/// One (actor, period) observation before assembly. Absent map entries and
/// empty optionals both mean "missing".
struct PanelRow {
    ActorId actor;
    std::size_t period = 0;
    std::map<std::string, std::optional<double>> values;
    std::optional<int> label;
};

struct DesignMatrix {
    Matrix x;  // standardized, median-imputed, mask columns appended
    std::vector<int> y;
    std::vector<std::size_t> period;
    std::vector<ActorId> actor;
    std::vector<std::string> feature_names;
    std::vector<std::string> dropped;  // all-missing or zero-variance features
    Standardization scaling;           // aligned with feature_names
};

/// Joins and standardizes the panel. Rows without a label are excluded;
/// features with any missing value gain a <name>_missing mask column.
/// An empty feature_order means "all keys seen, sorted".
DesignMatrix assemble(const std::vector<PanelRow>& rows,
                      std::vector<std::string> feature_order = {});

// --- logistic regression ------------------------------------------------

/// beta[0] is the intercept; x rows carry no leading constant.
double logistic_log_likelihood(const Matrix& x, std::span<const int> y,
                               std::span<const double> beta);
std::vector<double> logistic_gradient(const Matrix& x, std::span<const int> y,
                                      std::span<const double> beta);

struct LogisticFit {
    std::vector<double> beta;
    double log_likelihood = 0;  // unpenalized, at the fitted beta
    bool ridge_fallback = false;
    bool converged = true;
};

/// Newton-Raphson with step halving; separation triggers a ridge refit
/// (penalty 1e-4) flagged in the result.
LogisticFit fit_logistic(const Matrix& x, std::span<const int> y, double ridge = 0.0);

// --- PLS components + logistic link --------------------------------------

struct PlsLogitModel {
    std::size_t n_components = 0;
    Matrix w_star;       // features x components; scores = x_row * w_star
    Matrix train_scores; // rows x components, mutually orthogonal
    LogisticFit logit;   // over component scores (+ period dummy last if used)
    bool period_dummy = false;
    double pseudo_r2 = 0;  // McFadden
    double aic = 0;
};

PlsLogitModel fit_pls_logit(const Matrix& x, std::span<const int> y, std::size_t n_components,
                            std::span<const std::size_t> periods = {}, bool period_dummy = false);
double pls_logit_prob(const PlsLogitModel& model, std::span<const double> xrow,
                      std::size_t period = 0);

// --- AdaBoost -------------------------------------------------------------

enum class WeakKind { stump, logit1 };
WeakKind parse_weak_kind(const std::string& name);

struct WeakLearner {
    WeakKind kind = WeakKind::stump;
    std::size_t feature = 0;
    double threshold = 0;  // stump: predict polarity when x > threshold
    int polarity = 1;
    double b0 = 0, b1 = 0;  // logit1 coefficients

    int predict(std::span<const double> xrow) const;  // +-1
};

struct AdaBoostModel {
    std::vector<WeakLearner> learners;
    std::vector<double> alphas;
    std::vector<double> round_errors;  // weighted error of each accepted round

    double score(std::span<const double> xrow) const;  // additive margin F(x)
    double prob(std::span<const double> xrow) const;   // sigmoid(2 F(x))
};

/// Discrete AdaBoost; stops early on a perfect or useless round. A first
/// round with weighted error >= 0.5 is a DataError.
AdaBoostModel fit_adaboost(const Matrix& x, std::span<const int> y, std::size_t rounds,
                           WeakKind weak = WeakKind::stump);

// --- evaluation -----------------------------------------------------------

struct ModelSpec {
    std::string kind = "adaboost";  // "adaboost" or "pls_logit"
    std::size_t components = 2;
    std::size_t rounds = 50;
    WeakKind weak = WeakKind::stump;
    bool period_dummy = false;
    double threshold = 0.5;
};

struct FittedModel {
    ModelSpec spec;
    PlsLogitModel pls;
    AdaBoostModel boost;

    double prob(std::span<const double> xrow, std::size_t period = 0) const;
};

FittedModel fit_model(const DesignMatrix& design, const ModelSpec& spec);

struct RocPoint {
    double threshold = 0;
    double fpr = 0;
    double tpr = 0;
};

/// Descending-threshold sweep over the distinct scores, tied scores
/// grouped; starts at (0,0), ends at (1,1).
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);
double auc(std::span<const RocPoint> roc);

double cohen_kappa(std::span<const int> a, std::span<const int> b);

struct EvalReport {
    double accuracy = 0;
    double kappa = 0;
    double sensitivity = 0;
    double specificity = 0;
    double auc = 0;
    std::vector<RocPoint> roc;
    std::size_t skipped_folds = 0;
    std::vector<double> scores;  // pooled held-out probabilities
    std::vector<int> labels;     // labels of the evaluated rows
};

EvalReport evaluate_loocv(const DesignMatrix& design, const ModelSpec& spec);

struct PeriodTest {
    double statistic = 0;
    double p_value = 1;
    bool converged = true;
};

/// Likelihood-ratio test of the period dummy over the PLS-score logistic
/// model, chi-square with one degree of freedom.
PeriodTest likelihood_ratio_period_test(const DesignMatrix& design, std::size_t n_components);

}  // namespace mailsig
