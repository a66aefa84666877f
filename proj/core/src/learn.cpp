#include "mailsig/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "mailsig/errors.hpp"

namespace mailsig {

namespace {

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
double softplus(double x) {
    if (x > 0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

}  // namespace

DesignMatrix assemble(const std::vector<PanelRow>& rows, std::vector<std::string> feature_order) {
    std::vector<const PanelRow*> labeled;
    for (const auto& row : rows) {
        if (row.label) labeled.push_back(&row);
    }
    const std::size_t n = labeled.size();

    if (feature_order.empty()) {
        std::set<std::string> names;
        for (const auto* row : labeled) {
            for (const auto& [name, value] : row->values) names.insert(name);
        }
        feature_order.assign(names.begin(), names.end());
    }

    DesignMatrix design;
    design.x.assign(n, {});
    for (const auto* row : labeled) {
        design.y.push_back(*row->label);
        design.period.push_back(row->period);
        design.actor.push_back(row->actor);
    }

    struct MaskColumn {
        std::string name;
        std::vector<double> values;
    };
    std::vector<MaskColumn> masks;

    for (const auto& name : feature_order) {
        std::vector<double> non_missing;
        std::vector<std::optional<double>> raw(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto it = labeled[i]->values.find(name);
            if (it != labeled[i]->values.end() && it->second) {
                raw[i] = *it->second;
                non_missing.push_back(*it->second);
            }
        }
        if (non_missing.empty()) {
            design.dropped.push_back(name);
            continue;
        }
        const double m = mean(non_missing);
        const double sd = sample_sd(non_missing);
        if (sd < 1e-12) {
            design.dropped.push_back(name);
            continue;
        }
        const double med = median(non_missing);
        const bool any_missing = non_missing.size() < n;

        design.feature_names.push_back(name);
        design.scaling.mean.push_back(m);
        design.scaling.sd.push_back(sd);
        MaskColumn mask{name + "_missing", {}};
        for (std::size_t i = 0; i < n; ++i) {
            const double value = raw[i] ? *raw[i] : med;
            design.x[i].push_back((value - m) / sd);
            if (any_missing) mask.values.push_back(raw[i] ? 0.0 : 1.0);
        }
        if (any_missing) masks.push_back(std::move(mask));
    }

    for (auto& mask : masks) {
        const double m = mean(mask.values);
        double sd = sample_sd(mask.values);
        if (sd < 1e-12) sd = 1.0;
        design.feature_names.push_back(mask.name);
        design.scaling.mean.push_back(m);
        design.scaling.sd.push_back(sd);
        for (std::size_t i = 0; i < n; ++i) {
            design.x[i].push_back((mask.values[i] - m) / sd);
        }
    }
    return design;
}

// --- logistic regression ----------------------------------------------------

double logistic_log_likelihood(const Matrix& x, std::span<const int> y,
                               std::span<const double> beta) {
    double ll = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double eta = beta[0];
        for (std::size_t j = 0; j < x[i].size(); ++j) eta += beta[j + 1] * x[i][j];
        ll += y[i] * eta - softplus(eta);
    }
    return ll;
}

std::vector<double> logistic_gradient(const Matrix& x, std::span<const int> y,
                                      std::span<const double> beta) {
    std::vector<double> grad(beta.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double eta = beta[0];
        for (std::size_t j = 0; j < x[i].size(); ++j) eta += beta[j + 1] * x[i][j];
        const double resid = y[i] - sigmoid(eta);
        grad[0] += resid;
        for (std::size_t j = 0; j < x[i].size(); ++j) grad[j + 1] += resid * x[i][j];
    }
    return grad;
}

namespace {

LogisticFit fit_logistic_once(const Matrix& x, std::span<const int> y, double ridge,
                              bool& separated) {
    const std::size_t p = x.empty() ? 0 : x.front().size();
    const std::size_t m = p + 1;
    std::vector<double> beta(m, 0.0);
    separated = false;

    auto penalized = [&](std::span<const double> b) {
        double obj = logistic_log_likelihood(x, y, b);
        for (std::size_t j = 1; j < m; ++j) obj -= ridge * b[j] * b[j];
        return obj;
    };

    bool converged = false;
    double objective = penalized(beta);
    for (int iter = 0; iter < 60; ++iter) {
        auto grad = logistic_gradient(x, y, beta);
        for (std::size_t j = 1; j < m; ++j) grad[j] -= 2.0 * ridge * beta[j];
        double gmax = 0;
        for (double g : grad) gmax = std::max(gmax, std::fabs(g));
        if (gmax < 1e-9) {
            converged = true;
            break;
        }

        // Negated Hessian (positive semi-definite) of the penalized objective.
        Matrix neg_h(m, std::vector<double>(m, 0.0));
        for (std::size_t i = 0; i < x.size(); ++i) {
            double eta = beta[0];
            for (std::size_t j = 0; j < p; ++j) eta += beta[j + 1] * x[i][j];
            const double pr = sigmoid(eta);
            const double w = std::max(pr * (1.0 - pr), 1e-12);
            std::vector<double> row(m);
            row[0] = 1.0;
            for (std::size_t j = 0; j < p; ++j) row[j + 1] = x[i][j];
            for (std::size_t a = 0; a < m; ++a) {
                for (std::size_t b = a; b < m; ++b) neg_h[a][b] += w * row[a] * row[b];
            }
        }
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = 0; b < a; ++b) neg_h[a][b] = neg_h[b][a];
        }
        for (std::size_t j = 1; j < m; ++j) neg_h[j][j] += 2.0 * ridge;

        std::vector<double> step;
        if (!solve_linear(neg_h, grad, step)) {
            separated = true;
            break;
        }
        double scale = 1.0;
        std::vector<double> candidate(m);
        for (int half = 0; half < 40; ++half) {
            for (std::size_t j = 0; j < m; ++j) candidate[j] = beta[j] + scale * step[j];
            const double next = penalized(candidate);
            if (next >= objective - 1e-12) {
                objective = next;
                beta = candidate;
                break;
            }
            scale *= 0.5;
        }
        double bmax = 0;
        for (double b : beta) bmax = std::max(bmax, std::fabs(b));
        if (ridge == 0.0 && bmax > 30.0) {
            separated = true;
            break;
        }
    }

    LogisticFit fit;
    fit.beta = std::move(beta);
    fit.log_likelihood = logistic_log_likelihood(x, y, fit.beta);
    fit.converged = converged;
    return fit;
}

}  // namespace

LogisticFit fit_logistic(const Matrix& x, std::span<const int> y, double ridge) {
    bool separated = false;
    LogisticFit fit = fit_logistic_once(x, y, ridge, separated);
    if (separated && ridge == 0.0) {
        bool still_separated = false;
        fit = fit_logistic_once(x, y, 1e-4, still_separated);
        fit.ridge_fallback = true;
    }
    return fit;
}

// --- PLS ----------------------------------------------------------------------

PlsLogitModel fit_pls_logit(const Matrix& x, std::span<const int> y, std::size_t n_components,
                            std::span<const std::size_t> periods, bool period_dummy) {
    const std::size_t n = x.size();
    if (n == 0) throw DataError("empty design");
    const std::size_t p = x.front().size();
    n_components = std::min(n_components, p);
    if (n_components == 0) throw ConfigError("at least one component required");

    Matrix deflated = x;
    double ybar = 0;
    for (int v : y) ybar += v;
    ybar /= static_cast<double>(n);
    std::vector<double> yc(n);
    for (std::size_t i = 0; i < n; ++i) yc[i] = y[i] - ybar;

    Matrix w_cols, p_cols, t_cols;  // component-major
    for (std::size_t h = 0; h < n_components; ++h) {
        std::vector<double> w(p, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p; ++j) w[j] += deflated[i][j] * yc[i];
        }
        double norm = std::sqrt(dot(w, w));
        if (norm < 1e-12) break;
        for (auto& v : w) v /= norm;

        std::vector<double> t(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) t[i] = dot(deflated[i], w);
        const double tt = dot(t, t);
        if (tt < 1e-12) break;

        std::vector<double> load(p, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p; ++j) load[j] += deflated[i][j] * t[i];
        }
        for (auto& v : load) v /= tt;
        const double c = dot(yc, t) / tt;

        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p; ++j) deflated[i][j] -= t[i] * load[j];
            yc[i] -= c * t[i];
        }
        w_cols.push_back(std::move(w));
        p_cols.push_back(std::move(load));
        t_cols.push_back(std::move(t));
    }
    const std::size_t kept = w_cols.size();
    if (kept == 0) throw DataError("no usable latent component (is y constant?)");

    // W* = W (P^T W)^{-1}: projects the original (already standardized)
    // feature space straight onto the component scores.
    Matrix ptw(kept, std::vector<double>(kept, 0.0));
    for (std::size_t a = 0; a < kept; ++a) {
        for (std::size_t b = 0; b < kept; ++b) ptw[a][b] = dot(p_cols[a], w_cols[b]);
    }
    PlsLogitModel model;
    model.n_components = kept;
    model.period_dummy = period_dummy;
    model.w_star.assign(p, std::vector<double>(kept, 0.0));
    for (std::size_t h = 0; h < kept; ++h) {
        std::vector<double> unit(kept, 0.0);
        unit[h] = 1.0;
        std::vector<double> z;
        if (!solve_linear(ptw, unit, z)) throw DataError("degenerate component loadings");
        for (std::size_t j = 0; j < p; ++j) {
            double value = 0;
            for (std::size_t b = 0; b < kept; ++b) value += w_cols[b][j] * z[b];
            model.w_star[j][h] = value;
        }
    }

    model.train_scores.assign(n, std::vector<double>(kept, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t h = 0; h < kept; ++h) model.train_scores[i][h] = t_cols[h][i];
    }

    Matrix logit_design = model.train_scores;
    if (period_dummy) {
        if (periods.size() != n) throw ConfigError("period vector required for the period dummy");
        for (std::size_t i = 0; i < n; ++i)
            logit_design[i].push_back(periods[i] >= 1 ? 1.0 : 0.0);
    }
    model.logit = fit_logistic(logit_design, y);

    double ll_null = 0;
    if (ybar > 0 && ybar < 1) {
        for (std::size_t i = 0; i < n; ++i) {
            ll_null += y[i] * std::log(ybar) + (1 - y[i]) * std::log(1 - ybar);
        }
    }
    model.pseudo_r2 = ll_null != 0 ? 1.0 - model.logit.log_likelihood / ll_null : 0.0;
    const auto k = static_cast<double>(kept + 1 + (period_dummy ? 1 : 0));
    model.aic = 2.0 * k - 2.0 * model.logit.log_likelihood;
    return model;
}

double pls_logit_prob(const PlsLogitModel& model, std::span<const double> xrow,
                      std::size_t period) {
    double eta = model.logit.beta[0];
    for (std::size_t h = 0; h < model.n_components; ++h) {
        double score = 0;
        for (std::size_t j = 0; j < xrow.size(); ++j) score += xrow[j] * model.w_star[j][h];
        eta += model.logit.beta[h + 1] * score;
    }
    if (model.period_dummy) {
        eta += model.logit.beta[model.n_components + 1] * (period >= 1 ? 1.0 : 0.0);
    }
    return sigmoid(eta);
}

// --- AdaBoost -------------------------------------------------------------------

WeakKind parse_weak_kind(const std::string& name) {
    if (name == "stump") return WeakKind::stump;
    if (name == "logit1") return WeakKind::logit1;
    throw ConfigError("unknown weak learner: " + name + " (expected stump or logit1)");
}

int WeakLearner::predict(std::span<const double> xrow) const {
    if (kind == WeakKind::stump) {
        return xrow[feature] > threshold ? polarity : -polarity;
    }
    return b0 + b1 * xrow[feature] > 0 ? 1 : -1;
}

namespace {

struct WeakFit {
    WeakLearner learner;
    double error = std::numeric_limits<double>::infinity();
};

WeakFit best_stump(const Matrix& x, std::span<const int> t, std::span<const double> w,
                   const std::vector<std::vector<std::size_t>>& sorted) {
    const std::size_t n = x.size();
    const std::size_t p = x.front().size();
    WeakFit best;

    double weight_neg = 0;  // error of "everything is +1"
    for (std::size_t i = 0; i < n; ++i) {
        if (t[i] < 0) weight_neg += w[i];
    }
    double total = weight_neg;
    for (std::size_t i = 0; i < n; ++i) {
        if (t[i] > 0) total += w[i];
    }

    auto consider = [&](std::size_t feature, double threshold, double err_pos) {
        const double err_neg = total - err_pos;
        if (err_pos < best.error) {
            best.error = err_pos;
            best.learner = {WeakKind::stump, feature, threshold, +1, 0, 0};
        }
        if (err_neg < best.error) {
            best.error = err_neg;
            best.learner = {WeakKind::stump, feature, threshold, -1, 0, 0};
        }
    };

    for (std::size_t f = 0; f < p; ++f) {
        const auto& order = sorted[f];
        consider(f, x[order.front()][f] - 1.0, weight_neg);
        double err = weight_neg;  // error of polarity +1 at the current split
        for (std::size_t pos = 0; pos < n; ++pos) {
            const std::size_t i = order[pos];
            err += t[i] > 0 ? w[i] : -w[i];
            if (pos + 1 >= n) continue;  // everything-left equals a polarity flip
            const std::size_t next = order[pos + 1];
            if (x[next][f] == x[i][f]) continue;
            consider(f, 0.5 * (x[i][f] + x[next][f]), err);
        }
    }
    return best;
}

WeakFit best_logit1(const Matrix& x, std::span<const int> t, std::span<const double> w) {
    const std::size_t n = x.size();
    const std::size_t p = x.front().size();
    WeakFit best;
    for (std::size_t f = 0; f < p; ++f) {
        double b0 = 0, b1 = 0;
        for (int iter = 0; iter < 12; ++iter) {
            double g0 = 0, g1 = 0, h00 = 0, h01 = 0, h11 = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double v = x[i][f];
                const double pr = sigmoid(b0 + b1 * v);
                const double y01 = t[i] > 0 ? 1.0 : 0.0;
                const double resid = w[i] * (y01 - pr);
                g0 += resid;
                g1 += resid * v;
                const double curv = w[i] * std::max(pr * (1 - pr), 1e-12);
                h00 += curv;
                h01 += curv * v;
                h11 += curv * v * v;
            }
            const double det = h00 * h11 - h01 * h01;
            if (std::fabs(det) < 1e-14) break;
            const double d0 = (h11 * g0 - h01 * g1) / det;
            const double d1 = (h00 * g1 - h01 * g0) / det;
            b0 += d0;
            b1 += d1;
            if (std::fabs(d0) + std::fabs(d1) < 1e-10) break;
            const double cap = 50.0;
            b0 = std::clamp(b0, -cap, cap);
            b1 = std::clamp(b1, -cap, cap);
        }
        WeakLearner learner{WeakKind::logit1, f, 0, 1, b0, b1};
        double err = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (learner.predict(x[i]) != t[i]) err += w[i];
        }
        if (err < best.error) {
            best.error = err;
            best.learner = learner;
        }
    }
    return best;
}

}  // namespace

double AdaBoostModel::score(std::span<const double> xrow) const {
    double f = 0;
    for (std::size_t m = 0; m < learners.size(); ++m) {
        f += alphas[m] * learners[m].predict(xrow);
    }
    return f;
}

double AdaBoostModel::prob(std::span<const double> xrow) const {
    return sigmoid(2.0 * score(xrow));
}

AdaBoostModel fit_adaboost(const Matrix& x, std::span<const int> y, std::size_t rounds,
                           WeakKind weak) {
    const std::size_t n = x.size();
    if (n == 0) throw DataError("empty design");
    bool pos = false, neg = false;
    std::vector<int> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = y[i] ? 1 : -1;
        (y[i] ? pos : neg) = true;
    }
    if (!pos || !neg) throw DataError("both classes required for boosting");

    std::vector<std::vector<std::size_t>> sorted;
    if (weak == WeakKind::stump) {
        const std::size_t p = x.front().size();
        sorted.resize(p);
        for (std::size_t f = 0; f < p; ++f) {
            sorted[f].resize(n);
            std::iota(sorted[f].begin(), sorted[f].end(), 0);
            std::stable_sort(sorted[f].begin(), sorted[f].end(),
                             [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
        }
    }

    AdaBoostModel model;
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    for (std::size_t m = 0; m < rounds; ++m) {
        const WeakFit fit = weak == WeakKind::stump ? best_stump(x, t, w, sorted)
                                                    : best_logit1(x, t, w);
        if (fit.error >= 0.5) {
            if (m == 0) throw DataError("first weak learner is no better than chance");
            break;
        }
        if (fit.error <= 0.0) {
            const double eps = 1e-12;
            model.learners.push_back(fit.learner);
            model.alphas.push_back(0.5 * std::log((1.0 - eps) / eps));
            model.round_errors.push_back(0.0);
            break;
        }
        const double alpha = 0.5 * std::log((1.0 - fit.error) / fit.error);
        model.learners.push_back(fit.learner);
        model.alphas.push_back(alpha);
        model.round_errors.push_back(fit.error);

        double sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] *= std::exp(-alpha * t[i] * fit.learner.predict(x[i]));
            sum += w[i];
        }
        for (auto& v : w) v /= sum;
    }
    return model;
}

// --- evaluation ------------------------------------------------------------------

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double npos = 0, nneg = 0;
    for (int label : labels) (label ? npos : nneg) += 1;
    const double pden = npos > 0 ? npos : 1;
    const double nden = nneg > 0 ? nneg : 1;

    std::vector<RocPoint> curve;
    curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    double tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < n) {
        const double s = scores[order[i]];
        while (i < n && scores[order[i]] == s) {
            (labels[order[i]] ? tp : fp) += 1;
            ++i;
        }
        curve.push_back({s, fp / nden, tp / pden});
    }
    return curve;
}

double auc(std::span<const RocPoint> roc) {
    double area = 0;
    for (std::size_t i = 1; i < roc.size(); ++i) {
        area += (roc[i].fpr - roc[i - 1].fpr) * (roc[i].tpr + roc[i - 1].tpr) / 2.0;
    }
    return area;
}

double cohen_kappa(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size() || a.empty()) throw DataError("kappa needs equal non-empty vectors");
    const auto n = static_cast<double>(a.size());
    std::map<int, double> ca, cb;
    double agree = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == b[i]) agree += 1;
        ca[a[i]] += 1;
        cb[b[i]] += 1;
    }
    const double po = agree / n;
    double pe = 0;
    for (const auto& [label, count] : ca) {
        auto it = cb.find(label);
        if (it != cb.end()) pe += (count / n) * (it->second / n);
    }
    if (1.0 - pe < 1e-15) return 1.0;
    return (po - pe) / (1.0 - pe);
}

FittedModel fit_model(const DesignMatrix& design, const ModelSpec& spec) {
    FittedModel model;
    model.spec = spec;
    if (spec.kind == "pls_logit") {
        model.pls = fit_pls_logit(design.x, design.y, spec.components, design.period,
                                  spec.period_dummy);
    } else if (spec.kind == "adaboost") {
        model.boost = fit_adaboost(design.x, design.y, spec.rounds, spec.weak);
    } else {
        throw ConfigError("unknown model kind: " + spec.kind);
    }
    return model;
}

double FittedModel::prob(std::span<const double> xrow, std::size_t period) const {
    if (spec.kind == "pls_logit") return pls_logit_prob(pls, xrow, period);
    return boost.prob(xrow);
}

EvalReport evaluate_loocv(const DesignMatrix& design, const ModelSpec& spec) {
    const std::size_t n = design.x.size();
    if (n < 10) throw ConfigError("leave-one-out evaluation needs at least 10 rows");

    EvalReport report;
    std::vector<int> predictions;
    for (std::size_t held = 0; held < n; ++held) {
        DesignMatrix fold;
        fold.x.reserve(n - 1);
        fold.y.reserve(n - 1);
        fold.period.reserve(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == held) continue;
            fold.x.push_back(design.x[i]);
            fold.y.push_back(design.y[i]);
            fold.period.push_back(design.period[i]);
        }
        const bool has_pos = std::find(fold.y.begin(), fold.y.end(), 1) != fold.y.end();
        const bool has_neg = std::find(fold.y.begin(), fold.y.end(), 0) != fold.y.end();
        if (!has_pos || !has_neg) {
            ++report.skipped_folds;
            continue;
        }
        const FittedModel model = fit_model(fold, spec);
        const double prob = model.prob(design.x[held], design.period[held]);
        report.scores.push_back(prob);
        report.labels.push_back(design.y[held]);
        predictions.push_back(prob >= spec.threshold ? 1 : 0);
    }
    if (report.scores.empty()) throw DataError("every fold was skipped");

    double tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (report.labels[i] == 1) {
            (predictions[i] == 1 ? tp : fn) += 1;
        } else {
            (predictions[i] == 0 ? tn : fp) += 1;
        }
    }
    const auto count = static_cast<double>(predictions.size());
    report.accuracy = (tp + tn) / count;
    report.sensitivity = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    report.specificity = tn + fp > 0 ? tn / (tn + fp) : 0.0;
    report.kappa = cohen_kappa(predictions, report.labels);
    report.roc = roc_curve(report.scores, report.labels);
    report.auc = mailsig::auc(report.roc);
    return report;
}

PeriodTest likelihood_ratio_period_test(const DesignMatrix& design, std::size_t n_components) {
    std::set<std::size_t> distinct(design.period.begin(), design.period.end());
    if (distinct.size() < 2) throw ConfigError("period test needs two periods");

    const PlsLogitModel base = fit_pls_logit(design.x, design.y, n_components);
    const Matrix& scores = base.train_scores;
    const LogisticFit without = fit_logistic(scores, design.y);
    Matrix with_dummy = scores;
    for (std::size_t i = 0; i < with_dummy.size(); ++i) {
        with_dummy[i].push_back(design.period[i] >= 1 ? 1.0 : 0.0);
    }
    const LogisticFit with = fit_logistic(with_dummy, design.y);

    PeriodTest test;
    test.converged = without.converged && with.converged;
    if (!test.converged) {
        test.statistic = 0;
        test.p_value = std::numeric_limits<double>::quiet_NaN();
        return test;
    }
    test.statistic = std::max(0.0, 2.0 * (with.log_likelihood - without.log_likelihood));
    test.p_value = chi2_sf_df1(test.statistic);
    return test;
}

}  // namespace mailsig
