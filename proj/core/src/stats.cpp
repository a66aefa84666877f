#include "mailsig/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace mailsig {

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    double s = 0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    const double m = mean(values);
    double ss = 0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    double hi = values[mid];
    if (values.size() % 2 == 1) return hi;
    double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

Standardization standardize_columns(Matrix& x) {
    Standardization st;
    if (x.empty()) return st;
    const std::size_t cols = x.front().size();
    st.mean.assign(cols, 0.0);
    st.sd.assign(cols, 1.0);
    for (std::size_t c = 0; c < cols; ++c) {
        std::vector<double> col;
        col.reserve(x.size());
        for (const auto& row : x) col.push_back(row[c]);
        st.mean[c] = mean(col);
        const double sd = sample_sd(col);
        st.sd[c] = sd > 1e-12 ? sd : 1.0;
        for (auto& row : x) row[c] = (row[c] - st.mean[c]) / st.sd[c];
    }
    return st;
}

Matrix transpose(const Matrix& a) {
    if (a.empty()) return {};
    Matrix t(a.front().size(), std::vector<double>(a.size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
    return t;
}

std::vector<double> mat_vec(const Matrix& a, std::span<const double> v) {
    std::vector<double> out(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = dot(a[i], v);
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

bool solve_linear(Matrix a, std::vector<double> b, std::vector<double>& out) {
    const std::size_t n = a.size();
    Eigen::MatrixXd m(n, n);
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        rhs(static_cast<Eigen::Index>(i)) = b[i];
        for (std::size_t j = 0; j < n; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a[i][j];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible()) return false;
    Eigen::VectorXd x = lu.solve(rhs);
    out.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) out[i] = x(static_cast<Eigen::Index>(i));
    return true;
}

void jacobi_eigen_symmetric(Matrix a, std::vector<double>& values, Matrix& vectors) {
    const std::size_t n = a.size();
    values.clear();
    vectors.clear();
    if (n == 0) return;
    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a[i][j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    // Eigen reports eigenvalues ascending; callers want them descending with
    // eigenvectors laid out as rows.
    values.resize(n);
    vectors.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const auto src = static_cast<Eigen::Index>(n - 1 - i);
        values[i] = solver.eigenvalues()(src);
        for (std::size_t j = 0; j < n; ++j)
            vectors[i][j] = solver.eigenvectors()(static_cast<Eigen::Index>(j), src);
    }
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) return -std::numeric_limits<double>::infinity();
    double m = values[0];
    for (double v : values) m = std::max(m, v);
    double s = 0;
    for (double v : values) s += std::exp(v - m);
    return m + std::log(s);
}

double chi2_sf_df1(double statistic) {
    if (statistic <= 0) return 1.0;
    return std::erfc(std::sqrt(statistic / 2.0));
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace mailsig
