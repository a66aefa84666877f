#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mailsig {

using Matrix = std::vector<std::vector<double>>;

double mean(std::span<const double> values);
double sample_sd(std::span<const double> values);
double median(std::vector<double> values);  // takes a copy, values may be reordered

/// Per-column z-score parameters. Columns with sd below 1e-12 keep sd = 1
/// so standardizing them is a no-op shift.
struct Standardization {
    std::vector<double> mean;
    std::vector<double> sd;
};

Standardization standardize_columns(Matrix& x);

Matrix transpose(const Matrix& a);
std::vector<double> mat_vec(const Matrix& a, std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

/// Gaussian elimination with partial pivoting. Returns false when singular.
bool solve_linear(Matrix a, std::vector<double> b, std::vector<double>& out);

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Results are sorted by eigenvalue descending; eigenvectors are the ROWS
/// of `vectors` and form an orthonormal set.
void jacobi_eigen_symmetric(Matrix a, std::vector<double>& values, Matrix& vectors);

double log_sum_exp(std::span<const double> values);

/// Right tail of the chi-square distribution with one degree of freedom.
double chi2_sf_df1(double statistic);

std::string format_double(double v);

}  // namespace mailsig
