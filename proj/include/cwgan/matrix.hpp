#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace cwgan {

// Dense real matrix, row-major, rows = samples. The single data carrier used
// throughout the library for data sets X, latents Z, generated samples G and
// weight matrices W.
class DataMatrix {
public:
    DataMatrix() = default;
    DataMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    // Construct from nested initializer lists: DataMatrix{{1,2},{3,4}}.
    DataMatrix(std::initializer_list<std::initializer_list<double>> rows);

    static DataMatrix identity(std::size_t n);
    static DataMatrix diag(const std::vector<double>& d);
    static DataMatrix from_column(const std::vector<double>& c);
    static DataMatrix from_row(const std::vector<double>& r);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }

    bool all_finite() const;

    std::vector<double> row(std::size_t i) const;
    std::vector<double> col(std::size_t j) const;
    void set_row(std::size_t i, const std::vector<double>& values);
    void set_col(std::size_t j, const std::vector<double>& values);

    DataMatrix transpose() const;

    DataMatrix& operator+=(const DataMatrix& other);
    DataMatrix& operator-=(const DataMatrix& other);
    DataMatrix& operator*=(double s);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DataMatrix operator+(DataMatrix a, const DataMatrix& b);
DataMatrix operator-(DataMatrix a, const DataMatrix& b);
DataMatrix operator*(DataMatrix a, double s);
DataMatrix operator*(double s, DataMatrix a);

// Matrix product A·B; throws DimensionMismatch on incompatible shapes.
DataMatrix matmul(const DataMatrix& a, const DataMatrix& b);

// A^T·A (Gram matrix of the columns).
DataMatrix gram(const DataMatrix& a);

// Column sums as a vector: (1^T A)^T.
std::vector<double> column_sums(const DataMatrix& a);

// Column means.
std::vector<double> column_means(const DataMatrix& a);

// A·v for a vector v of length cols().
std::vector<double> matvec(const DataMatrix& a, const std::vector<double>& v);

// A^T·v for a vector v of length rows().
std::vector<double> matvec_transposed(const DataMatrix& a, const std::vector<double>& v);

double frobenius_norm(const DataMatrix& a);
double frobenius_norm_squared(const DataMatrix& a);
double max_abs_entry(const DataMatrix& a);

// Vector helpers shared by the solvers.
double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);
double norm2_squared(const std::vector<double>& a);

void require_same_shape(const DataMatrix& a, const DataMatrix& b, const char* where);
void require_finite(const DataMatrix& a, const char* where);

}  // namespace cwgan
