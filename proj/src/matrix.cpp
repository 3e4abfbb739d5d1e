#include "cwgan/matrix.hpp"

#include <cmath>
#include <string>

#include "cwgan/errors.hpp"

namespace cwgan {

DataMatrix::DataMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_)
            fail(ErrorKind::InvalidInput, "ragged initializer for DataMatrix");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

DataMatrix DataMatrix::identity(std::size_t n) {
    DataMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DataMatrix DataMatrix::diag(const std::vector<double>& d) {
    DataMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

DataMatrix DataMatrix::from_column(const std::vector<double>& c) {
    DataMatrix m(c.size(), 1);
    for (std::size_t i = 0; i < c.size(); ++i) m(i, 0) = c[i];
    return m;
}

DataMatrix DataMatrix::from_row(const std::vector<double>& r) {
    DataMatrix m(1, r.size());
    for (std::size_t j = 0; j < r.size(); ++j) m(0, j) = r[j];
    return m;
}

bool DataMatrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

std::vector<double> DataMatrix::row(std::size_t i) const {
    return std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                               data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
}

std::vector<double> DataMatrix::col(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

void DataMatrix::set_row(std::size_t i, const std::vector<double>& values) {
    if (values.size() != cols_) fail(ErrorKind::DimensionMismatch, "set_row length mismatch");
    for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = values[j];
}

void DataMatrix::set_col(std::size_t j, const std::vector<double>& values) {
    if (values.size() != rows_) fail(ErrorKind::DimensionMismatch, "set_col length mismatch");
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

DataMatrix DataMatrix::transpose() const {
    DataMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

DataMatrix& DataMatrix::operator+=(const DataMatrix& other) {
    require_same_shape(*this, other, "operator+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

DataMatrix& DataMatrix::operator-=(const DataMatrix& other) {
    require_same_shape(*this, other, "operator-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
}

DataMatrix& DataMatrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

DataMatrix operator+(DataMatrix a, const DataMatrix& b) { return a += b; }
DataMatrix operator-(DataMatrix a, const DataMatrix& b) { return a -= b; }
DataMatrix operator*(DataMatrix a, double s) { return a *= s; }
DataMatrix operator*(double s, DataMatrix a) { return a *= s; }

DataMatrix matmul(const DataMatrix& a, const DataMatrix& b) {
    if (a.cols() != b.rows())
        fail(ErrorKind::DimensionMismatch,
             "matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " times " +
                 std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    DataMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

DataMatrix gram(const DataMatrix& a) {
    DataMatrix g(a.cols(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t p = 0; p < a.cols(); ++p) {
            const double aip = a(i, p);
            if (aip == 0.0) continue;
            for (std::size_t q = p; q < a.cols(); ++q) g(p, q) += aip * a(i, q);
        }
    }
    for (std::size_t p = 0; p < a.cols(); ++p)
        for (std::size_t q = 0; q < p; ++q) g(p, q) = g(q, p);
    return g;
}

std::vector<double> column_sums(const DataMatrix& a) {
    std::vector<double> s(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s[j] += a(i, j);
    return s;
}

std::vector<double> column_means(const DataMatrix& a) {
    std::vector<double> s = column_sums(a);
    for (double& v : s) v /= static_cast<double>(a.rows());
    return s;
}

std::vector<double> matvec(const DataMatrix& a, const std::vector<double>& v) {
    if (v.size() != a.cols()) fail(ErrorKind::DimensionMismatch, "matvec length mismatch");
    std::vector<double> out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * v[j];
        out[i] = acc;
    }
    return out;
}

std::vector<double> matvec_transposed(const DataMatrix& a, const std::vector<double>& v) {
    if (v.size() != a.rows()) fail(ErrorKind::DimensionMismatch, "matvec_transposed length mismatch");
    std::vector<double> out(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double vi = v[i];
        if (vi == 0.0) continue;
        for (std::size_t j = 0; j < a.cols(); ++j) out[j] += a(i, j) * vi;
    }
    return out;
}

double frobenius_norm_squared(const DataMatrix& a) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += a.data()[k] * a.data()[k];
    return acc;
}

double frobenius_norm(const DataMatrix& a) { return std::sqrt(frobenius_norm_squared(a)); }

double max_abs_entry(const DataMatrix& a) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data()[k]));
    return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) fail(ErrorKind::DimensionMismatch, "dot length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2_squared(const std::vector<double>& a) {
    double acc = 0.0;
    for (double v : a) acc += v * v;
    return acc;
}

double norm2(const std::vector<double>& a) { return std::sqrt(norm2_squared(a)); }

void require_same_shape(const DataMatrix& a, const DataMatrix& b, const char* where) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        fail(ErrorKind::DimensionMismatch, std::string(where) + ": shape mismatch");
}

void require_finite(const DataMatrix& a, const char* where) {
    if (!a.all_finite()) fail(ErrorKind::InvalidInput, std::string(where) + ": non-finite entries");
}

}  // namespace cwgan
