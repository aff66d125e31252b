#include "dfmath/tensor.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "core/error.hpp"

namespace ap::df {

Tensor2D::Tensor2D(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows * cols, "tensor: data length does not match shape");
    for (double v : data_) require(std::isfinite(v), "tensor: non-finite entry");
}

Tensor2D::Tensor2D(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    for (const auto& r : rows) {
        require(r.size() == cols_, "tensor: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Tensor2D Tensor2D::identity(std::size_t n) {
    Tensor2D t(n, n);
    for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
}

Tensor2D matmul(const Tensor2D& a, const Tensor2D& b) {
    require(a.cols() == b.rows(), "matmul: inner dimensions differ");
    Tensor2D out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

Tensor2D matmul_transposed(const Tensor2D& a, const Tensor2D& b) {
    require(a.cols() == b.cols(), "matmul_transposed: inner dimensions differ");
    Tensor2D out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
            out(i, j) = s;
        }
    }
    return out;
}

Tensor2D transpose(const Tensor2D& a) {
    Tensor2D out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

Tensor2D add_row_bias(const Tensor2D& a, const Tensor2D& bias) {
    require(bias.rows() == 1 && bias.cols() == a.cols(), "bias must be 1 x cols");
    Tensor2D out = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += bias(0, j);
    return out;
}

Tensor2D hadamard(const Tensor2D& a, const Tensor2D& b) {
    require(a.same_shape(b), "hadamard: shape mismatch");
    Tensor2D out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= b.values()[i];
    return out;
}

void write_tensor(std::ostream& out, const Tensor2D& t) {
    out << t.rows() << ' ' << t.cols() << '\n' << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < t.rows(); ++i) {
        for (std::size_t j = 0; j < t.cols(); ++j) out << (j ? " " : "") << t(i, j);
        out << '\n';
    }
}

Tensor2D read_tensor(std::istream& in) {
    std::size_t rows = 0, cols = 0;
    if (!(in >> rows >> cols)) fail(ErrorCode::Parse, "tensor: missing shape header");
    std::vector<double> data(rows * cols);
    for (double& v : data) {
        if (!(in >> v)) fail(ErrorCode::Parse, "tensor: expected " + std::to_string(rows * cols) + " values");
    }
    return Tensor2D(rows, cols, std::move(data));
}

std::string tensor_to_text(const Tensor2D& t) {
    std::ostringstream ss;
    write_tensor(ss, t);
    return ss.str();
}

Tensor2D tensor_from_text(const std::string& text) {
    std::istringstream ss(text);
    return read_tensor(ss);
}

}  // namespace ap::df
