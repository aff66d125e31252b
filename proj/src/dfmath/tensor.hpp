#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <vector>

namespace ap::df {

/// Dense row-major matrix of doubles.
class Tensor2D {
public:
    Tensor2D() = default;
    Tensor2D(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Tensor2D(std::size_t rows, std::size_t cols, std::vector<double> data);
    Tensor2D(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::vector<double>& values() noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    bool same_shape(const Tensor2D& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool operator==(const Tensor2D&) const = default;

    static Tensor2D identity(std::size_t n);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// a * b
Tensor2D matmul(const Tensor2D& a, const Tensor2D& b);
/// a * b^T
Tensor2D matmul_transposed(const Tensor2D& a, const Tensor2D& b);
Tensor2D transpose(const Tensor2D& a);
/// Adds a 1 x cols bias to every row.
Tensor2D add_row_bias(const Tensor2D& a, const Tensor2D& bias);
Tensor2D hadamard(const Tensor2D& a, const Tensor2D& b);

/// Text fixture format: "rows cols" then rows lines of whitespace-separated values.
void write_tensor(std::ostream& out, const Tensor2D& t);
Tensor2D read_tensor(std::istream& in);
std::string tensor_to_text(const Tensor2D& t);
Tensor2D tensor_from_text(const std::string& text);

}  // namespace ap::df
