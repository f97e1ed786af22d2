#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gformer/errors.hpp"

namespace gformer {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense row-major tensor of doubles.
///
/// A Tensor is an immutable value: its shape and contents never change after
/// construction. Copies share the underlying buffer, so passing tensors by
/// value is cheap. New tensors are produced from a filled std::vector.
class Tensor {
public:
    Tensor();
    explicit Tensor(Shape shape);  // zero-filled
    Tensor(Shape shape, std::vector<double> data);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor full(Shape shape, double value);
    static Tensor ones(Shape shape) { return full(std::move(shape), 1.0); }
    static Tensor scalar(double value) { return Tensor({1}, {value}); }
    static Tensor identity(std::size_t n);
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor vector(std::initializer_list<double> values);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const noexcept { return data_->size(); }
    bool empty() const noexcept { return data_->empty(); }

    std::span<const double> data() const noexcept { return {data_->data(), data_->size()}; }
    const double* raw() const noexcept { return data_->data(); }
    double operator[](std::size_t i) const { return (*data_)[i]; }

    double at(std::size_t i, std::size_t j) const;
    double at(std::size_t i, std::size_t j, std::size_t k) const;

    /// Same data, new shape. Element count must match.
    Tensor reshape(Shape shape) const;

    std::vector<double> to_vector() const { return *data_; }

    bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }

private:
    Shape shape_;
    std::shared_ptr<const std::vector<double>> data_;
};

// Largest absolute elementwise difference. Shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);
bool all_finite(const Tensor& t);

}  // namespace gformer
