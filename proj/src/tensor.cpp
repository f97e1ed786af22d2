#include "gformer/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gformer {

std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (auto e : shape) n *= e;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor() : shape_{0}, data_(std::make_shared<const std::vector<double>>()) {}

Tensor::Tensor(Shape shape)
    : shape_(std::move(shape)),
      data_(std::make_shared<const std::vector<double>>(shape_size(shape_), 0.0)) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)) {
    if (shape_.empty()) throw DimensionError("tensor shape must have at least one axis");
    if (shape_size(shape_) != data.size()) {
        throw DimensionError("tensor shape " + shape_str(shape_) + " holds " +
                             std::to_string(shape_size(shape_)) + " elements, got " +
                             std::to_string(data.size()));
    }
    data_ = std::make_shared<const std::vector<double>>(std::move(data));
}

Tensor Tensor::full(Shape shape, double value) {
    std::vector<double> d(shape_size(shape), value);
    return Tensor(std::move(shape), std::move(d));
}

Tensor Tensor::identity(std::size_t n) {
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 1.0;
    return Tensor({n, n}, std::move(d));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t m = rows.size();
    const std::size_t k = m ? rows.begin()->size() : 0;
    std::vector<double> d;
    d.reserve(m * k);
    for (const auto& r : rows) {
        if (r.size() != k) throw DimensionError("ragged matrix literal");
        d.insert(d.end(), r.begin(), r.end());
    }
    return Tensor({m, k}, std::move(d));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
    return Tensor({values.size()}, std::vector<double>(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " +
                             shape_str(shape_));
    }
    return shape_[axis];
}

double Tensor::at(std::size_t i, std::size_t j) const {
    if (rank() != 2) throw DimensionError("2-index access on shape " + shape_str(shape_));
    return (*data_)[i * shape_[1] + j];
}

double Tensor::at(std::size_t i, std::size_t j, std::size_t k) const {
    if (rank() != 3) throw DimensionError("3-index access on shape " + shape_str(shape_));
    return (*data_)[(i * shape_[1] + j) * shape_[2] + k];
}

Tensor Tensor::reshape(Shape shape) const {
    if (shape.empty() || shape_size(shape) != size()) {
        throw DimensionError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
    }
    Tensor out;
    out.shape_ = std::move(shape);
    out.data_ = data_;
    return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw DimensionError("max_abs_diff: " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

bool all_finite(const Tensor& t) {
    return std::all_of(t.data().begin(), t.data().end(), [](double v) { return std::isfinite(v); });
}

}  // namespace gformer
