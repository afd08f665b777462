#include "roirank/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace roirank {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

std::string shape_to_string(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    for (std::size_t e : shape_) {
        if (e == 0) throw ShapeError("zero extent in tensor shape " + shape_to_string(shape_));
    }
    data_.assign(shape_product(shape_), 0.0);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    for (std::size_t e : shape_) {
        if (e == 0) throw ShapeError("zero extent in tensor shape " + shape_to_string(shape_));
    }
    if (shape_product(shape_) != data_.size()) {
        throw ShapeError("value count " + std::to_string(data_.size()) +
                         " does not match shape " + shape_to_string(shape_));
    }
}

Tensor Tensor::zeros_like(const Tensor& other) { return Tensor(other.shape_); }

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor Tensor::reshaped(std::vector<std::size_t> new_shape) const {
    if (shape_product(new_shape) != data_.size()) {
        throw ShapeError("reshape " + shape_to_string(shape_) + " -> " +
                         shape_to_string(new_shape) + " changes element count");
    }
    return Tensor(std::move(new_shape), data_);
}

}  // namespace roirank
