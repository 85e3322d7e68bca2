#include "etd/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace etd {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

Tensor::Tensor(std::vector<std::size_t> shape_, std::vector<double> values_)
    : shape(std::move(shape_)), values(std::move(values_)) {
    for (std::size_t d : shape) {
        if (d == 0) throw std::invalid_argument("tensor dimensions must be positive");
    }
    if (shape_product(shape) != values.size()) {
        throw std::invalid_argument("tensor shape " + shape_string(shape) + " does not match " +
                                    std::to_string(values.size()) + " values");
    }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape_) {
    return filled(std::move(shape_), 0.0);
}

Tensor Tensor::filled(std::vector<std::size_t> shape_, double value) {
    Tensor t;
    t.shape = std::move(shape_);
    for (std::size_t d : t.shape) {
        if (d == 0) throw std::invalid_argument("tensor dimensions must be positive");
    }
    t.values.assign(shape_product(t.shape), value);
    return t;
}

std::size_t Tensor::dim(std::size_t i) const {
    if (i >= shape.size()) throw std::out_of_range("tensor dim index out of range");
    return shape[i];
}

bool Tensor::all_finite() const {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void ensure_finite(const Tensor& t, const std::string& context) {
    if (!t.all_finite()) {
        throw std::runtime_error("non-finite value in " + context);
    }
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

}  // namespace etd
