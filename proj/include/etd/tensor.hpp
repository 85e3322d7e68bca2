#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace etd {

std::size_t shape_product(const std::vector<std::size_t>& shape);

/// Dense row-major array of doubles. The shape is a list of positive
/// dimensions whose product equals values.size().
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    Tensor() = default;
    Tensor(std::vector<std::size_t> shape_, std::vector<double> values_);

    static Tensor zeros(std::vector<std::size_t> shape_);
    static Tensor filled(std::vector<std::size_t> shape_, double value);

    std::size_t size() const { return values.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const;

    double* data() { return values.data(); }
    const double* data() const { return values.data(); }

    // 2-D accessors; valid only when rank() == 2.
    double& at(std::size_t row, std::size_t col) { return values[row * shape[1] + col]; }
    double at(std::size_t row, std::size_t col) const { return values[row * shape[1] + col]; }

    bool all_finite() const;
    bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

/// Throws std::runtime_error naming `context` if any entry is NaN/Inf.
void ensure_finite(const Tensor& t, const std::string& context);

std::string shape_string(const std::vector<std::size_t>& shape);

}  // namespace etd
