#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "scol/errors.hpp"

namespace scol {

// Row-major real tensor. Rank 1 or 2 in practice.
struct Tensor {
    std::vector<std::uint32_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::uint32_t> shape_)
        : shape(std::move(shape_)), data(count(shape), 0.0) {}
    Tensor(std::vector<std::uint32_t> shape_, std::vector<double> data_)
        : shape(std::move(shape_)), data(std::move(data_)) {
        if (data.size() != count(shape)) throw ShapeError("tensor data/shape mismatch");
    }

    static std::size_t count(const std::vector<std::uint32_t>& s) {
        std::size_t n = 1;
        for (auto d : s) n *= d;
        return n;
    }

    std::size_t size() const { return data.size(); }
    std::uint32_t rows() const { return shape.empty() ? 1 : shape[0]; }
    std::uint32_t cols() const { return shape.size() < 2 ? static_cast<std::uint32_t>(size() / rows()) : shape[1]; }

    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
};

inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) throw ShapeError("matmul inner dimension mismatch");
    std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out({static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(n)});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            double av = a.data[i * k + p];
            if (av == 0.0) continue;
            const double* brow = &b.data[p * n];
            double* orow = &out.data[i * n];
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

inline Tensor transpose(const Tensor& a) {
    std::size_t m = a.rows(), n = a.cols();
    Tensor out({static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(m)});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out.data[j * m + i] = a.data[i * n + j];
    return out;
}

}  // namespace scol
