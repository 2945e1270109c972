#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "noisecal/preprocess.hpp"
#include "noisecal/types.hpp"

namespace noisecal {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return {data.data() + i * cols, cols};
    }
};

/// Predictors (column 0 = node level, dBA) and reference targets.
struct Dataset {
    Matrix X;
    std::vector<double> y;
    std::vector<std::string> column_names;

    [[nodiscard]] std::size_t n() const { return X.rows; }
    [[nodiscard]] std::size_t p() const { return X.cols; }
    [[nodiscard]] std::vector<double> column(std::size_t j) const {
        std::vector<double> c(X.rows);
        for (std::size_t i = 0; i < X.rows; ++i) c[i] = X(i, j);
        return c;
    }
    void validate() const;  // throws on n < 10, missing column 0, non-finite entries
};

// Builds a calibration dataset from averaged windows; with_velocity adds the
// "velocity_mps" feature column and drops windows lacking it.
Dataset make_dataset(const std::vector<AlignedSeries>& windows, bool with_velocity = false);

// Row subset selection (copies).
Dataset subset(const Dataset& d, std::span<const std::size_t> idx);

}  // namespace noisecal
