#pragma once

#include "fracspec/fractal_measure.hpp"

#include <cmath>

namespace testing {

inline fracspec::SimilitudeIFS cantor() {
    Eigen::VectorXd a(1), b(1);
    a << 0.0;
    b << 2.0 / 3.0;
    return fracspec::build_cantor_like(1, 2, 1.0 / 3.0, {a, b});
}

inline const double kCantorDim = std::log(2.0) / std::log(3.0);

inline Eigen::VectorXd point(double x) {
    Eigen::VectorXd v(1);
    v << x;
    return v;
}

} // namespace testing
