#pragma once

#include <complex>
#include <vector>

namespace fracspec::fft {

// Unnormalized n-D DFT in place, row-major with the last axis fastest.
// sign = -1 is the forward transform sum_j x_j e^{-2 pi i jk/N}.
void transform(std::vector<std::complex<double>>& data, const std::vector<int>& dims, int sign);

inline void forward(std::vector<std::complex<double>>& data, const std::vector<int>& dims) {
    transform(data, dims, -1);
}
inline void backward(std::vector<std::complex<double>>& data, const std::vector<int>& dims) {
    transform(data, dims, +1);
}

} // namespace fracspec::fft
