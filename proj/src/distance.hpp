#pragma once

#include <cstddef>

namespace fp8ann::detail {

// Squared L2 with eight interleaved accumulators so the compiler can
// vectorize. The summation order differs from fp8ann::l2_sqr; only training
// code uses it.
inline float l2_sqr_blocked(const float* a, const float* b, std::size_t d) {
    float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 8 <= d; i += 8) {
        for (std::size_t lane = 0; lane < 8; ++lane) {
            const float t = a[i + lane] - b[i + lane];
            acc[lane] += t * t;
        }
    }
    float sum = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
    for (; i < d; ++i) {
        const float t = a[i] - b[i];
        sum += t * t;
    }
    return sum;
}

}  // namespace fp8ann::detail
