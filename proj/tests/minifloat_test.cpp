#include "fp8ann/minifloat.hpp"

#include <gtest/gtest.h>

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "oracles.hpp"

namespace fp8ann {
namespace {

using testing::MiniFloatOracle;

TEST(MiniFloat, ShippedSpecsAreEightBits) {
    for (const auto spec : {kE5M3, kE4M4}) {
        EXPECT_EQ(spec.exponent_bits + spec.mantissa_bits, 8);
    }
    EXPECT_EQ(kE5M3.bias, 15);
    EXPECT_EQ(kE4M4.bias, 7);
}

TEST(MiniFloat, EncodeExamples) {
    EXPECT_EQ(encode(0.0f, kE5M3), 0x00);
    EXPECT_EQ(encode(1.0f, kE5M3), 0x78);
    EXPECT_EQ(decode(encode(1.3f, kE5M3), kE5M3), 1.25f);
    EXPECT_EQ(encode(1.3f, kE5M3), MiniFloatOracle(kE5M3).encode(1.3));
    EXPECT_EQ(encode(std::ldexp(1.0f, 20), kE5M3), 0xFF);
}

TEST(MiniFloat, DecodeExamples) {
    EXPECT_EQ(decode(0x78, kE5M3), 1.0f);
    EXPECT_EQ(decode(0xFF, kE5M3), 122880.0f);
    EXPECT_EQ(decode(0xFF, kE5M3), MiniFloatOracle(kE5M3).value(0xFF));
    EXPECT_EQ(decode(0x00, kE4M4), 0.0f);
    EXPECT_EQ(decode(0xFF, kE4M4), 496.0f);
}

TEST(MiniFloat, ZeroExponentFieldDecodesToZero) {
    for (const auto spec : {kE5M3, kE4M4}) {
        for (unsigned m = 0; m < (1u << spec.mantissa_bits); ++m) {
            EXPECT_EQ(decode(static_cast<std::uint8_t>(m), spec), 0.0f);
        }
    }
}

TEST(MiniFloat, SpecConstants) {
    const auto e5m3 = spec_constants(kE5M3);
    EXPECT_EQ(e5m3.min_normal, std::ldexp(1.0f, -14));
    EXPECT_EQ(e5m3.max_value, 122880.0f);
    EXPECT_EQ(e5m3.relative_step, 0.125f);
    // covers binary16's normal range
    EXPECT_LE(e5m3.min_normal, std::ldexp(1.0f, -14));
    EXPECT_GE(e5m3.max_value, 65504.0f);

    const auto e4m4 = spec_constants(kE4M4);
    EXPECT_EQ(e4m4.min_normal, std::ldexp(1.0f, -6));
    EXPECT_EQ(e4m4.max_value, 496.0f);
    EXPECT_EQ(e4m4.relative_step, 0.0625f);

    for (const auto spec : {kE5M3, kE4M4}) {
        const auto c = spec_constants(spec);
        const MiniFloatOracle oracle(spec);
        EXPECT_EQ(c.min_normal, oracle.min_normal());
        EXPECT_EQ(c.max_value, oracle.max_value());
        EXPECT_EQ(decode(encode(c.min_normal, spec), spec), c.min_normal);
    }
}

TEST(MiniFloat, SpecConstantsAreConstexpr) {
    static_assert(encode(1.0f, kE5M3) == 0x78);
    static_assert(decode(0x78, kE5M3) == 1.0f);
    static_assert(spec_constants(kE4M4).max_value == 496.0f);
}

TEST(MiniFloat, DecodeMatchesOracleOnEveryCode) {
    for (const auto spec : {kE5M3, kE4M4}) {
        const MiniFloatOracle oracle(spec);
        for (unsigned c = 0; c < 256; ++c) {
            const auto code = static_cast<std::uint8_t>(c);
            // exact: the oracle's double value must survive the float round trip
            EXPECT_EQ(static_cast<double>(decode(code, spec)), oracle.value(code)) << "code " << c;
        }
    }
}

TEST(MiniFloat, ExhaustiveRoundTrip) {
    for (const auto spec : {kE5M3, kE4M4}) {
        for (unsigned c = 0; c < 256; ++c) {
            if ((c >> spec.mantissa_bits) == 0) {
                continue;
            }
            const auto code = static_cast<std::uint8_t>(c);
            EXPECT_EQ(encode(decode(code, spec), spec), code) << "code " << c;
        }
    }
}

TEST(MiniFloat, EncodeMatchesOracleOnRandomInputs) {
    std::mt19937 rng(42);
    for (const auto spec : {kE5M3, kE4M4}) {
        const MiniFloatOracle oracle(spec);
        // log-uniform over a range wider than the format on both sides
        std::uniform_real_distribution<double> exponent(-30.0, 25.0);
        for (int i = 0; i < 20000; ++i) {
            const auto x = static_cast<float>(std::exp2(exponent(rng)));
            ASSERT_EQ(encode(x, spec), oracle.encode(x)) << "x=" << x;
        }
    }
}

TEST(MiniFloat, EncodeNeverProducesNonCanonicalZero) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> exponent(-40.0, 0.0);
    for (const auto spec : {kE5M3, kE4M4}) {
        for (int i = 0; i < 10000; ++i) {
            const auto code = encode(static_cast<float>(std::exp2(exponent(rng))), spec);
            ASSERT_TRUE(code == 0 || (code >> spec.mantissa_bits) != 0);
        }
    }
}

TEST(MiniFloat, FlushAndClamp) {
    for (const auto spec : {kE5M3, kE4M4}) {
        const auto c = spec_constants(spec);
        EXPECT_EQ(encode(std::nextafter(c.min_normal, 0.0f), spec), 0x00);
        EXPECT_EQ(encode(std::numeric_limits<float>::denorm_min(), spec), 0x00);
        EXPECT_EQ(encode(c.max_value, spec), 0xFF);
        EXPECT_EQ(encode(c.max_value * 1.06f, spec), 0xFF);
        EXPECT_EQ(encode(std::numeric_limits<float>::max(), spec), 0xFF);
    }
}

TEST(MiniFloat, TruncationBoundAndMonotonicity) {
    std::mt19937 rng(7);
    for (const auto spec : {kE5M3, kE4M4}) {
        const auto c = spec_constants(spec);
        std::uniform_real_distribution<float> mantissa(1.0f, 2.0f);
        std::uniform_int_distribution<int> exponent(-(spec.bias - 1), spec.max_exponent_field() - spec.bias);
        float prev_x = 0.0f;
        std::uint8_t prev_code = 0;
        std::vector<float> xs;
        for (int i = 0; i < 5000; ++i) {
            xs.push_back(std::ldexp(mantissa(rng), exponent(rng)));
        }
        std::sort(xs.begin(), xs.end());
        for (const float x : xs) {
            const auto code = encode(x, spec);
            const float y = decode(code, spec);
            ASSERT_LE(y, x);
            ASSERT_LT(x - y, c.relative_step * y);
            ASSERT_GE(code, prev_code) << prev_x << " vs " << x;
            prev_x = x;
            prev_code = code;
        }
    }
}

TEST(Storage16, Examples) {
    EXPECT_EQ(encode_storage16(1.0f), 0x3C00);
    EXPECT_EQ(encode_storage16(0.0f), 0x0000);
    EXPECT_EQ(encode_storage16(65504.0f), 0x7BFF);
    EXPECT_EQ(encode_storage16(1e9f), 0x7BFF);
    EXPECT_EQ(decode_storage16(0x3C00), 1.0f);
    EXPECT_EQ(decode_storage16(0x7BFF), 65504.0f);
    EXPECT_EQ(decode_storage16(0x0001), std::ldexp(1.0f, -24));
}

// Eigen::half is an independent round-to-nearest-even binary16 implementation.
uint16_t eigen_half_bits(float x) {
    const Eigen::half h(x);
    const auto bits = Eigen::numext::bit_cast<std::uint16_t>(h);
    return (bits & 0x7C00u) == 0x7C00u ? std::uint16_t{0x7BFF} : bits;  // clamp Inf
}

TEST(Storage16, MatchesEigenHalfOnEveryHalfValueAndMidpoint) {
    for (std::uint32_t h = 0; h < 0x7C00; ++h) {
        const float x = decode_storage16(static_cast<std::uint16_t>(h));
        ASSERT_EQ(encode_storage16(x), h);
        // midpoint to the next value exercises ties-to-even
        const float next = decode_storage16(static_cast<std::uint16_t>(h + 1));
        if (h + 1 < 0x7C00) {
            const float mid = x + (next - x) / 2;
            ASSERT_EQ(encode_storage16(mid), eigen_half_bits(mid)) << "h=" << h;
            ASSERT_EQ(encode_storage16(std::nextafter(mid, 0.0f)), eigen_half_bits(std::nextafter(mid, 0.0f)));
            ASSERT_EQ(encode_storage16(std::nextafter(mid, 1e9f)), eigen_half_bits(std::nextafter(mid, 1e9f)));
        }
    }
}

TEST(Storage16, MatchesEigenHalfOnRandomFloats) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> exponent(-30.0, 17.0);
    for (int i = 0; i < 200000; ++i) {
        const auto x = static_cast<float>(std::exp2(exponent(rng)));
        ASSERT_EQ(encode_storage16(x), eigen_half_bits(x)) << "x=" << x;
    }
}

TEST(Storage16, RelativeErrorWithinHalfUlp) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> exponent(-14.0, 15.9);
    for (int i = 0; i < 100000; ++i) {
        const auto x = static_cast<float>(std::exp2(exponent(rng)));
        const float y = decode_storage16(encode_storage16(x));
        ASSERT_LE(std::fabs(y - x), std::ldexp(x, -11));
    }
}

}  // namespace
}  // namespace fp8ann
