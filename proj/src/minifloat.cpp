#include "fp8ann/minifloat.hpp"

namespace fp8ann {

std::optional<MiniFloatSpec> minifloat_by_name(std::string_view name) {
    if (name == "e5m3") {
        return kE5M3;
    }
    if (name == "e4m4") {
        return kE4M4;
    }
    return std::nullopt;
}

namespace {

constexpr std::uint16_t kHalfMaxFinite = 0x7BFF;
constexpr int kHalfBias = 15;
constexpr int kHalfMantissaBits = 10;

// Shifts `mantissa` right by `shift` bits, rounding to nearest even.
std::uint32_t shift_round_even(std::uint32_t mantissa, int shift) {
    if (shift >= 32) {
        return 0;
    }
    const std::uint32_t kept = mantissa >> shift;
    const std::uint32_t rest = mantissa & ((1u << shift) - 1u);
    const std::uint32_t half = 1u << (shift - 1);
    if (rest > half || (rest == half && (kept & 1u))) {
        return kept + 1;
    }
    return kept;
}

}  // namespace

std::uint16_t encode_storage16(float x) noexcept {
    const auto bits = std::bit_cast<std::uint32_t>(x) & 0x7FFFFFFFu;
    const int exponent32 = static_cast<int>(bits >> kFloatMantissaBits);
    if (exponent32 == 0xFF) {
        return kHalfMaxFinite;
    }
    std::uint32_t mantissa = bits & 0x7FFFFFu;
    const int exponent = exponent32 - kFloatBias + kHalfBias;
    if (exponent >= 31) {
        return kHalfMaxFinite;
    }
    if (exponent <= 0) {
        if (exponent32 == 0) {
            return 0;  // float subnormals are far below half precision
        }
        mantissa |= 0x800000u;
        // A carry out of the subnormal range lands on the smallest normal.
        return static_cast<std::uint16_t>(shift_round_even(mantissa, 14 - exponent));
    }
    const std::uint32_t rounded =
        (static_cast<std::uint32_t>(exponent) << kHalfMantissaBits) +
        shift_round_even(mantissa, kFloatMantissaBits - kHalfMantissaBits);
    if (rounded >= 0x7C00u) {
        return kHalfMaxFinite;
    }
    return static_cast<std::uint16_t>(rounded);
}

float decode_storage16(std::uint16_t h) noexcept {
    const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000u) << 16;
    const int exponent = (h >> kHalfMantissaBits) & 0x1F;
    const std::uint32_t mantissa = h & 0x3FFu;
    if (exponent == 0) {
        const float magnitude = std::ldexp(static_cast<float>(mantissa), -24);
        return sign ? -magnitude : magnitude;
    }
    if (exponent == 31) {
        return std::bit_cast<float>(sign | 0x7F800000u | (mantissa << 13));
    }
    const auto exponent32 = static_cast<std::uint32_t>(exponent - kHalfBias + kFloatBias);
    return std::bit_cast<float>(sign | (exponent32 << kFloatMantissaBits) | (mantissa << 13));
}

}  // namespace fp8ann
