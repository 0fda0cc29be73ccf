#pragma once

// Unsigned 8-bit storage floats (e5m3, e4m4) and a binary16 storage path.
//
// The 8-bit formats have no sign bit, no subnormals and no Inf/NaN. An
// exponent field of all ones is an ordinary finite value. They exist only to
// hold nonnegative lookup-table entries; no arithmetic is defined on them.

#include <bit>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>

namespace fp8ann {

struct MiniFloatSpec {
    int exponent_bits;
    int mantissa_bits;
    int bias;

    constexpr int max_exponent_field() const { return (1 << exponent_bits) - 1; }
    friend constexpr bool operator==(const MiniFloatSpec&, const MiniFloatSpec&) = default;
};

// bias 15 lets e5m3 cover every binary16 normalized number.
inline constexpr MiniFloatSpec kE5M3{5, 3, 15};
inline constexpr MiniFloatSpec kE4M4{4, 4, 7};

struct MiniFloatConstants {
    float min_normal;
    float max_value;
    float relative_step;
};

constexpr int kFloatMantissaBits = 23;
constexpr int kFloatBias = 127;

/// Converts a nonnegative finite float by rebasing its exponent and dropping
/// the low mantissa bits (round toward zero). Values below the smallest
/// normal flush to 0x00; values past the largest exponent clamp to 0xFF.
constexpr std::uint8_t encode(float x, MiniFloatSpec spec) noexcept {
    assert(x >= 0.0f && std::isfinite(x));
    const auto bits = std::bit_cast<std::uint32_t>(x);
    const int exponent = static_cast<int>(bits >> kFloatMantissaBits) - kFloatBias + spec.bias;
    if (exponent < 1) {
        return 0x00;
    }
    if (exponent > spec.max_exponent_field()) {
        return 0xFF;
    }
    const std::uint32_t shifted = bits >> (kFloatMantissaBits - spec.mantissa_bits);
    const std::uint32_t rebase = static_cast<std::uint32_t>(kFloatBias - spec.bias) << spec.mantissa_bits;
    return static_cast<std::uint8_t>(shifted - rebase);
}

/// Exact inverse on canonical codes. Codes with a zero exponent field are 0.0.
constexpr float decode(std::uint8_t code, MiniFloatSpec spec) noexcept {
    if ((code >> spec.mantissa_bits) == 0) {
        return 0.0f;
    }
    const std::uint32_t rebase = static_cast<std::uint32_t>(kFloatBias - spec.bias) << spec.mantissa_bits;
    return std::bit_cast<float>((code + rebase) << (kFloatMantissaBits - spec.mantissa_bits));
}

constexpr MiniFloatConstants spec_constants(MiniFloatSpec spec) noexcept {
    // Both limits are canonical codes: exponent field 1 / all-ones code.
    const auto min_normal = decode(static_cast<std::uint8_t>(1u << spec.mantissa_bits), spec);
    const auto max_value = decode(0xFF, spec);
    const auto relative_step = std::bit_cast<float>(
        static_cast<std::uint32_t>(kFloatBias - spec.mantissa_bits) << kFloatMantissaBits);
    return {min_normal, max_value, relative_step};
}

/// "e5m3" / "e4m4" -> spec.
std::optional<MiniFloatSpec> minifloat_by_name(std::string_view name);

// IEEE binary16 with round-to-nearest-even. Overflow clamps to 65504 (0x7BFF)
// rather than producing Inf. Subnormal halves are supported.
std::uint16_t encode_storage16(float x) noexcept;
float decode_storage16(std::uint16_t h) noexcept;

}  // namespace fp8ann
