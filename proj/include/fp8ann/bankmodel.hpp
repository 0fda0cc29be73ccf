#pragma once

// Analytical shared-memory bank-conflict model for a lookup table read by one
// warp. A table of `entries` elements of `elem_bytes` each is laid out
// linearly over `banks` banks of `bank_width_bytes`; word w lives in bank
// (w mod banks), row (w / banks).

#include <cstddef>
#include <cstdint>
#include <span>

namespace fp8ann {

struct BankGeometry {
    std::size_t banks = 32;
    std::size_t bank_width_bytes = 4;
};

inline constexpr std::size_t kWarpSize = 32;

/// Rows of each bank occupied by the table.
std::size_t lanes_per_bank(std::size_t entries, std::size_t elem_bytes, const BankGeometry& geom = {});

/// lanes_per_bank - 1: all threads hitting distinct rows of one bank.
std::size_t worst_case_conflicts(std::size_t entries, std::size_t elem_bytes, const BankGeometry& geom = {});

/// Conflicts for one warp-wide access: the largest number of distinct rows
/// requested from a single bank, minus one. Reads of the same row broadcast.
std::size_t simulate_warp_access(std::span<const std::size_t> indices, std::size_t elem_bytes,
                                 const BankGeometry& geom = {});

}  // namespace fp8ann
