#include "fp8ann/bankmodel.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fp8ann {

namespace {

void check_geometry(std::size_t elem_bytes, const BankGeometry& geom) {
    if (geom.banks == 0 || geom.bank_width_bytes == 0 || elem_bytes == 0) {
        throw std::invalid_argument("bank model: sizes must be positive");
    }
    if (geom.bank_width_bytes % elem_bytes != 0 && elem_bytes % geom.bank_width_bytes != 0) {
        throw std::invalid_argument("bank model: element size and bank width must divide one another");
    }
}

}  // namespace

std::size_t lanes_per_bank(std::size_t entries, std::size_t elem_bytes, const BankGeometry& geom) {
    check_geometry(elem_bytes, geom);
    if (entries == 0) {
        throw std::invalid_argument("bank model: entries must be positive");
    }
    const std::size_t row_bytes = geom.banks * geom.bank_width_bytes;
    return (entries * elem_bytes + row_bytes - 1) / row_bytes;
}

std::size_t worst_case_conflicts(std::size_t entries, std::size_t elem_bytes, const BankGeometry& geom) {
    return lanes_per_bank(entries, elem_bytes, geom) - 1;
}

std::size_t simulate_warp_access(std::span<const std::size_t> indices, std::size_t elem_bytes,
                                 const BankGeometry& geom) {
    check_geometry(elem_bytes, geom);
    // (bank, row) pairs actually touched; wide elements span several words.
    std::set<std::pair<std::size_t, std::size_t>> touched;
    for (const auto index : indices) {
        const std::size_t first = index * elem_bytes / geom.bank_width_bytes;
        const std::size_t last = (index * elem_bytes + elem_bytes - 1) / geom.bank_width_bytes;
        for (std::size_t word = first; word <= last; ++word) {
            touched.emplace(word % geom.banks, word / geom.banks);
        }
    }
    std::vector<std::size_t> rows_per_bank(geom.banks, 0);
    for (const auto& [bank, row] : touched) {
        ++rows_per_bank[bank];
    }
    const auto worst = *std::max_element(rows_per_bank.begin(), rows_per_bank.end());
    return worst == 0 ? 0 : worst - 1;
}

}  // namespace fp8ann
