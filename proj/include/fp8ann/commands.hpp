#pragma once

// Subcommand implementations behind the fp8ann CLI. Each writes data to `out`
// and diagnostics to `err`, and throws on any error.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fp8ann/index.hpp"
#include "fp8ann/minifloat.hpp"
#include "fp8ann/search.hpp"

namespace fp8ann::cli {

struct BuildOptions {
    std::filesystem::path dataset;
    std::size_t nlist = 0;
    std::size_t pq_dims = 0;
    std::size_t pq_bits = 8;
    std::uint64_t seed = 0;
    std::filesystem::path out;
};

struct GroundTruthOptions {
    std::filesystem::path dataset;
    std::filesystem::path queries;
    std::size_t k = 10;
    std::filesystem::path out;
};

struct SearchOptions {
    std::filesystem::path index;
    std::filesystem::path queries;
    std::size_t k = 10;
    std::size_t nprobe = 1;
    LutPrecision precision = LutPrecision::f32;
    std::filesystem::path out;
    std::optional<std::filesystem::path> out_distances;
};

struct EvalOptions {
    std::filesystem::path results;
    std::filesystem::path gt;
};

struct BenchOptions {
    std::filesystem::path index;
    std::filesystem::path queries;
    std::filesystem::path gt;
    std::size_t k = 10;
    std::vector<std::size_t> nprobes;
    std::vector<LutPrecision> precisions;
    std::filesystem::path out;
};

struct BankModelOptions {
    std::size_t entries = 256;
    std::size_t elem_bytes = 4;
    std::size_t simulate = 0;  // random warp patterns; 0 disables
    std::uint64_t seed = 0;
};

struct SynthOptions {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t components = 1;
    float spread = 0.05f;
    std::uint64_t seed = 0;
    std::filesystem::path out;
    std::size_t queries = 0;  // rows split off the end of the sample
    std::optional<std::filesystem::path> queries_out;
};

/// One row of a recall/throughput sweep. Timings are CPU wall clock and
/// machine-dependent; recall is deterministic.
struct BenchRecord {
    LutPrecision precision;
    std::size_t nprobe;
    std::size_t k;
    double mean_recall;
    double queries_per_second;
    double wall_time_ms;
};

std::vector<BenchRecord> run_bench(const IvfPqIndex& idx, const VectorSet& queries, const NeighborLists& gt,
                                   std::size_t k, const std::vector<std::size_t>& nprobes,
                                   const std::vector<LutPrecision>& precisions);
void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records);
/// Precision names whose recall drops as nprobe grows (soft check).
std::vector<std::string> recall_monotonicity_warnings(const std::vector<BenchRecord>& records);

void cmd_build(const BuildOptions& opts, std::ostream& out, std::ostream& err);
void cmd_gt(const GroundTruthOptions& opts, std::ostream& out, std::ostream& err);
void cmd_search(const SearchOptions& opts, std::ostream& out, std::ostream& err);
void cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err);
void cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err);
void cmd_codec_dump(MiniFloatSpec spec, std::ostream& out);
void cmd_bank_model(const BankModelOptions& opts, std::ostream& out);
void cmd_synth(const SynthOptions& opts, std::ostream& out, std::ostream& err);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_float(double value);

}  // namespace fp8ann::cli
