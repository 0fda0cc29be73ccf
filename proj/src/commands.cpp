#include "fp8ann/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>

#include "fp8ann/bankmodel.hpp"
#include "fp8ann/dataset.hpp"

namespace fp8ann::cli {

std::string format_float(double value) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) {
        throw std::runtime_error("format_float failed");
    }
    return {buf, end};
}

namespace {

struct Timed {
    BatchResult batch;
    double wall_ms;
};

Timed timed_search(const IvfPqIndex& idx, const VectorSet& queries, const SearchParams& params) {
    const auto start = std::chrono::steady_clock::now();
    auto batch = search_batch(idx, queries, params);
    const auto stop = std::chrono::steady_clock::now();
    return {std::move(batch), std::chrono::duration<double, std::milli>(stop - start).count()};
}

double queries_per_second(std::size_t nq, double wall_ms) {
    return wall_ms > 0.0 ? static_cast<double>(nq) / (wall_ms / 1000.0) : 0.0;
}

}  // namespace

void cmd_build(const BuildOptions& opts, std::ostream& out, std::ostream&) {
    const auto data = read_vectors(opts.dataset);
    const auto idx = build_index(data, opts.nlist, opts.pq_dims, opts.pq_bits, opts.seed);
    save_index(idx, opts.out);
    out << "N=" << idx.ntotal << " d=" << idx.d << " nlist=" << idx.nlist << " s=" << idx.cb.s << " p=" << idx.cb.p
        << '\n';
}

void cmd_gt(const GroundTruthOptions& opts, std::ostream& out, std::ostream&) {
    const auto base = read_vectors(opts.dataset);
    const auto queries = read_vectors(opts.queries);
    const auto gt = brute_force_knn(base, queries, opts.k);
    write_ivecs(opts.out, gt);
    out << "wrote " << gt.q << " x " << gt.k << " neighbors to " << opts.out.string() << '\n';
}

void cmd_search(const SearchOptions& opts, std::ostream& out, std::ostream& err) {
    const auto idx = load_index(opts.index);
    const auto queries = read_vectors(opts.queries);
    const auto [batch, wall_ms] = timed_search(idx, queries, {opts.k, opts.nprobe, opts.precision});
    if (batch.short_rows > 0) {
        err << "warning: " << batch.short_rows << " of " << queries.n << " queries returned fewer than k=" << opts.k
            << " results (padded with -1)\n";
    }
    write_ivecs(opts.out, batch.results);
    if (opts.out_distances) {
        VectorSet dists(batch.results.q, batch.results.k);
        dists.data = batch.results.distances;
        write_fvecs(*opts.out_distances, dists);
    }
    out << "wall_time_ms=" << format_float(wall_ms)
        << " queries_per_second=" << format_float(queries_per_second(queries.n, wall_ms)) << '\n';
}

void cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream&) {
    const auto results = read_ivecs(opts.results);
    const auto gt = read_ivecs(opts.gt);
    const auto report = recall(results, gt);
    out << "mean_recall," << format_float(report.mean) << '\n';
    out << "query,recall\n";
    for (std::size_t i = 0; i < report.per_query.size(); ++i) {
        out << i << ',' << format_float(report.per_query[i]) << '\n';
    }
}

std::vector<BenchRecord> run_bench(const IvfPqIndex& idx, const VectorSet& queries, const NeighborLists& gt,
                                   std::size_t k, const std::vector<std::size_t>& nprobes,
                                   const std::vector<LutPrecision>& precisions) {
    std::vector<BenchRecord> records;
    for (const auto precision : precisions) {
        for (const auto nprobe : nprobes) {
            const auto [batch, wall_ms] = timed_search(idx, queries, {k, nprobe, precision});
            const auto r = recall(batch.results, gt);
            records.push_back({precision, nprobe, k, r.mean, queries_per_second(queries.n, wall_ms), wall_ms});
        }
    }
    return records;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
    out << "precision,nprobe,k,mean_recall,queries_per_second,wall_time_ms\n";
    for (const auto& r : records) {
        out << to_string(r.precision) << ',' << r.nprobe << ',' << r.k << ',' << format_float(r.mean_recall) << ','
            << format_float(r.queries_per_second) << ',' << format_float(r.wall_time_ms) << '\n';
    }
}

std::vector<std::string> recall_monotonicity_warnings(const std::vector<BenchRecord>& records) {
    std::map<LutPrecision, std::vector<const BenchRecord*>> by_precision;
    for (const auto& r : records) {
        by_precision[r.precision].push_back(&r);
    }
    std::vector<std::string> warnings;
    for (auto& [precision, rows] : by_precision) {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const BenchRecord* a, const BenchRecord* b) { return a->nprobe < b->nprobe; });
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i]->mean_recall < rows[i - 1]->mean_recall) {
                warnings.push_back(std::string(to_string(precision)) + ": recall drops from nprobe=" +
                                   std::to_string(rows[i - 1]->nprobe) + " to nprobe=" +
                                   std::to_string(rows[i]->nprobe));
            }
        }
    }
    return warnings;
}

void cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err) {
    const auto idx = load_index(opts.index);
    const auto queries = read_vectors(opts.queries);
    const auto gt = read_ivecs(opts.gt);
    const auto records = run_bench(idx, queries, gt, opts.k, opts.nprobes, opts.precisions);
    for (const auto& w : recall_monotonicity_warnings(records)) {
        err << "warning: " << w << '\n';
    }
    err << "note: queries_per_second and wall_time_ms are machine-dependent\n";
    std::ofstream file(opts.out);
    if (!file) {
        throw std::runtime_error("cannot create " + opts.out.string());
    }
    write_bench_csv(file, records);
    out << "wrote " << records.size() << " rows to " << opts.out.string() << '\n';
}

void cmd_codec_dump(MiniFloatSpec spec, std::ostream& out) {
    out << "code,value\n";
    for (unsigned code = 0; code < 256; ++code) {
        out << code << ',' << format_float(decode(static_cast<std::uint8_t>(code), spec)) << '\n';
    }
}

void cmd_bank_model(const BankModelOptions& opts, std::ostream& out) {
    const auto lanes = lanes_per_bank(opts.entries, opts.elem_bytes);
    const auto worst = worst_case_conflicts(opts.entries, opts.elem_bytes);
    out << "entries,elem_bytes,lanes,worst_case_conflicts,simulated_max\n";
    out << opts.entries << ',' << opts.elem_bytes << ',' << lanes << ',' << worst << ',';
    if (opts.simulate > 0) {
        std::mt19937_64 rng(opts.seed);
        std::uniform_int_distribution<std::size_t> pick(0, opts.entries - 1);
        std::vector<std::size_t> warp(kWarpSize);
        std::size_t simulated = 0;
        for (std::size_t t = 0; t < opts.simulate; ++t) {
            for (auto& index : warp) {
                index = pick(rng);
            }
            simulated = std::max(simulated, simulate_warp_access(warp, opts.elem_bytes));
        }
        out << simulated;
    }
    out << '\n';
}

void cmd_synth(const SynthOptions& opts, std::ostream& out, std::ostream&) {
    if (opts.queries > 0 && !opts.queries_out) {
        throw std::invalid_argument("--queries requires --queries-out");
    }
    const auto all = synth_gaussian_mixture(opts.n + opts.queries, opts.d, opts.components, opts.spread, opts.seed);
    VectorSet base(opts.n, opts.d);
    std::copy_n(all.data.begin(), opts.n * opts.d, base.data.begin());
    write_fvecs(opts.out, base);
    if (opts.queries > 0) {
        VectorSet queries(opts.queries, opts.d);
        std::copy(all.data.begin() + static_cast<std::ptrdiff_t>(opts.n * opts.d), all.data.end(),
                  queries.data.begin());
        write_fvecs(*opts.queries_out, queries);
    }
    out << "wrote " << opts.n << " x " << opts.d << " vectors";
    if (opts.queries > 0) {
        out << " and " << opts.queries << " queries";
    }
    out << '\n';
}

}  // namespace fp8ann::cli
