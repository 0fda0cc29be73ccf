// fp8ann: IVFPQ build / search / evaluation with 8-bit float lookup tables.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "fp8ann/commands.hpp"

namespace {

using namespace fp8ann;

const std::map<std::string, LutPrecision> kPrecisions{
    {"f32", LutPrecision::f32}, {"f16", LutPrecision::f16}, {"e5m3", LutPrecision::e5m3}, {"e4m4", LutPrecision::e4m4}};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IVFPQ search with 8-bit floating-point lookup tables"};
    app.require_subcommand(1);

    cli::BuildOptions build;
    auto* build_cmd = app.add_subcommand("build", "train and write an IVFPQ index");
    build_cmd->add_option("--dataset", build.dataset, "base vectors (.fvecs/.bvecs)")->required();
    build_cmd->add_option("--nlist", build.nlist, "coarse clusters")->required();
    build_cmd->add_option("--pq-dims", build.pq_dims, "PQ subspaces s")->required();
    build_cmd->add_option("--pq-bits", build.pq_bits, "bits per sub-code p")->capture_default_str();
    build_cmd->add_option("--seed", build.seed)->capture_default_str();
    build_cmd->add_option("--out", build.out, "index file")->required();

    cli::GroundTruthOptions gt;
    auto* gt_cmd = app.add_subcommand("gt", "exact k-NN ground truth as ivecs");
    gt_cmd->add_option("--dataset", gt.dataset)->required();
    gt_cmd->add_option("--queries", gt.queries)->required();
    gt_cmd->add_option("--k", gt.k)->required();
    gt_cmd->add_option("--out", gt.out)->required();

    cli::SearchOptions search;
    std::string search_distances;
    auto* search_cmd = app.add_subcommand("search", "query an index, write result ids as ivecs");
    search_cmd->add_option("--index", search.index)->required();
    search_cmd->add_option("--queries", search.queries)->required();
    search_cmd->add_option("--k", search.k)->required();
    search_cmd->add_option("--nprobe", search.nprobe)->required();
    std::string search_precision;
    search_cmd->add_option("--lut-precision", search_precision, "f32|f16|e5m3|e4m4")
        ->required()
        ->check(CLI::IsMember({"f32", "f16", "e5m3", "e4m4"}));
    search_cmd->add_option("--out", search.out)->required();
    search_cmd->add_option("--out-distances", search_distances, "optional fvecs of result distances");

    cli::EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "recall of results against ground truth");
    eval_cmd->add_option("--results", eval.results)->required();
    eval_cmd->add_option("--gt", eval.gt)->required();

    cli::BenchOptions bench;
    std::vector<std::string> bench_precisions;
    auto* bench_cmd = app.add_subcommand("bench", "recall/throughput sweep over precisions x nprobe");
    bench_cmd->add_option("--index", bench.index)->required();
    bench_cmd->add_option("--queries", bench.queries)->required();
    bench_cmd->add_option("--gt", bench.gt)->required();
    bench_cmd->add_option("--k", bench.k)->required();
    bench_cmd->add_option("--nprobe-list", bench.nprobes, "comma-separated")->required()->delimiter(',');
    bench_cmd->add_option("--precisions", bench_precisions, "comma-separated")
        ->required()
        ->delimiter(',')
        ->check(CLI::IsMember({"f32", "f16", "e5m3", "e4m4"}));
    bench_cmd->add_option("--out", bench.out, "CSV file")->required();

    std::string dump_format;
    auto* dump_cmd = app.add_subcommand("codec-dump", "all 256 code,value pairs of a format");
    dump_cmd->add_option("--format", dump_format, "e5m3|e4m4")->required()->check(CLI::IsMember({"e5m3", "e4m4"}));

    cli::BankModelOptions bank;
    auto* bank_cmd = app.add_subcommand("bank-model", "shared-memory bank conflicts of a lookup table");
    bank_cmd->add_option("--entries", bank.entries)->required()->check(CLI::PositiveNumber);
    bank_cmd->add_option("--elem-bytes", bank.elem_bytes)->required()->check(CLI::PositiveNumber);
    bank_cmd->add_option("--simulate", bank.simulate, "random warp patterns to simulate");
    bank_cmd->add_option("--seed", bank.seed)->capture_default_str();

    cli::SynthOptions synth;
    std::string synth_queries_out;
    auto* synth_cmd = app.add_subcommand("synth", "Gaussian-mixture dataset as fvecs");
    synth_cmd->add_option("--n", synth.n)->required()->check(CLI::PositiveNumber);
    synth_cmd->add_option("--d", synth.d)->required()->check(CLI::PositiveNumber);
    synth_cmd->add_option("--components", synth.components)->capture_default_str()->check(CLI::PositiveNumber);
    synth_cmd->add_option("--spread", synth.spread)->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
    synth_cmd->add_option("--out", synth.out)->required();
    synth_cmd->add_option("--queries", synth.queries, "extra rows from the same mixture")->capture_default_str();
    synth_cmd->add_option("--queries-out", synth_queries_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*build_cmd) {
            cli::cmd_build(build, std::cout, std::cerr);
        } else if (*gt_cmd) {
            cli::cmd_gt(gt, std::cout, std::cerr);
        } else if (*search_cmd) {
            search.precision = kPrecisions.at(search_precision);
            if (!search_distances.empty()) {
                search.out_distances = search_distances;
            }
            cli::cmd_search(search, std::cout, std::cerr);
        } else if (*eval_cmd) {
            cli::cmd_eval(eval, std::cout, std::cerr);
        } else if (*bench_cmd) {
            for (const auto& name : bench_precisions) {
                bench.precisions.push_back(kPrecisions.at(name));
            }
            cli::cmd_bench(bench, std::cout, std::cerr);
        } else if (*dump_cmd) {
            cli::cmd_codec_dump(*minifloat_by_name(dump_format), std::cout);
        } else if (*bank_cmd) {
            cli::cmd_bank_model(bank, std::cout);
        } else if (*synth_cmd) {
            if (!synth_queries_out.empty()) {
                synth.queries_out = synth_queries_out;
            }
            cli::cmd_synth(synth, std::cout, std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
