#include "fp8ann/search.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fp8ann/minifloat.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace fp8ann {
namespace {

constexpr LutPrecision kAll[] = {LutPrecision::f32, LutPrecision::f16, LutPrecision::e5m3, LutPrecision::e4m4};

class SearchFixture : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        data_ = new VectorSet(synth_gaussian_mixture(3000, 16, 10, 0.1f, 31));
        index_ = new IvfPqIndex(build_index(*data_, 16, 8, 8, 31));
        queries_ = new VectorSet(synth_gaussian_mixture(20, 16, 10, 0.1f, 32));
    }
    static void TearDownTestSuite() {
        delete data_;
        delete index_;
        delete queries_;
    }
    static VectorSet* data_;
    static IvfPqIndex* index_;
    static VectorSet* queries_;
};
VectorSet* SearchFixture::data_ = nullptr;
IvfPqIndex* SearchFixture::index_ = nullptr;
VectorSet* SearchFixture::queries_ = nullptr;

TEST(Precision, NamesAndWidths) {
    EXPECT_EQ(element_bytes(LutPrecision::f32), 4u);
    EXPECT_EQ(element_bytes(LutPrecision::f16), 2u);
    EXPECT_EQ(element_bytes(LutPrecision::e5m3), 1u);
    EXPECT_EQ(element_bytes(LutPrecision::e4m4), 1u);
    for (const auto p : kAll) EXPECT_EQ(parse_precision(to_string(p)), p);
    EXPECT_FALSE(parse_precision("bf16"));
}

TEST_F(SearchFixture, SelectClustersExhaustiveAndExact) {
    const auto& idx = *index_;
    const auto q = queries_->row(0);
    const auto all = select_clusters(idx, q, idx.nlist);
    ASSERT_EQ(all.size(), idx.nlist);
    for (std::size_t i = 1; i < all.size(); ++i) {
        EXPECT_LE(l2_sqr(q, idx.coarse.row(all[i - 1])), l2_sqr(q, idx.coarse.row(all[i])));
    }
    EXPECT_EQ(select_clusters(idx, idx.coarse.row(3), 1), std::vector<std::uint32_t>{3});
    EXPECT_THROW(select_clusters(idx, q, 0), std::invalid_argument);
    EXPECT_THROW(select_clusters(idx, q, idx.nlist + 1), std::invalid_argument);
}

TEST_F(SearchFixture, SelectClustersAgreesWithBruteForce) {
    const auto& idx = *index_;
    for (std::size_t nprobe : {1, 4, 9}) {
        const auto gt = brute_force_knn(idx.coarse, *queries_, nprobe);
        for (std::size_t i = 0; i < queries_->n; ++i) {
            const auto got = select_clusters(idx, queries_->row(i), nprobe);
            const auto want = gt.ids_row(i);
            ASSERT_TRUE(std::equal(got.begin(), got.end(), want.begin()));
        }
    }
}

TEST_F(SearchFixture, LutZeroAtOwnCodeword) {
    const auto& cb = index_->cb;
    std::vector<float> word;
    for (std::size_t j = 0; j < cb.s; ++j) {
        const auto c = cb.center(j, 5);
        word.insert(word.end(), c.begin(), c.end());
    }
    for (const auto p : kAll) {
        const auto lut = build_lut(cb, word, p);
        for (std::size_t j = 0; j < cb.s; ++j) EXPECT_EQ(lut.value(j, 5), 0.0f);
    }
}

TEST_F(SearchFixture, LutPrecisionProperties) {
    const auto& cb = index_->cb;
    std::mt19937 rng(4);
    std::normal_distribution<float> noise(0.0f, 0.3f);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<float> rq(cb.d());
        for (auto& v : rq) v = noise(rng);
        const auto f32 = build_lut(cb, rq, LutPrecision::f32);
        const auto f16 = build_lut(cb, rq, LutPrecision::f16);
        const auto e5m3 = build_lut(cb, rq, LutPrecision::e5m3);
        const auto e4m4 = build_lut(cb, rq, LutPrecision::e4m4);
        EXPECT_EQ(e5m3.raw().size(), cb.s * cb.ksub());
        EXPECT_EQ(f16.raw().size(), 2 * cb.s * cb.ksub());
        for (std::size_t j = 0; j < cb.s; ++j) {
            const auto sub = std::span<const float>(rq).subspan(j * cb.sub_d, cb.sub_d);
            for (std::size_t c = 0; c < cb.ksub(); ++c) {
                const float exact = f32.value(j, c);
                ASSERT_EQ(exact, l2_sqr(sub, cb.center(j, c)));  // identity storage
                const float half_err = std::fabs(f16.value(j, c) - exact);
                if (exact >= std::ldexp(1.0f, -14)) {
                    ASSERT_LE(half_err, std::ldexp(exact, -11));
                } else {
                    ASSERT_LE(half_err, std::ldexp(1.0f, -25));  // half a subnormal step
                }
                for (const auto& [lut, spec] : {std::pair{&e5m3, kE5M3}, std::pair{&e4m4, kE4M4}}) {
                    const float v = lut->value(j, c);
                    ASSERT_LE(v, exact);
                    if (exact >= spec_constants(spec).min_normal) {
                        ASSERT_LT(exact - v, spec_constants(spec).relative_step * v);
                    }
                }
            }
        }
    }
}

TEST(ScanList, AllZeroTableAndSingleSubspace) {
    InvertedList list{{4, 9}, {1, 2, 3, 0}};
    Lut zero(2, 4, LutPrecision::e5m3);
    for (const auto& c : scan_list(list, zero)) EXPECT_EQ(c.distance, 0.0f);

    Lut single(1, 4, LutPrecision::e4m4);
    for (std::size_t c = 0; c < 4; ++c) single.store(0, c, static_cast<float>(c + 1));
    InvertedList one{{0, 1, 2}, {3, 0, 2}};
    const auto out = scan_list(one, single);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0], (Candidate{0, 4.0f}));
    EXPECT_EQ(out[1], (Candidate{1, 1.0f}));
    EXPECT_EQ(out[2], (Candidate{2, 3.0f}));
}

TEST(ScanList, RejectsOutOfRangeCode) {
    Lut lut(1, 4, LutPrecision::f32);
    InvertedList list{{0}, {7}};
    EXPECT_THROW(scan_list(list, lut), std::out_of_range);
}

TEST_F(SearchFixture, ScanMatchesDirectReconstructionDistance) {
    const auto& idx = *index_;
    for (std::size_t qi = 0; qi < queries_->n; ++qi) {
        const auto q = queries_->row(qi);
        for (const auto list_id : select_clusters(idx, q, 4)) {
            std::vector<float> rq(idx.d);
            for (std::size_t j = 0; j < idx.d; ++j) rq[j] = q[j] - idx.coarse.row(list_id)[j];
            const auto cands = scan_list(idx.lists[list_id], build_lut(idx.cb, rq, LutPrecision::f32));
            for (std::size_t pos = 0; pos < cands.size(); ++pos) {
                const double direct = testing::reconstruction_distance(rq, idx.code(list_id, pos), idx.cb);
                ASSERT_NEAR(cands[pos].distance, direct, 1e-5 * direct + 1e-12);
            }
        }
    }
}

TEST(TopK, ShortListIsFullSortWithFlag) {
    const auto top = top_k({{3, 2.0f}, {1, 1.0f}, {2, 3.0f}}, 5);
    EXPECT_TRUE(top.short_count);
    ASSERT_EQ(top.items.size(), 3u);
    EXPECT_EQ(top.items[0].id, 1);
    EXPECT_EQ(top.items[2].id, 2);
    EXPECT_FALSE(top_k({{3, 2.0f}, {1, 1.0f}}, 2).short_count);
}

TEST(TopK, EqualDistancesGiveLowestIds) {
    std::vector<Candidate> c;
    for (std::int64_t id : {9, 4, 7, 1, 8, 2}) c.push_back({id, 1.0f});
    const auto top = top_k(c, 3);
    EXPECT_EQ(top.items, (std::vector<Candidate>{{1, 1.0f}, {2, 1.0f}, {4, 1.0f}}));
}

TEST(TopK, MatchesFullStableSort) {
    std::mt19937 rng(8);
    std::uniform_int_distribution<int> coarse(0, 50);  // many ties
    std::vector<Candidate> c;
    for (std::int64_t id = 0; id < 1000; ++id) c.push_back({id, coarse(rng) * 0.5f});
    auto reference = c;
    std::stable_sort(reference.begin(), reference.end(), [](const Candidate& a, const Candidate& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
    });
    auto shuffled = c;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto top = top_k(shuffled, 10);
    EXPECT_EQ(top.items, std::vector<Candidate>(reference.begin(), reference.begin() + 10));
    EXPECT_EQ(top_k(c, 10).items, top.items);  // independent of input order
}

TEST_F(SearchFixture, ExhaustiveProbeMatchesAdcOracle) {
    const auto& idx = *index_;
    for (std::size_t qi = 0; qi < queries_->n; ++qi) {
        const auto q = queries_->row(qi);
        const auto oracle = testing::adc_exhaustive(idx, q);
        const auto top = search(idx, q, {idx.ntotal, idx.nlist, LutPrecision::f32});
        ASSERT_EQ(top.items.size(), oracle.size());
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            ASSERT_EQ(top.items[i].id, oracle[i].second);
            ASSERT_EQ(top.items[i].distance, oracle[i].first);
        }
    }
}

TEST(Search, ReconstructionQueryRanksFirst) {
    // Base = exact reconstructions, so the query's own id has R = 0.
    const auto raw = synth_gaussian_mixture(2000, 8, 6, 0.1f, 41);
    const auto idx0 = build_index(raw, 8, 4, 8, 41);
    VectorSet recon(raw.n, raw.d);
    for (std::size_t l = 0; l < idx0.nlist; ++l) {
        for (std::size_t pos = 0; pos < idx0.lists[l].size(); ++pos) {
            const auto r = pq_decode(idx0.code(l, pos), idx0.cb);
            auto out = recon.row(idx0.lists[l].ids[pos]);
            for (std::size_t j = 0; j < raw.d; ++j) out[j] = idx0.coarse.row(l)[j] + r[j];
        }
    }
    auto idx = idx0;  // same quantizers, codes of the reconstructions
    for (auto& list : idx.lists) list = {};
    for (std::size_t i = 0; i < recon.n; ++i) {
        const auto l = nearest_centroid(recon.row(i), idx.coarse);
        std::vector<float> rq(raw.d);
        for (std::size_t j = 0; j < raw.d; ++j) rq[j] = recon.row(i)[j] - idx.coarse.row(l)[j];
        const auto code = pq_encode(rq, idx.cb);
        idx.lists[l].ids.push_back(i);
        idx.lists[l].codes.insert(idx.lists[l].codes.end(), code.begin(), code.end());
    }
    for (const std::size_t target : {0u, 123u, 1999u}) {
        const auto top = search(idx, recon.row(target), {5, 1, LutPrecision::f32});
        ASSERT_FALSE(top.items.empty());
        EXPECT_NEAR(top.items[0].distance, 0.0f, 1e-6f);
        const bool found = std::any_of(top.items.begin(), top.items.end(), [&](const Candidate& c) {
            return c.id == static_cast<std::int64_t>(target) && c.distance <= 1e-6f;
        });
        EXPECT_TRUE(found) << "target " << target;
    }
}

TEST_F(SearchFixture, PrecisionsOverlapHeavily) {
    const auto f32 = search_batch(*index_, *queries_, {10, 4, LutPrecision::f32});
    const auto e5m3 = search_batch(*index_, *queries_, {10, 4, LutPrecision::e5m3});
    EXPECT_GE(recall(e5m3.results, f32.results).mean, 0.7);
}

TEST_F(SearchFixture, BatchFlagsShortRows) {
    const auto batch = search_batch(*index_, *queries_, {index_->ntotal + 5, 1, LutPrecision::f32});
    EXPECT_EQ(batch.short_rows, queries_->n);
    EXPECT_EQ(batch.results.ids_row(0).back(), -1);
}

TEST(Recall, Examples) {
    NeighborLists gt(2, 4, false);
    gt.ids = {1, 2, 3, 4, 5, 6, 7, 8};
    EXPECT_EQ(recall(gt, gt).mean, 1.0);
    NeighborLists disjoint(2, 4, false);
    disjoint.ids = {10, 11, 12, 13, 14, 15, 16, 17};
    EXPECT_EQ(recall(disjoint, gt).mean, 0.0);

    NeighborLists g10(1, 10, false), half(1, 10, false);
    for (int i = 0; i < 10; ++i) {
        g10.ids[i] = i;
        half.ids[i] = i < 5 ? i : 100 + i;
    }
    EXPECT_EQ(recall(half, g10).mean, 0.5);
    std::reverse(half.ids.begin(), half.ids.end());  // permutation invariant
    EXPECT_EQ(recall(half, g10).per_query[0], 0.5);
}

TEST(Recall, MissingSlotsAndShapes) {
    NeighborLists gt(1, 3, false);
    gt.ids = {1, 2, 3};
    NeighborLists res(1, 3, false);
    res.ids = {1, -1, -1};
    EXPECT_DOUBLE_EQ(recall(res, gt).mean, 1.0 / 3.0);

    NeighborLists wide(1, 5, false);
    wide.ids = {1, 2, 9, 3, 4};  // recall@3 uses the first 3 columns
    NeighborLists three(1, 3, false);
    three.ids = {3, 4, 1};
    EXPECT_DOUBLE_EQ(recall(three, wide).mean, 1.0 / 3.0);

    NeighborLists two_rows(2, 3, false);
    EXPECT_THROW(recall(two_rows, gt), std::invalid_argument);
    EXPECT_THROW(recall(wide, gt), std::invalid_argument);
}

}  // namespace
}  // namespace fp8ann
