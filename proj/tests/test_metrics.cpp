#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "segbound/dataset.hpp"
#include "segbound/errors.hpp"
#include "segbound/metrics.hpp"
#include "segbound/rng.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace segbound;
using namespace segbound::testutil;

namespace {

ReconstructionResult as_result(Segmentation seg) {
    ReconstructionResult r;
    r.segments = std::move(seg);
    return r;
}

} // namespace

TEST_CASE("reconstruction ratio is covered chars over document length") {
    Document doc = doc_of("d", "abcdef");
    CHECK(reconstruction_ratio(doc, seg_of({})) == 0.0);
    CHECK(reconstruction_ratio(doc, seg_of({{"A", Span(0, 6)}})) == 1.0);
    CHECK(reconstruction_ratio(doc, seg_of({{"A", Span(1, 3)}, {"B", Span(4, 5)}})) ==
          doctest::Approx(0.5));
    CHECK(reconstruction_ratio(doc_of("e", ""), seg_of({})) == 0.0);
}

TEST_CASE("exact match compares label and text content, not offsets") {
    // "xy" repeats, so a segment can match a gold twin elsewhere
    Document doc = doc_of("d", "xy xy ab cd");
    Segmentation gold = seg_of(
        {{"A", Span(0, 3)}, {"B", Span(3, 6)}, {"A", Span(6, 9)}, {"B", Span(9, 11)}});
    Segmentation pred = seg_of({{"A", Span(0, 3)}, {"B", Span(3, 6)}, {"A", Span(9, 11)}});

    PrecisionRecallF1 em = exact_match_f1(doc, pred, gold);
    CHECK(em.precision == doctest::Approx(2.0 / 3.0));
    CHECK(em.recall == doctest::Approx(0.5));
    CHECK(em.f1 == doctest::Approx(4.0 / 7.0));
}

TEST_CASE("exact match counts each side against the other's key set") {
    Document doc = doc_of("d", "xy xy ab");
    Segmentation gold = seg_of({{"A", Span(0, 3)}, {"B", Span(3, 6)}, {"A", Span(6, 8)}});
    // two predicted copies of the same key both count as matched
    Segmentation pred = seg_of({{"A", Span(0, 3)}, {"A", Span(3, 6)}});
    PrecisionRecallF1 em = exact_match_f1(doc, pred, gold);
    CHECK(em.precision == doctest::Approx(1.0));
    CHECK(em.recall == doctest::Approx(1.0 / 3.0));
    CHECK(em.f1 == doctest::Approx(0.5));
}

TEST_CASE("exact match conventions on empty inputs") {
    Document doc = doc_of("d", "ab cd");
    Segmentation gold = seg_of({{"A", Span(0, 3)}, {"B", Span(3, 5)}});
    PrecisionRecallF1 em = exact_match_f1(doc, seg_of({}), gold);
    CHECK(em.precision == 0.0);
    CHECK(em.recall == 0.0);
    CHECK(em.f1 == 0.0);
}

TEST_CASE("char f1 weights per label scores by gold support") {
    Document doc = doc_of("d", "abcd");
    Segmentation gold = seg_of({{"A", Span(0, 2)}, {"B", Span(2, 4)}});
    // one char of B predicted as A: f1(A) = 0.8, f1(B) = 2/3, equal support
    Segmentation pred = seg_of({{"A", Span(0, 3)}, {"B", Span(3, 4)}});
    CHECK(char_f1(doc, pred, gold) == doctest::Approx(11.0 / 15.0));

    // uncovered chars take the none label, which has no gold support
    CHECK(char_f1(doc, seg_of({{"A", Span(0, 2)}}), gold) == doctest::Approx(0.5));
    CHECK(char_f1(doc, seg_of({}), gold) == doctest::Approx(0.0));
    CHECK(char_f1(doc, gold, gold) == doctest::Approx(1.0));

    // the label set overload cannot change the answer
    LabelSet labels({"A", "B", "unused"});
    CHECK(char_f1(doc, pred, gold, labels) == doctest::Approx(11.0 / 15.0));
}

TEST_CASE("char f1 insists on a lossless gold") {
    Document doc = doc_of("d", "abcd");
    Segmentation gappy = seg_of({{"A", Span(0, 2)}});
    CHECK_THROWS_AS(char_f1(doc, gappy, gappy), GoldNotLossless);
    Segmentation empty;
    CHECK_THROWS_AS(char_f1(doc_of("e", ""), empty, empty), GoldNotLossless);
}

TEST_CASE("pk probes pairs a window apart") {
    Document doc = doc_of("d", "abcdef");
    Segmentation gold = seg_of({{"A", Span(0, 2)}, {"B", Span(2, 4)}, {"A", Span(4, 6)}});
    // default window: round(0.5 * 6 / 3) = 1, probes (i, i+1) for i in [0,5).
    // gold breaks after chars 1 and 3, pred breaks after char 2: probes
    // (1,2), (2,3) and (3,4) all disagree
    Segmentation pred = seg_of({{"A", Span(0, 3)}, {"B", Span(3, 6)}});
    CHECK(pk(doc, pred, gold) == doctest::Approx(0.6));
    CHECK(pk(doc, gold, gold) == doctest::Approx(0.0));
    // a single covering segment misses both gold breaks
    CHECK(pk(doc, seg_of({{"A", Span(0, 6)}}), gold) == doctest::Approx(0.4));
}

TEST_CASE("pk treats each uncovered gap as its own region") {
    Document doc = doc_of("d", "abcdef");
    Segmentation gold = seg_of({{"A", Span(0, 2)}, {"B", Span(2, 4)}, {"A", Span(4, 6)}});
    // pred regions: gap [0,1), segment [1,3), gap [3,6)
    Segmentation pred = seg_of({{"A", Span(1, 3)}});
    CHECK(pk(doc, pred, gold, 2) == doctest::Approx(0.25));
}

TEST_CASE("pk window validation") {
    Document doc = doc_of("d", "abcdef");
    Segmentation gold = seg_of({{"A", Span(0, 3)}, {"B", Span(3, 6)}});
    CHECK_THROWS_AS(pk(doc, gold, gold, 6), WindowTooLarge);
    CHECK(pk(doc, gold, gold, 5) == doctest::Approx(0.0));

    // a one char document cannot host even the minimum window
    Document tiny = doc_of("t", "a");
    Segmentation tiny_gold = seg_of({{"A", Span(0, 1)}});
    CHECK_THROWS_AS(pk(tiny, tiny_gold, tiny_gold), WindowTooLarge);
}

TEST_CASE("label f1 pairs each prediction with its max overlap gold segment") {
    Document doc = doc_of("d", "abcdef");
    Segmentation gold = seg_of({{"A", Span(0, 3)}, {"B", Span(3, 6)}});
    CHECK(f1_label(doc, seg_of({{"A", Span(0, 4)}, {"B", Span(4, 6)}}), gold) ==
          doctest::Approx(1.0));
    CHECK(f1_label(doc, seg_of({{"A", Span(0, 4)}, {"A", Span(4, 6)}}), gold) ==
          doctest::Approx(0.5));
    // equal overlap resolves to the earlier gold segment
    CHECK(f1_label(doc, seg_of({{"A", Span(2, 4)}}), gold) == doctest::Approx(1.0));
    CHECK(f1_label(doc, seg_of({{"B", Span(2, 4)}}), gold) == doctest::Approx(0.0));
    CHECK(f1_label(doc, seg_of({}), gold) == 0.0);
    CHECK_THROWS_AS(f1_label(doc, gold, seg_of({{"A", Span(0, 3)}})), GoldNotLossless);
}

TEST_CASE("reward multiplies coverage by the mean of the two f1 scores") {
    Document doc = doc_of("d", "abcd");
    Segmentation gold = seg_of({{"A", Span(0, 2)}, {"B", Span(2, 4)}});

    RewardBreakdown full = reward(doc, as_result(seg_of({{"A", Span(0, 3)}, {"B", Span(3, 4)}})), gold);
    CHECK(full.rho_rec == doctest::Approx(1.0));
    CHECK(full.em_f1 == doctest::Approx(0.0)); // no text+label pair survives the shift
    CHECK(full.char_f1 == doctest::Approx(11.0 / 15.0));
    CHECK(full.reward == doctest::Approx(11.0 / 30.0));

    RewardBreakdown half = reward(doc, as_result(seg_of({{"B", Span(2, 4)}})), gold);
    CHECK(half.rho_rec == doctest::Approx(0.5));
    CHECK(half.em_f1 == doctest::Approx(2.0 / 3.0));
    CHECK(half.char_f1 == doctest::Approx(0.5));
    CHECK(half.reward == doctest::Approx(7.0 / 24.0));

    RewardBreakdown perfect = reward(doc, as_result(gold), gold);
    CHECK(perfect.reward == doctest::Approx(1.0));
    RewardBreakdown nothing = reward(doc, as_result(seg_of({})), gold);
    CHECK(nothing.reward == 0.0);
}

TEST_CASE("evaluate fills the metric suite and the counts") {
    Document doc = doc_of("d", "xy xy ab cd");
    Segmentation gold = seg_of(
        {{"A", Span(0, 3)}, {"B", Span(3, 6)}, {"A", Span(6, 9)}, {"B", Span(9, 11)}});
    Segmentation pred = seg_of({{"A", Span(0, 3)}, {"B", Span(3, 6)}, {"A", Span(9, 11)}});

    EvalReport rep = evaluate(doc, pred, 3, gold);
    CHECK(rep.rho_rec == doctest::Approx(reconstruction_ratio(doc, pred)));
    CHECK(rep.em_f1 == doctest::Approx(4.0 / 7.0));
    CHECK(rep.char_f1 == doctest::Approx(char_f1(doc, pred, gold)));
    CHECK(rep.pk == doctest::Approx(pk(doc, pred, gold)));
    CHECK(rep.f1_lab == doctest::Approx(f1_label(doc, pred, gold)));
    CHECK(rep.counts.predicted == 3);
    CHECK(rep.counts.gold == 4);
    CHECK(rep.counts.exact_matched == 2);
    CHECK(rep.counts.discarded == 3);

    ReconstructionResult rr = as_result(pred);
    rr.discarded.push_back({7, "sequence not found"});
    EvalReport rep2 = evaluate(doc, rr, gold);
    CHECK(rep2.counts.discarded == 1);
    CHECK(rep2.em_f1 == doctest::Approx(rep.em_f1));
}

TEST_CASE("metrics agree with the reference implementations on random inputs") {
    CorpusSpec spec;
    spec.n_docs = 8;
    spec.min_words = 30;
    spec.max_words = 90;
    spec.seed = 21;
    auto records = generate_synthetic_corpus(spec);

    Rng rng(99);
    std::size_t checked = 0;
    for (const auto& rec : records) {
        for (int trial = 0; trial < 24; ++trial) {
            Segmentation pred = random_prediction(rec.doc, spec.labels, rng);
            ++checked;

            CHECK(reconstruction_ratio(rec.doc, pred) ==
                  doctest::Approx(oracle::rho(rec.doc, pred)).epsilon(1e-12));

            CHECK(char_f1(rec.doc, pred, rec.gold) ==
                  doctest::Approx(oracle::char_f1(rec.doc, pred, rec.gold)).epsilon(1e-9));

            std::size_t w = oracle::default_window(rec.doc, rec.gold);
            CHECK(pk(rec.doc, pred, rec.gold) ==
                  doctest::Approx(oracle::pk(rec.doc, pred, rec.gold, w)).epsilon(1e-12));

            PrecisionRecallF1 em = exact_match_f1(rec.doc, pred, rec.gold);
            oracle::EmOracle oem = oracle::em(rec.doc, pred, rec.gold);
            CHECK(em.precision == doctest::Approx(oem.precision).epsilon(1e-12));
            CHECK(em.recall == doctest::Approx(oem.recall).epsilon(1e-12));
            CHECK(em.f1 == doctest::Approx(oem.f1).epsilon(1e-12));

            CHECK(f1_label(rec.doc, pred, rec.gold) ==
                  doctest::Approx(oracle::f1_label(rec.doc, pred, rec.gold)).epsilon(1e-12));
        }

        // a faithful reconstruction scores a full reward
        Rng trng(7);
        for (OutputPattern p : {OutputPattern::Start, OutputPattern::End, OutputPattern::StartEnd}) {
            BoundaryOutput out = make_targets(rec.doc, rec.gold, p, trng);
            RewardBreakdown rb = reward(rec.doc, reconstruct(rec.doc, out), rec.gold);
            CHECK(rb.reward == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    CHECK(checked == 8 * 24);
}
