#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "segbound/core.hpp"
#include "segbound/errors.hpp"
#include "segbound/rng.hpp"
#include "segbound/text.hpp"
#include "testutil.hpp"

using namespace segbound;
using namespace segbound::testutil;

TEST_CASE("utf8 round trip covers 1 to 4 byte sequences") {
    const std::string s = "plain caf\xc3\xa9 na\xc3\xafve \xe4\xb8\xad\xe6\x96\x87 \xf0\x9f\x99\x82";
    std::u32string u = utf8_decode(s);
    CHECK(utf8_encode(u) == s);
    CHECK(u.size() == 21); // code points, not bytes
    CHECK(u[9] == U'é');
    CHECK(u.back() == U'\U0001f642');
}

TEST_CASE("utf8 decode rejects malformed input") {
    CHECK_THROWS_AS(utf8_decode("\x80"), Error);             // bare continuation
    CHECK_THROWS_AS(utf8_decode("\xc3"), Error);             // truncated
    CHECK_THROWS_AS(utf8_decode("\xc0\xaf"), Error);         // overlong
    CHECK_THROWS_AS(utf8_decode("\xe0\x80\xaf"), Error);     // overlong
    CHECK_THROWS_AS(utf8_decode("\xed\xa0\x80"), Error);     // surrogate
    CHECK_THROWS_AS(utf8_decode("\xf5\x80\x80\x80"), Error); // above U+10FFFF
    CHECK(utf8_decode("").empty());
}

TEST_CASE("whitespace set is exactly the six ascii characters") {
    for (char32_t c : {U' ', U'\t', U'\n', U'\r', U'\v', U'\f'})
        CHECK(is_space(c));
    CHECK_FALSE(is_space(U'a'));
    CHECK_FALSE(is_space(U' ')); // nbsp stays inside words
    CHECK_FALSE(is_space(U'\0'));
}

TEST_CASE("trim strips both ends only") {
    CHECK(trim(std::string_view("  a b \t\n")) == "a b");
    CHECK(trim(std::string_view("")) == "");
    CHECK(trim(std::string_view(" \r\n ")) == "");
    std::u32string u = U" \tx y\n";
    CHECK(trim(std::u32string_view(u)) == U"x y");
}

TEST_CASE("words are maximal non-whitespace runs with spans") {
    auto ws = words(U"  foo  bar\nbaz ");
    REQUIRE(ws.size() == 3);
    CHECK(ws[0].text == U"foo");
    CHECK(ws[0].span == Span(2, 5));
    CHECK(ws[1].text == U"bar");
    CHECK(ws[1].span == Span(7, 10));
    CHECK(ws[2].text == U"baz");
    CHECK(ws[2].span == Span(11, 14));
    CHECK(words(U"").empty());
    CHECK(words(U" \t\n").empty());
    CHECK(words(U"solo").size() == 1);
}

TEST_CASE("rng streams are deterministic and fork independent") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i)
        CHECK(a.next() == b.next());

    Rng base(7);
    Rng f1 = base.fork(1, 0);
    Rng f2 = base.fork(1, 1);
    Rng f3 = base.fork(2, 0);
    std::set<std::uint64_t> firsts{f1.next(), f2.next(), f3.next(), Rng(7).next()};
    CHECK(firsts.size() == 4);

    // forking is const and repeatable
    Rng g1 = base.fork(1, 0);
    CHECK(g1.next() == Rng(7).fork(1, 0).next());
}

TEST_CASE("rng uniform stays in bounds and reaches them") {
    Rng r(3);
    CHECK(r.uniform(5, 5) == 5);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        std::uint64_t v = r.uniform(0, 9);
        CHECK(v <= 9);
        seen.insert(v);
    }
    CHECK(seen.size() == 10);
    for (int i = 0; i < 100; ++i) {
        double x = r.uniform_real();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("stable hash matches the published fnv-1a vectors") {
    CHECK(stable_hash("") == 14695981039346656037ULL);
    CHECK(stable_hash("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(stable_hash("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("label sets validate their names") {
    LabelSet two({"a", "b"});
    CHECK(two.size() == 2);
    CHECK(two.contains("a"));
    CHECK_FALSE(two.contains("c"));
    CHECK(LabelSet::default_taxonomy().size() == 5);
    CHECK(LabelSet::default_taxonomy().contains("output format"));

    CHECK_THROWS_AS(LabelSet({"only"}), Error);
    CHECK_THROWS_AS(LabelSet({"a", "a"}), Error);
    CHECK_THROWS_AS(LabelSet({"a", ""}), Error);
    CHECK_THROWS_AS(LabelSet({"a", "b\tc"}), Error);
    CHECK_THROWS_AS(LabelSet({"a", "b\nc"}), Error);
}

TEST_CASE("spans are non-empty half-open intervals") {
    Span s(2, 5);
    CHECK(s.size() == 3);
    CHECK_THROWS_AS(Span(3, 3), std::invalid_argument);
    CHECK_THROWS_AS(Span(4, 3), std::invalid_argument);
}

TEST_CASE("segment_text slices by code points") {
    Document d = doc_of("d", "a caf\xc3\xa9 b");
    CHECK(utf8_encode(segment_text(d, {"x", Span(2, 6)})) == "caf\xc3\xa9");
    CHECK_THROWS_AS(segment_text(d, {"x", Span(2, 99)}), OutOfBounds);
}

TEST_CASE("validation accepts a lossless tiling") {
    Document d = doc_of("d", "abcdef");
    auto rep = validate_segmentation(d, seg_of({{"a", Span(0, 3)}, {"b", Span(3, 6)}}));
    CHECK(rep.ok);
    CHECK(rep.lossless);
    CHECK(rep.violations.empty());
}

TEST_CASE("validation reports overlap, bounds, and label repeats") {
    Document d = doc_of("d", "abcdef");

    auto overlap = validate_segmentation(d, seg_of({{"a", Span(0, 4)}, {"b", Span(3, 6)}}));
    CHECK_FALSE(overlap.ok);
    REQUIRE(overlap.violations.size() == 1);
    CHECK(overlap.violations[0].index == 1);

    auto oob = validate_segmentation(d, seg_of({{"a", Span(0, 9)}}));
    CHECK_FALSE(oob.ok);

    auto repeat = validate_segmentation(d, seg_of({{"a", Span(0, 3)}, {"a", Span(3, 6)}}));
    CHECK_FALSE(repeat.ok);

    //same label across a gap is still a repeat under the ordering rule
    auto gap_repeat = validate_segmentation(d, seg_of({{"a", Span(0, 2)}, {"a", Span(4, 6)}}));
    CHECK_FALSE(gap_repeat.ok);

    LabelSet labels({"a", "b"});
    auto foreign = validate_segmentation(d, seg_of({{"z", Span(0, 6)}}), &labels);
    CHECK_FALSE(foreign.ok);
}

TEST_CASE("gaps keep a segmentation valid but not lossless") {
    Document d = doc_of("d", "abcdef");
    auto rep = validate_segmentation(d, seg_of({{"a", Span(0, 2)}, {"b", Span(4, 6)}}));
    CHECK(rep.ok);
    CHECK_FALSE(rep.lossless);

    auto tail = validate_segmentation(d, seg_of({{"a", Span(0, 5)}}));
    CHECK(tail.ok);
    CHECK_FALSE(tail.lossless);

    auto empty = validate_segmentation(d, Segmentation{});
    CHECK(empty.ok);
    CHECK_FALSE(empty.lossless);
}
