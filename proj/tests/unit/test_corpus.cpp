#include <doctest.h>

#include <sstream>

#include "biocom/corpus.hpp"
#include "biocom/error.hpp"

using namespace biocom;

namespace {

Dictionary small_dict() {
  Dictionary d;
  d.add(ConceptId("D1"), "flu");
  d.add(ConceptId("D2"), "fever");
  return d;
}

}  // namespace

TEST_CASE("link modes") {
  const Matcher m(small_dict());
  const RawSentence s{"doc1", 3, "flu and fever"};

  const auto all = link_sentence(m, s, LinkMode::all);
  REQUIRE(all.size() == 1);
  CHECK(all[0].mentions.size() == 2);

  const auto one = link_sentence(m, s, LinkMode::one);
  REQUIRE(one.size() == 2);
  CHECK(one[0].mentions == std::vector<MentionSpan>{all[0].mentions[0]});
  CHECK(one[1].mentions == std::vector<MentionSpan>{all[0].mentions[1]});
  CHECK(one[1].doc_id == "doc1");
  CHECK(one[1].sent_id == 3);

  CHECK(link_sentence(m, {"doc1", 4, "nothing here"}, LinkMode::all).empty());
}

TEST_CASE("link_corpus drops excluded docs and unmatched sentences, keeps order under threads") {
  const Matcher m(small_dict());
  std::vector<RawSentence> in;
  for (int i = 0; i < 100; ++i) {
    std::string text = i % 3 == 0 ? "no match" : (i % 3 == 1 ? "flu" : "flu, then fever");
    in.push_back({"d" + std::to_string(i % 10), i, text});
  }
  const std::set<std::string> excluded{"d0", "d7"};
  for (LinkMode mode : {LinkMode::all, LinkMode::one}) {
    const auto serial = link_corpus(m, in, mode, excluded, 1);
    CHECK(serial == link_corpus(m, in, mode, excluded, 4));
    std::size_t expected = 0;
    for (const auto& s : in) {
      if (excluded.count(s.doc_id)) continue;
      const std::size_t k = m.find(s.text).size();
      expected += mode == LinkMode::one ? k : (k > 0 ? 1 : 0);
    }
    CHECK(serial.size() == expected);
    for (const auto& s : serial) CHECK(excluded.count(s.doc_id) == 0);
  }
}

TEST_CASE("link_stream reports counts") {
  const Matcher m(small_dict());
  std::istringstream in(R"({"doc_id":"a","sent_id":1,"text":"flu and fever"}
{"doc_id":"b","sent_id":2,"text":"flu"}

{"doc_id":"c","sent_id":3,"text":"nothing"}
)");
  std::ostringstream out;
  const auto summary = link_stream(m, in, out, LinkMode::one, {"b"});
  CHECK(summary.read == 3);
  CHECK(summary.excluded == 1);
  CHECK(summary.unmatched == 1);
  CHECK(summary.emitted == 2);
  std::istringstream back(out.str());
  const auto linked = read_linked_sentences(back);
  CHECK(linked.size() == 2);
}

TEST_CASE("malformed records name their line") {
  const Matcher m(small_dict());
  std::istringstream in("{\"doc_id\":\"a\",\"sent_id\":1,\"text\":\"flu\"}\n{not json}\n");
  std::ostringstream out;
  try {
    link_stream(m, in, out, LinkMode::all, {});
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_raw_sentence(R"({"doc_id":"a","sent_id":1,"text":""})", "x", 1), ParseError);
  CHECK_THROWS_AS(parse_linked_sentence(R"({"doc_id":"a","sent_id":1,"text":"ab","mentions":[{"start":1,"end":5,"concept":"C"}]})", "x", 1),
                  ParseError);
}

TEST_CASE("linked sentences round trip through JSON") {
  LinkedSentence s{"doc", 7, "Crohn’s flu", {{8, 11, ConceptId("D1")}}};
  CHECK(parse_linked_sentence(to_json_line(s), "x", 1) == s);
}

TEST_CASE("corpus statistics") {
  const auto empty = corpus_stats({});
  CHECK(empty.sentences == 0);
  CHECK(empty.mentions == 0);
  CHECK(empty.concepts == 0);

  std::vector<LinkedSentence> one{{"d", 1, "flu flu", {{0, 3, ConceptId("D1")}, {4, 7, ConceptId("D1")}}}};
  const auto st = corpus_stats(one);
  CHECK(st.sentences == 1);
  CHECK(st.mentions == 2);
  CHECK(st.concepts == 1);
  CHECK(st.sentences_per_concept.at(ConceptId("D1")) == 1);
  CHECK(st.histogram.at(1) == 1);
}

TEST_CASE("link mode names") {
  CHECK(parse_link_mode("one") == LinkMode::one);
  CHECK(link_mode_name(LinkMode::all) == "all");
  CHECK_THROWS(parse_link_mode("some"));
}
