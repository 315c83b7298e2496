#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "morphseg/data/corpus.hpp"
#include "morphseg/data/dataset.hpp"
#include "morphseg/data/stats.hpp"
#include "morphseg/data/utf8.hpp"
#include "morphseg/data/vocabulary.hpp"

namespace morphseg::data {
namespace {

Dataset parse(const std::string& text, std::optional<Language> lang = std::nullopt) {
  std::istringstream in(text);
  return parse_dataset(in, "test", lang);
}

Dataset numbered(std::size_t n, std::optional<Language> lang = std::nullopt) {
  Dataset ds;
  ds.language = lang;
  const std::u32string letters = U"abcdef";
  for (std::size_t i = 0; i < n; ++i) {
    std::u32string w{letters[i % 6], letters[(i / 6) % 6], letters[(i / 36) % 6]};
    ds.examples.push_back({w, w.substr(0, 1) + U"|" + w.substr(1), Task::Segment, lang});
  }
  return ds;
}

TEST(LoadDataset, WixarikaExampleLine) {
  const Dataset ds = parse("nep+tikuyekai\tne|p+|ti|kuye|kai\n", Language::Wixarika);
  ASSERT_EQ(ds.size(), 1u);
  const SegExample& ex = ds.examples[0];
  EXPECT_EQ(ex.source, U"nep+tikuyekai");
  EXPECT_EQ(ex.target, U"ne|p+|ti|kuye|kai");
  EXPECT_EQ(ex.task, Task::Segment);
  EXPECT_EQ(ex.language, Language::Wixarika);
  EXPECT_EQ(split_morphs(ex.target), (std::vector<std::u32string>{U"ne", U"p+", U"ti", U"kuye", U"kai"}));
}

TEST(LoadDataset, NonSegmentableWord) {
  const Dataset ds = parse("malo\tmalo\n");
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.examples[0].target.find(kSeparatorChar), std::u32string::npos);
}

TEST(LoadDataset, MismatchIsParseErrorWithLine) {
  try {
    parse("# header\nmalo\tmalo\nabc\tab|d\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(LoadDataset, MalformedLines) {
  EXPECT_THROW(parse("abc ab|c\n"), ParseError);
  EXPECT_THROW(parse("abc\tab|c\tx\n"), ParseError);
  EXPECT_THROW(parse("abc\t|abc\n"), ParseError);
  EXPECT_THROW(parse("abc\tab||c\n"), ParseError);
  EXPECT_THROW(parse("abc\tabc|\n"), ParseError);
  EXPECT_THROW(parse("a|bc\ta|bc\n"), ParseError);
  EXPECT_THROW(parse("\t\n"), ParseError);
  EXPECT_THROW(parse("ab\xff\tab\xff\n"), ParseError);
}

TEST(LoadDataset, SkipsCommentsBlankLinesAndCarriageReturns) {
  const Dataset ds = parse("# comment\n\nab\ta|b\r\ncd\tcd\n");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.examples[0].target, U"a|b");
  EXPECT_EQ(ds.examples[1].source, U"cd");
}

TEST(LoadDataset, MissingFileIsDataError) {
  EXPECT_THROW(load_dataset("/nonexistent/file.train"), DataError);
}

TEST(LoadDataset, WriteRoundTrip) {
  const std::string text = "nep+tikuyekai\tne|p+|ti|kuye|kai\nmalo\tmalo\nko'koreyene\tko'kore|ye|ne\n";
  const Dataset ds = parse("# dropped\n" + text);
  std::ostringstream out;
  write_dataset(out, ds);
  EXPECT_EQ(out.str(), text);
}

TEST(Utf8, RejectsInvalidInput) {
  EXPECT_EQ(to_u32("ɨ'"), U"ɨ'");
  EXPECT_EQ(to_utf8(U"ɨ'"), "ɨ'");
  EXPECT_THROW(to_u32("\xc3"), DataError);
}

TEST(Language, CodesAndNames) {
  EXPECT_EQ(parse_language("YN"), Language::YoremNokki);
  EXPECT_EQ(parse_language("wx"), Language::Wixarika);
  EXPECT_EQ(parse_language("nahuatl"), Language::Nahuatl);
  EXPECT_EQ(parse_language("xx"), std::nullopt);
  EXPECT_EQ(language_code(Language::Mexicanero), "MX");
}

TEST(Vocabulary, TwoLetterAlphabet) {
  const std::vector<Dataset> sets{parse("ab\ta|b\nba\tba\n")};
  const Vocabulary v = Vocabulary::build(sets);
  EXPECT_EQ(v.alphabet(), U"ab");
  EXPECT_EQ(v.size(), Vocabulary::kReserved + 2);
  EXPECT_EQ(v.char_index(U'a'), Vocabulary::kReserved);
  EXPECT_EQ(v.char_index(U'b'), Vocabulary::kReserved + 1);
  EXPECT_EQ(v.index_or_unk(U'|'), Vocabulary::kSeparator);
  EXPECT_EQ(v.index_or_unk(U'z'), Vocabulary::kUnk);
}

TEST(Vocabulary, DeterministicAndBijective) {
  const std::vector<Dataset> sets{parse("nep+tikuyekai\tne|p+|ti|kuye|kai\nmalo\tmalo\n")};
  const Vocabulary a = Vocabulary::build(sets), b = Vocabulary::build(sets);
  EXPECT_EQ(a.symbols(), b.symbols());
  EXPECT_TRUE(a.char_index(U'+').has_value());
  std::set<std::string> names;
  for (std::size_t i = 0; i < a.size(); ++i) names.insert(a.symbol_name(i));
  EXPECT_EQ(names.size(), a.size());
  EXPECT_EQ(Vocabulary::from_symbols(a.symbols()), a);
}

TEST(Vocabulary, ReservedSymbolsAndOutputSpace) {
  const Vocabulary v(U"ba");
  EXPECT_EQ(v.symbol_name(Vocabulary::kPad), "<pad>");
  EXPECT_EQ(v.symbol_name(Vocabulary::language_index(Language::YoremNokki)), "L=YN");
  EXPECT_EQ(v.output_size(), 4u);
  EXPECT_EQ(v.output_to_symbol(Vocabulary::kOutputEos), Vocabulary::kEos);
  EXPECT_EQ(v.output_to_symbol(Vocabulary::kOutputSeparator), Vocabulary::kSeparator);
  EXPECT_EQ(v.output_to_symbol(2), Vocabulary::kReserved);
  for (std::size_t s : {Vocabulary::kPad, Vocabulary::kBos, Vocabulary::kUnk, Vocabulary::kSegMarker,
                        Vocabulary::kAeMarker, Vocabulary::language_index(Language::Nahuatl)}) {
    EXPECT_EQ(v.symbol_to_output(s), std::nullopt) << s;
  }
}

TEST(Vocabulary, FromSymbolsRejectsBadListings) {
  auto symbols = Vocabulary(U"ab").symbols();
  std::swap(symbols[Vocabulary::kReserved], symbols[Vocabulary::kReserved + 1]);
  EXPECT_THROW(Vocabulary::from_symbols(symbols), DataError);
  symbols = Vocabulary(U"ab").symbols();
  symbols[0] = "<nope>";
  EXPECT_THROW(Vocabulary::from_symbols(symbols), DataError);
}

TEST(RandomStrings, EmptyAndDeterministic) {
  const std::vector<std::size_t> lengths{3, 5};
  EXPECT_TRUE(generate_random_strings(U"ab", 0, lengths, 1).empty());
  EXPECT_EQ(generate_random_strings(U"ab", 50, lengths, 9), generate_random_strings(U"ab", 50, lengths, 9));
  EXPECT_NE(generate_random_strings(U"ab", 50, lengths, 9), generate_random_strings(U"ab", 50, lengths, 10));
  EXPECT_THROW(generate_random_strings(U"", 5, lengths, 1), std::invalid_argument);
}

TEST(RandomStrings, LengthsComeFromTheMultiset) {
  const std::vector<std::size_t> lengths{2, 2, 2, 7};
  std::map<std::size_t, std::size_t> seen;
  for (const auto& s : generate_random_strings(U"xyz", 4000, lengths, 3)) ++seen[s.size()];
  ASSERT_EQ(seen.size(), 2u);
  EXPECT_NEAR(static_cast<double>(seen[2]) / 4000.0, 0.75, 0.03);
}

TEST(RandomStrings, CharactersAreUniformPerPosition) {
  const std::vector<std::size_t> lengths{6};
  const auto strings = generate_random_strings(U"ab", 10000, lengths, 42);
  for (std::size_t pos = 0; pos < 6; ++pos) {
    std::size_t a = 0;
    for (const auto& s : strings) a += s[pos] == U'a';
    EXPECT_NEAR(static_cast<double>(a) / 10000.0, 0.5, 0.02) << "position " << pos;
  }
}

TEST(TrainingCorpus, S2sKeepsLabeledDataUnmarked) {
  const std::vector<Dataset> sets{numbered(10)};
  const auto corpus = build_training_corpus(sets, {TrainingMode::S2S, 1, {}, 1});
  ASSERT_EQ(corpus.examples.size(), 10u);
  for (const auto& ex : corpus.examples) {
    EXPECT_FALSE(ex.task.has_value());
    EXPECT_FALSE(ex.language.has_value());
  }
}

TEST(TrainingCorpus, MttUDoublesAtMultiplierOne) {
  const std::vector<Dataset> sets{numbered(427)};
  std::vector<std::u32string> aux;
  for (int i = 0; i < 1000; ++i) aux.push_back(U"w" + std::u32string(1 + i % 7, U'a' + (i % 5)) + U"q");
  const auto corpus = build_training_corpus(sets, {TrainingMode::MttU, 1, aux, 1});
  std::size_t seg = 0, ae = 0;
  for (const auto& ex : corpus.examples) {
    if (ex.task == Task::Segment) ++seg;
    if (ex.task == Task::Autoencode) {
      ++ae;
      EXPECT_EQ(ex.source, ex.target);
    }
  }
  EXPECT_EQ(seg, 427u);
  EXPECT_EQ(ae, 427u);
}

TEST(TrainingCorpus, DaUAddsUnmarkedIdentityExamples) {
  const std::vector<Dataset> sets{numbered(1)};
  const std::vector<std::u32string> aux{U"onemokokowaya"};
  const auto corpus = build_training_corpus(sets, {TrainingMode::DaU, 1, aux, 1});
  ASSERT_EQ(corpus.examples.size(), 2u);
  const auto& added = corpus.examples.back();
  EXPECT_EQ(added.source, U"onemokokowaya");
  EXPECT_EQ(added.target, U"onemokokowaya");
  EXPECT_FALSE(added.task.has_value());
}

TEST(TrainingCorpus, SizesForEveryAugmentedMode) {
  const std::vector<Dataset> sets{numbered(30)};
  std::vector<std::u32string> aux;
  for (int i = 0; i < 300; ++i) aux.push_back(std::u32string(1 + i % 9, U'a' + (i % 4)) + std::u32string(1 + i / 9 % 5, U'z'));
  for (TrainingMode mode : {TrainingMode::MttU, TrainingMode::MttR, TrainingMode::DaU, TrainingMode::DaR}) {
    for (std::size_t m : {1u, 2u, 4u, 8u}) {
      const auto corpus = build_training_corpus(sets, {mode, m, aux, 5});
      EXPECT_EQ(corpus.examples.size(), 30 * (1 + m)) << mode_name(mode) << " m=" << m;
      for (std::size_t i = 30; i < corpus.examples.size(); ++i) {
        EXPECT_EQ(corpus.examples[i].source, corpus.examples[i].target);
      }
    }
  }
}

TEST(TrainingCorpus, RandomStringsUseTheLabeledAlphabet) {
  const std::vector<Dataset> sets{numbered(20)};
  const auto corpus = build_training_corpus(sets, {TrainingMode::DaR, 4, {}, 2});
  const auto alphabet = source_alphabet(sets);
  for (std::size_t i = 20; i < corpus.examples.size(); ++i) {
    for (char32_t c : corpus.examples[i].source) EXPECT_NE(alphabet.find(c), std::u32string::npos);
  }
}

TEST(TrainingCorpus, DeterministicGivenSeed) {
  const std::vector<Dataset> sets{numbered(20)};
  const auto a = build_training_corpus(sets, {TrainingMode::MttR, 2, {}, 8});
  const auto b = build_training_corpus(sets, {TrainingMode::MttR, 2, {}, 8});
  ASSERT_EQ(a.examples.size(), b.examples.size());
  for (std::size_t i = 0; i < a.examples.size(); ++i) EXPECT_EQ(a.examples[i].source, b.examples[i].source);
}

TEST(TrainingCorpus, SmallAuxCorpusIsReusedWithWarning) {
  const std::vector<Dataset> sets{numbered(10)};
  const std::vector<std::u32string> aux{U"abc", U"abc", U"de"};
  const auto corpus = build_training_corpus(sets, {TrainingMode::DaU, 1, aux, 1});
  EXPECT_EQ(corpus.examples.size(), 20u);
  EXPECT_FALSE(corpus.warnings.empty());
}

TEST(TrainingCorpus, UnlabeledModesNeedAuxWords) {
  const std::vector<Dataset> sets{numbered(10)};
  EXPECT_THROW(build_training_corpus(sets, {TrainingMode::MttU, 1, {}, 1}), std::invalid_argument);
}

TEST(TrainingCorpus, XlingTagsEveryLanguage) {
  Dataset yn = parse("ko'koreyene\tko'kore|ye|ne\n", Language::YoremNokki);
  const std::vector<Dataset> sets{numbered(3, Language::Mexicanero), yn};
  const auto corpus = build_training_corpus(sets, {TrainingMode::Xling, 1, {}, 1});
  ASSERT_EQ(corpus.examples.size(), 4u);
  const auto& ex = corpus.examples.back();
  EXPECT_EQ(ex.language, Language::YoremNokki);
  EXPECT_EQ(ex.target, U"ko'kore|ye|ne");
  const Vocabulary vocab = Vocabulary::build(sets);
  const auto encoded = encode_example(vocab, ex);
  EXPECT_EQ(encoded.source.front(), Vocabulary::language_index(Language::YoremNokki));
  EXPECT_EQ(vocab.symbol_name(encoded.source.front()), "L=YN");

  const std::vector<Dataset> untagged{numbered(3)};
  EXPECT_THROW(build_training_corpus(untagged, {TrainingMode::Xling, 1, {}, 1}), std::invalid_argument);
}

TEST(Encode, RoundTripsInVocabularyExamples) {
  const std::vector<Dataset> sets{parse("nep+tikuyekai\tne|p+|ti|kuye|kai\n")};
  const Vocabulary vocab = Vocabulary::build(sets);
  SegExample ex = sets[0].examples[0];
  ex.task = Task::Segment;
  ex.language = Language::Wixarika;
  const auto enc = encode_example(vocab, ex);
  EXPECT_FALSE(enc.lossy);
  EXPECT_EQ(enc.target.back(), Vocabulary::kOutputEos);
  EXPECT_EQ(enc.decoder_input.front(), Vocabulary::kBos);
  EXPECT_EQ(enc.decoder_input.size(), enc.target.size());
  EXPECT_EQ(enc.word_length, 13u);
  const SegExample back = decode_example(vocab, enc);
  EXPECT_EQ(back.source, ex.source);
  EXPECT_EQ(back.target, ex.target);
  EXPECT_EQ(back.task, ex.task);
  EXPECT_EQ(back.language, ex.language);
}

TEST(Encode, UnknownCharacterIsLossy) {
  const Vocabulary vocab(U"ab");
  const SegExample ex{U"abz", U"abz", std::nullopt, std::nullopt};
  const auto enc = encode_source(vocab, ex);
  EXPECT_TRUE(enc.lossy);
  EXPECT_EQ(enc.source.back(), Vocabulary::kUnk);
  EXPECT_THROW(encode_example(vocab, ex), DataError);
}

TEST(Encode, MarkerPrecedesCharacters) {
  const Vocabulary vocab(U"ab");
  const auto enc = encode_source(vocab, {U"ab", U"ab", Task::Autoencode, std::nullopt});
  EXPECT_EQ(enc.source.front(), Vocabulary::kAeMarker);
  EXPECT_EQ(encode_source(vocab, {U"ab", U"ab", Task::Segment, std::nullopt}).source.front(),
            Vocabulary::kSegMarker);
}

TEST(Inference, MarkersFollowTheMode) {
  const Dataset ds = numbered(2, Language::Nahuatl);
  for (const auto& ex : prepare_for_inference(ds, TrainingMode::MttR)) {
    EXPECT_EQ(ex.task, Task::Segment);
    EXPECT_FALSE(ex.language.has_value());
  }
  for (const auto& ex : prepare_for_inference(ds, TrainingMode::DaR)) EXPECT_FALSE(ex.task.has_value());
  for (const auto& ex : prepare_for_inference(ds, TrainingMode::Xling)) EXPECT_EQ(ex.language, Language::Nahuatl);
  EXPECT_THROW(prepare_for_inference(numbered(2), TrainingMode::Xling), std::invalid_argument);
}

TEST(Stats, SingleUnsegmentedWord) {
  const auto s = corpus_stats(parse("a\ta\n"));
  EXPECT_EQ(s.words, 1u);
  EXPECT_EQ(s.seg_words, 0u);
  EXPECT_EQ(s.morphs, 1u);
  EXPECT_EQ(s.morphs_per_word, 1.0);
  EXPECT_EQ(s.max_morphs, 1u);
}

TEST(Stats, HandCountedCorpus) {
  const auto s = corpus_stats(parse("nepa\tne|pa\nnemi\tne|mi\nmalo\tmalo\nnepane\tne|pa|ne\n"), 2);
  EXPECT_EQ(s.words, 4u);
  EXPECT_EQ(s.seg_words, 3u);
  EXPECT_EQ(s.morphs, 8u);
  EXPECT_EQ(s.unique_morphs, 4u);  // ne pa mi malo
  EXPECT_DOUBLE_EQ(s.seg_per_word, 0.75);
  EXPECT_DOUBLE_EQ(s.morphs_per_word, 2.0);
  EXPECT_EQ(s.max_morphs, 3u);
  ASSERT_EQ(s.top_morphs.size(), 2u);
  EXPECT_EQ(s.top_morphs[0].morph, U"ne");
  EXPECT_EQ(s.top_morphs[0].count, 4u);
  EXPECT_EQ(s.top_morphs[1].morph, U"pa");

  std::ostringstream out;
  write_stats(out, s);
  EXPECT_NE(out.str().find("Seg/W: 0.750"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("4\tne"), std::string::npos) << out.str();
}

TEST(Stats, EmptyDatasetThrows) {
  EXPECT_THROW(corpus_stats(Dataset{}), DataError);
}

}  // namespace
}  // namespace morphseg::data
