#include "support.hpp"

#include <algorithm>
#include <set>

#include "morphseg/data/corpus.hpp"
#include "morphseg/data/vocabulary.hpp"
#include "morphseg/model/seq2seq.hpp"

namespace morphseg::testing {

using ad::Node;
using ad::Tape;
using ad::Tensor;

Tensor random_tensor(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t = Tensor::matrix(rows, cols);
  for (double& v : t.data()) v = u(rng);
  return t;
}

namespace {

std::size_t dim(std::mt19937_64& rng, std::size_t lo = 1, std::size_t hi = 5) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// sum(out .* R) for a random R that is identical on every call.
Node project(Node out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tensor r(out.value().shape());
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : r.data()) v = u(rng);
  return ad::sum(ad::hadamard(out, out.tape().constant(std::move(r))));
}

GradCase unary(std::mt19937_64& rng, Node (*op)(Node)) {
  const std::uint64_t s = rng();
  return {[=](Tape&, std::span<const Node> in) { return project(op(in[0]), s); },
          {random_tensor(rng, dim(rng), dim(rng), -2.0, 2.0)}};
}

GradCase binary(std::mt19937_64& rng, Node (*op)(Node, Node)) {
  const std::uint64_t s = rng();
  const std::size_t r = dim(rng), c = dim(rng);
  return {[=](Tape&, std::span<const Node> in) { return project(op(in[0], in[1]), s); },
          {random_tensor(rng, r, c), random_tensor(rng, r, c)}};
}

std::vector<OpCase> build_op_cases() {
  std::vector<OpCase> cases;
  cases.push_back({"matmul", [](std::mt19937_64& rng) {
                     const std::uint64_t s = rng();
                     const std::size_t m = dim(rng), k = dim(rng), n = dim(rng);
                     return GradCase{[=](Tape&, std::span<const Node> in) { return project(ad::matmul(in[0], in[1]), s); },
                                     {random_tensor(rng, m, k), random_tensor(rng, k, n)}};
                   }});
  cases.push_back({"add", [](std::mt19937_64& rng) { return binary(rng, ad::add); }});
  cases.push_back({"sub", [](std::mt19937_64& rng) { return binary(rng, ad::sub); }});
  cases.push_back({"hadamard", [](std::mt19937_64& rng) { return binary(rng, ad::hadamard); }});
  cases.push_back({"tanh", [](std::mt19937_64& rng) { return unary(rng, ad::tanh); }});
  cases.push_back({"sigmoid", [](std::mt19937_64& rng) { return unary(rng, ad::sigmoid); }});
  cases.push_back({"add_bias", [](std::mt19937_64& rng) {
                     const std::uint64_t s = rng();
                     const std::size_t r = dim(rng), c = dim(rng);
                     Tensor bias = random_tensor(rng, 1, c);
                     bias = Tensor({c}, std::vector<double>(bias.data().begin(), bias.data().end()));
                     return GradCase{[=](Tape&, std::span<const Node> in) { return project(ad::add_bias(in[0], in[1]), s); },
                                     {random_tensor(rng, r, c), bias}};
                   }});
  cases.push_back({"add_tiled", [](std::mt19937_64& rng) {
                     const std::uint64_t s = rng();
                     const std::size_t k = dim(rng), b = dim(rng), c = dim(rng);
                     return GradCase{[=](Tape&, std::span<const Node> in) { return project(ad::add_tiled(in[0], in[1]), s); },
                                     {random_tensor(rng, k * b, c), random_tensor(rng, b, c)}};
                   }});
  cases.push_back({"concat_cols", [](std::mt19937_64& rng) {
                     const std::uint64_t s = rng();
                     const std::size_t r = dim(rng);
                     return GradCase{[=](Tape&, std::span<const Node> in) {
                                       return project(ad::concat_cols(std::vector<Node>{in[0], in[1], in[0]}), s);
                                     },
                                     {random_tensor(rng, r, dim(rng)), random_tensor(rng, r, dim(rng))}};
                   }});
  cases.push_back({"concat_rows", [](std::mt19937_64& rng) {
                     const std::uint64_t s = rng();
                     const std::size_t c = dim(rng);
                     return GradCase{[=](Tape&, std::span<const Node> in) {
                                       return project(ad::concat_rows(std::vector<Node>{in[0], in[1]}), s);
                                     },
                                     {random_tensor(rng, dim(rng), c), random_tensor(rng, dim(rng), c)}};
                   }});
  cases.push_back({"slice_rows", [](std::mt19937_64& rng) {
                     const std::uint64_t s = rng();
                     const std::size_t r = dim(rng, 1, 6), c = dim(rng);
                     const std::size_t begin = dim(rng, 0, r - 1);
                     const std::size_t count = dim(rng, 1, r - begin);
                     return GradCase{[=](Tape&, std::span<const Node> in) {
                                       return project(ad::slice_rows(in[0], begin, count), s);
                                     },
                                     {random_tensor(rng, r, c)}};
                   }});
  cases.push_back({"gather_rows", [](std::mt19937_64& rng) {
                     const std::uint64_t s = rng();
                     const std::size_t r = dim(rng), c = dim(rng);
                     std::vector<std::size_t> idx(dim(rng, 1, 8));
                     for (auto& i : idx) i = dim(rng, 0, r - 1);
                     return GradCase{[=](Tape&, std::span<const Node> in) { return project(ad::gather_rows(in[0], idx), s); },
                                     {random_tensor(rng, r, c)}};
                   }});
  cases.push_back({"select_rows", [](std::mt19937_64& rng) {
                     const std::uint64_t s = rng();
                     const std::size_t r = dim(rng), c = dim(rng);
                     std::vector<std::uint8_t> take(r);
                     for (auto& t : take) t = static_cast<std::uint8_t>(rng() % 2);
                     return GradCase{[=](Tape&, std::span<const Node> in) {
                                       return project(ad::select_rows(take, in[0], in[1]), s);
                                     },
                                     {random_tensor(rng, r, c), random_tensor(rng, r, c)}};
                   }});
  cases.push_back({"reshape", [](std::mt19937_64& rng) {
                     const std::uint64_t s = rng();
                     const std::size_t r = dim(rng), c = dim(rng);
                     return GradCase{[=](Tape&, std::span<const Node> in) { return project(ad::reshape(in[0], c, r), s); },
                                     {random_tensor(rng, r, c)}};
                   }});
  cases.push_back({"transpose", [](std::mt19937_64& rng) { return unary(rng, ad::transpose); }});
  cases.push_back({"softmax", [](std::mt19937_64& rng) { return unary(rng, ad::softmax); }});
  cases.push_back({"masked_softmax", [](std::mt19937_64& rng) {
                     const std::uint64_t s = rng();
                     const std::size_t r = dim(rng), c = dim(rng, 1, 6);
                     std::vector<std::uint8_t> mask(r * c);
                     for (std::size_t i = 0; i < r; ++i) {
                       const std::size_t keep = dim(rng, 0, c - 1);
                       for (std::size_t j = 0; j < c; ++j) mask[i * c + j] = (j == keep || rng() % 2) ? 1 : 0;
                     }
                     return GradCase{[=](Tape&, std::span<const Node> in) {
                                       return project(ad::masked_softmax(in[0], mask), s);
                                     },
                                     {random_tensor(rng, r, c, -2.0, 2.0)}};
                   }});
  cases.push_back({"weighted_row_sum", [](std::mt19937_64& rng) {
                     const std::uint64_t s = rng();
                     const std::size_t b = dim(rng), t = dim(rng), d = dim(rng);
                     return GradCase{[=](Tape&, std::span<const Node> in) {
                                       return project(ad::weighted_row_sum(in[0], in[1]), s);
                                     },
                                     {random_tensor(rng, b, t), random_tensor(rng, t * b, d)}};
                   }});
  cases.push_back({"cross_entropy", [](std::mt19937_64& rng) {
                     const std::size_t n = dim(rng, 1, 8);
                     const std::size_t target = dim(rng, 0, n - 1);
                     Tensor d = random_tensor(rng, 1, n, 0.1, 1.0);
                     return GradCase{[=](Tape&, std::span<const Node> in) { return ad::cross_entropy(in[0], target); },
                                     {Tensor({n}, std::vector<double>(d.data().begin(), d.data().end()))}};
                   }});
  cases.push_back({"cross_entropy_rows", [](std::mt19937_64& rng) {
                     const std::uint64_t s = rng();
                     const std::size_t r = dim(rng), c = dim(rng);
                     std::vector<std::size_t> targets(r);
                     for (auto& t : targets) t = rng() % 4 == 0 ? ad::kIgnoreTarget : dim(rng, 0, c - 1);
                     return GradCase{[=](Tape&, std::span<const Node> in) {
                                       return project(ad::cross_entropy_rows(in[0], targets), s);
                                     },
                                     {random_tensor(rng, r, c, 0.1, 1.0)}};
                   }});
  cases.push_back({"sum", [](std::mt19937_64& rng) {
                     return GradCase{[](Tape&, std::span<const Node> in) { return ad::sum(ad::hadamard(in[0], in[0])); },
                                     {random_tensor(rng, dim(rng), dim(rng))}};
                   }});
  return cases;
}

}  // namespace

const std::vector<OpCase>& op_cases() {
  static const std::vector<OpCase> cases = build_op_cases();
  return cases;
}

model::ModelParams random_params(const model::ModelConfig& config, std::size_t vocab_size, std::size_t output_size,
                                 std::uint64_t seed, double scale) {
  model::ModelParams p(config, vocab_size, output_size);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (ad::ParamId id = 0; id < p.arrays().size(); ++id) {
    Tensor t(p.arrays().value(id).shape());
    for (double& v : t.data()) v = u(rng);
    p.arrays().assign(id, std::move(t));
  }
  return p;
}

ad::GradCheckResult sequence_nll_gradcheck(std::uint64_t seed, double eps, ad::FiniteDifference scheme) {
  data::Dataset ds;
  ds.examples.push_back({U"abc", U"a|bc", data::Task::Segment, std::nullopt});
  const std::vector<data::Dataset> sets{ds};
  const auto vocab = data::Vocabulary::build(sets);
  const auto encoded = data::encode_example(vocab, ds.examples.front());
  const model::ModelParams params =
      random_params(model::ModelConfig{4, 6, 4}, vocab.size(), vocab.output_size(), seed);

  std::vector<Tensor> inputs;
  for (ad::ParamId id = 0; id < params.arrays().size(); ++id) inputs.push_back(params.arrays().value(id));
  const ad::ScalarFunction f = [&](Tape&, std::span<const Node> nodes) {
    return model::sequence_nll(model::bind_nodes(params, nodes), encoded);
  };
  return ad::finite_difference_check(f, inputs, eps, scheme);
}

std::vector<std::size_t> brute_force_boundaries(const std::u32string& segmented) {
  std::size_t letters = 0;
  for (char32_t c : segmented) letters += c != data::kSeparatorChar;
  std::vector<std::size_t> out;
  std::size_t seen = 0;
  for (char32_t c : segmented) {
    if (c != data::kSeparatorChar) {
      ++seen;
      continue;
    }
    if (seen == 0 || seen == letters) continue;
    if (!out.empty() && out.back() == seen) continue;
    out.push_back(seen);
  }
  return out;
}

OracleScores brute_force_border(const std::vector<std::u32string>& predictions,
                                const std::vector<std::u32string>& golds) {
  OracleScores s;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto p = brute_force_boundaries(predictions[i]);
    const auto g = brute_force_boundaries(golds[i]);
    for (std::size_t x : p) s.matched += std::count(g.begin(), g.end(), x) > 0;
    s.predicted += p.size();
    s.gold += g.size();
  }
  if (s.predicted == 0 && s.gold == 0) {
    s.precision = s.recall = s.f1 = 1.0;
    return s;
  }
  s.precision = s.predicted ? static_cast<double>(s.matched) / static_cast<double>(s.predicted) : 0.0;
  s.recall = s.gold ? static_cast<double>(s.matched) / static_cast<double>(s.gold) : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

std::u32string random_segmentation(std::mt19937_64& rng, std::u32string_view alphabet, bool well_formed) {
  const std::size_t n = dim(rng, 1, 8);
  std::u32string out;
  if (!well_formed && rng() % 4 == 0) out += data::kSeparatorChar;
  for (std::size_t i = 0; i < n; ++i) {
    out += alphabet[rng() % alphabet.size()];
    if (i + 1 < n && rng() % 3 == 0) {
      out += data::kSeparatorChar;
      if (!well_formed && rng() % 4 == 0) out += data::kSeparatorChar;
    }
  }
  if (!well_formed && rng() % 4 == 0) out += data::kSeparatorChar;
  return out;
}

SyntheticGrammar SyntheticGrammar::make(std::uint64_t seed) {
  SyntheticGrammar g;
  g.prefixes = {U"na", U"ki", U"to"};
  g.suffixes = {U"li", U"mes", U"ke"};
  std::mt19937_64 rng(seed);
  const std::u32string consonants = U"bdfgprstvz", vowels = U"aeiou";
  std::set<std::u32string> stems;
  while (stems.size() < 30) {
    std::u32string s{consonants[rng() % consonants.size()], vowels[rng() % vowels.size()],
                     consonants[rng() % consonants.size()]};
    if (rng() % 2) s += vowels[rng() % vowels.size()];
    stems.insert(s);
  }
  g.stems.assign(stems.begin(), stems.end());
  for (const auto& p : g.prefixes) {
    for (const auto& s : g.stems) {
      for (const auto& x : g.suffixes) g.words.push_back(p + U"|" + s + U"|" + x);
    }
  }
  std::shuffle(g.words.begin(), g.words.end(), rng);
  return g;
}

std::size_t SyntheticGrammar::parses(std::u32string_view word) const {
  std::size_t n = 0;
  for (const auto& p : prefixes) {
    if (!word.starts_with(p)) continue;
    for (const auto& x : suffixes) {
      if (word.size() < p.size() + x.size() || !word.ends_with(x)) continue;
      const auto stem = word.substr(p.size(), word.size() - p.size() - x.size());
      n += static_cast<std::size_t>(std::count(stems.begin(), stems.end(), stem));
    }
  }
  return n;
}

training::ExperimentData synthetic_experiment(const SyntheticGrammar& grammar, std::uint64_t seed,
                                              std::size_t n_train, std::size_t n_dev, std::size_t n_test) {
  const std::size_t total = grammar.words.size();
  const std::size_t train_end = total * 2 / 3, dev_end = train_end + total / 9;
  std::mt19937_64 rng(seed);
  auto sample = [&](std::size_t begin, std::size_t end, std::size_t n) {
    data::Dataset ds;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& t = grammar.words[begin + rng() % (end - begin)];
      ds.examples.push_back({data::strip_separators(t), t, data::Task::Segment, std::nullopt});
    }
    return ds;
  };
  training::ExperimentData xd;
  xd.train.push_back(sample(0, train_end, n_train));
  xd.dev.push_back(sample(train_end, dev_end, n_dev));
  xd.test.push_back(sample(dev_end, total, n_test));
  for (const auto& w : grammar.words) xd.aux_words.push_back(data::strip_separators(w));
  return xd;
}

data::Dataset random_morph_dataset(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  const std::u32string alphabet = U"abcdefghijklmnop";
  data::Dataset ds;
  for (std::size_t i = 0; i < n; ++i) {
    std::u32string t;
    const std::size_t morphs = dim(rng, 1, 3);
    for (std::size_t m = 0; m < morphs; ++m) {
      if (m) t += data::kSeparatorChar;
      const std::size_t len = dim(rng, 2, 4);
      for (std::size_t k = 0; k < len; ++k) t += alphabet[rng() % alphabet.size()];
    }
    ds.examples.push_back({data::strip_separators(t), t, data::Task::Segment, std::nullopt});
  }
  return ds;
}

}  // namespace morphseg::testing
