#include "morphseg/model/seq2seq.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace morphseg::model {

using ad::Node;
using ad::Tensor;
using data::Vocabulary;

namespace {

BoundGru bind_gru(const GruIds& ids, const auto& get) {
  return BoundGru{get(ids.W_z), get(ids.U_z), get(ids.b_z), get(ids.W_r), get(ids.U_r),
                  get(ids.b_r), get(ids.W_h), get(ids.U_h), get(ids.b_h)};
}

BoundModel bind_with(const ModelParams& p, const auto& get) {
  BoundModel m;
  m.params = &p;
  m.embedding = get(p.embedding());
  m.encoder_forward = bind_gru(p.encoder_forward(), get);
  m.encoder_backward = bind_gru(p.encoder_backward(), get);
  m.decoder = bind_gru(p.decoder(), get);
  m.att_W = get(p.attention_state());
  m.att_U = get(p.attention_annotation());
  m.att_v = get(p.attention_score());
  m.init_W = get(p.init_weight());
  m.init_b = get(p.init_bias());
  m.out_W = get(p.output_weight());
  m.out_b = get(p.output_bias());
  return m;
}

// Input-side gate pre-activations x W + b for all rows of `x` at once.
struct GateInputs {
  Node z, r, h;
};

GateInputs project_inputs(const BoundGru& g, Node x) {
  return {ad::add_bias(ad::matmul(x, g.W_z), g.b_z), ad::add_bias(ad::matmul(x, g.W_r), g.b_r),
          ad::add_bias(ad::matmul(x, g.W_h), g.b_h)};
}

Node gru_step(const BoundGru& g, const GateInputs& in, Node h) {
  Node z = ad::sigmoid(ad::add(in.z, ad::matmul(h, g.U_z)));
  Node r = ad::sigmoid(ad::add(in.r, ad::matmul(h, g.U_r)));
  Node c = ad::tanh(ad::add(in.h, ad::matmul(ad::hadamard(r, h), g.U_h)));
  return ad::add(h, ad::hadamard(z, ad::sub(c, h)));
}

}  // namespace

BoundModel bind(ad::Tape& tape, const ModelParams& params, bool trainable) {
  return bind_with(params, [&](ad::ParamId id) { return tape.parameter(params.arrays(), id, trainable); });
}

BoundModel bind_nodes(const ModelParams& params, std::span<const Node> nodes) {
  if (nodes.size() != params.arrays().size()) {
    throw std::invalid_argument("bind_nodes: expected one node per parameter array");
  }
  return bind_with(params, [&](ad::ParamId id) { return nodes[id]; });
}

Batch make_batch(std::span<const data::EncodedExample> examples, std::size_t min_source_steps,
                 std::size_t min_target_steps) {
  if (examples.empty()) throw std::invalid_argument("make_batch: no examples");
  Batch b;
  b.size = examples.size();
  b.source_steps = min_source_steps;
  b.target_steps = min_target_steps;
  for (const auto& ex : examples) {
    if (ex.source.empty()) throw std::invalid_argument("make_batch: empty source sequence");
    b.source_steps = std::max(b.source_steps, ex.source.size());
    b.target_steps = std::max(b.target_steps, ex.target.size());
  }
  const std::size_t B = b.size;
  b.source.assign(b.source_steps * B, Vocabulary::kPad);
  b.source_mask.assign(B * b.source_steps, 0);
  b.decoder_input.assign(b.target_steps * B, Vocabulary::kPad);
  b.target.assign(b.target_steps * B, ad::kIgnoreTarget);
  for (std::size_t i = 0; i < B; ++i) {
    const auto& ex = examples[i];
    b.source_lengths.push_back(ex.source.size());
    for (std::size_t t = 0; t < ex.source.size(); ++t) {
      b.source[t * B + i] = ex.source[t];
      b.source_mask[i * b.source_steps + t] = 1;
    }
    for (std::size_t t = 0; t < ex.target.size(); ++t) {
      b.target[t * B + i] = ex.target[t];
      b.decoder_input[t * B + i] = ex.decoder_input.at(t);
    }
  }
  return b;
}

EncoderStates encode(const BoundModel& model, const Batch& batch) {
  if (batch.size == 0 || batch.source_steps == 0) throw std::invalid_argument("encode: empty input");
  ad::Tape& tape = model.embedding.tape();
  const std::size_t B = batch.size;
  const std::size_t T = batch.source_steps;
  const std::size_t H = model.params->config().hidden;

  Node embedded = ad::gather_rows(model.embedding, batch.source);
  const GateInputs fwd_in = project_inputs(model.encoder_forward, embedded);
  const GateInputs bwd_in = project_inputs(model.encoder_backward, embedded);
  auto at_step = [&](const GateInputs& in, std::size_t t) {
    return GateInputs{ad::slice_rows(in.z, t * B, B), ad::slice_rows(in.r, t * B, B),
                      ad::slice_rows(in.h, t * B, B)};
  };
  auto active = [&](std::size_t t) {
    std::vector<std::uint8_t> keep(B);
    for (std::size_t b = 0; b < B; ++b) keep[b] = t < batch.source_lengths[b] ? 1 : 0;
    return keep;
  };

  const Node zero = tape.constant(Tensor::matrix(B, H));
  std::vector<Node> forward(T), backward(T);
  Node h = zero;
  for (std::size_t t = 0; t < T; ++t) {
    Node next = gru_step(model.encoder_forward, at_step(fwd_in, t), h);
    h = ad::select_rows(active(t), next, h);
    forward[t] = h;
  }
  // Padding positions keep the zero state, so each row starts at its own end.
  h = zero;
  for (std::size_t t = T; t-- > 0;) {
    Node next = gru_step(model.encoder_backward, at_step(bwd_in, t), h);
    h = ad::select_rows(active(t), next, h);
    backward[t] = h;
  }

  std::vector<Node> per_step(T);
  for (std::size_t t = 0; t < T; ++t) {
    const std::array<Node, 2> pair{forward[t], backward[t]};
    per_step[t] = ad::concat_cols(pair);
  }
  EncoderStates enc;
  enc.batch = B;
  enc.steps = T;
  enc.states = ad::concat_rows(per_step);
  enc.projected = ad::matmul(enc.states, model.att_U);
  enc.final_backward = backward.front();
  enc.mask = batch.source_mask;
  return enc;
}

Attention attend(const BoundModel& model, Node decoder_state, const EncoderStates& enc) {
  if (enc.steps == 0) throw std::invalid_argument("attend: no encoder states");
  Node query = ad::matmul(decoder_state, model.att_W);
  Node hidden = ad::tanh(ad::add_tiled(enc.projected, query));
  Node scores = ad::matmul(hidden, model.att_v);  // [T*B x 1]
  Node by_row = ad::transpose(ad::reshape(scores, enc.steps, enc.batch));
  Node weights = ad::masked_softmax(by_row, enc.mask);
  return {ad::weighted_row_sum(weights, enc.states), weights};
}

Node initial_decoder_state(const BoundModel& model, const EncoderStates& enc) {
  return ad::tanh(ad::add_bias(ad::matmul(enc.final_backward, model.init_W), model.init_b));
}

DecoderStep decode_step(const BoundModel& model, std::span<const std::size_t> previous,
                        Node decoder_state, const EncoderStates& enc) {
  if (previous.size() != enc.batch) throw std::invalid_argument("decode_step: one previous symbol per row expected");
  for (std::size_t s : previous) {
    if (s >= model.params->vocab_size()) throw std::out_of_range("decode_step: previous symbol outside vocabulary");
  }
  Attention att = attend(model, decoder_state, enc);
  Node embedded = ad::gather_rows(model.embedding, {previous.begin(), previous.end()});
  const std::array<Node, 2> parts{embedded, att.context};
  Node input = ad::concat_cols(parts);
  Node state = gru_step(model.decoder, project_inputs(model.decoder, input), decoder_state);
  Node logits = ad::add_bias(ad::matmul(state, model.out_W), model.out_b);
  return {ad::softmax(logits), state, att.weights};
}

SequenceLoss sequence_nll(const BoundModel& model, const Batch& batch) {
  const std::size_t B = batch.size;
  EncoderStates enc = encode(model, batch);
  Node state = initial_decoder_state(model, enc);
  std::optional<Node> total;
  for (std::size_t t = 0; t < batch.target_steps; ++t) {
    const std::span<const std::size_t> prev(batch.decoder_input.data() + t * B, B);
    DecoderStep step = decode_step(model, prev, state, enc);
    std::vector<std::size_t> targets(batch.target.begin() + static_cast<std::ptrdiff_t>(t * B),
                                     batch.target.begin() + static_cast<std::ptrdiff_t>((t + 1) * B));
    Node nll = ad::cross_entropy_rows(step.distribution, std::move(targets));
    total = total ? ad::add(*total, nll) : nll;
    state = step.state;
  }
  if (!total) throw std::invalid_argument("sequence_nll: empty targets");
  return {*total, ad::sum(*total)};
}

Node sequence_nll(const BoundModel& model, const data::EncodedExample& example) {
  if (example.target.empty() || example.target.back() != Vocabulary::kOutputEos) {
    throw std::invalid_argument("sequence_nll: target must end with <eos>");
  }
  return sequence_nll(model, make_batch(std::span(&example, 1))).total;
}

std::size_t default_max_length(std::size_t word_length) { return 2 * word_length + 5; }

std::vector<Decoded> greedy_decode(const ModelParams& params, const Vocabulary& vocab,
                                   std::span<const data::EncodedExample> sources,
                                   std::optional<std::size_t> max_length, std::size_t batch_size) {
  if (max_length && *max_length == 0) throw std::invalid_argument("greedy_decode: max length must be >= 1");
  if (params.output_size() != vocab.output_size() || params.vocab_size() != vocab.size()) {
    throw std::invalid_argument("greedy_decode: parameters do not match the vocabulary");
  }
  if (batch_size == 0) batch_size = 1;
  std::vector<Decoded> results(sources.size());

  for (std::size_t begin = 0; begin < sources.size(); begin += batch_size) {
    const std::size_t B = std::min(batch_size, sources.size() - begin);
    const auto chunk = sources.subspan(begin, B);
    std::vector<data::EncodedExample> inputs(chunk.begin(), chunk.end());
    for (auto& ex : inputs) {
      ex.target.clear();
      ex.decoder_input.clear();
    }
    const Batch batch = make_batch(inputs);

    ad::Tape tape;
    const BoundModel model = bind(tape, params, /*trainable=*/false);
    const EncoderStates enc = encode(model, batch);
    Node state = initial_decoder_state(model, enc);

    std::vector<std::size_t> limit(B);
    std::size_t longest = 0;
    for (std::size_t b = 0; b < B; ++b) {
      limit[b] = max_length.value_or(default_max_length(chunk[b].word_length));
      longest = std::max(longest, limit[b]);
    }
    std::vector<std::size_t> prev(B, Vocabulary::kBos);
    std::vector<std::uint8_t> done(B, 0);
    std::size_t remaining = B;

    for (std::size_t t = 0; t < longest && remaining > 0; ++t) {
      DecoderStep step = decode_step(model, prev, state, enc);
      const Tensor& dist = step.distribution.value();
      const std::size_t O = dist.cols();
      for (std::size_t b = 0; b < B; ++b) {
        if (done[b]) {
          prev[b] = Vocabulary::kEos;
          continue;
        }
        const double* row = dist.raw() + b * O;
        const std::size_t best = static_cast<std::size_t>(std::max_element(row, row + O) - row);
        Decoded& out = results[begin + b];
        if (best == Vocabulary::kOutputEos) {
          done[b] = 1;
          --remaining;
          prev[b] = Vocabulary::kEos;
          continue;
        }
        const std::size_t symbol = vocab.output_to_symbol(best);
        out.output.push_back(*vocab.character(symbol));
        prev[b] = symbol;
        if (out.output.size() >= limit[b]) {
          out.truncated = true;
          done[b] = 1;
          --remaining;
        }
      }
      state = step.state;
    }
  }
  return results;
}

}  // namespace morphseg::model
