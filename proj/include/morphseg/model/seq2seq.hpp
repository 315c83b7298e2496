#pragma once

// Character-level attention encoder-decoder.
//
// Encoder: forward and backward GRUs over the source embeddings (zero initial
// states); position i is represented by [fwd_i; bwd_i].
// Decoder: s_0 = tanh(W_init * bwd_1 + b_init). At step t the previous
// decoder state s_{t-1} attends over the encoder states with additive
// scoring e_i = v^T tanh(W s_{t-1} + U h_i), the GRU consumes
// [embedding(y_{t-1}); context_t], and an affine layer + softmax over
// {<eos>, <sep>} + alphabet gives p(y_t | y_<t, w).
//
// GRU: z = sig(x W_z + h U_z + b_z), r = sig(x W_r + h U_r + b_r),
//      c = tanh(x W_h + (r . h) U_h + b_h), h' = h + z . (c - h).
//
// Batches are time-major: row t*B + b holds position t of example b.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "morphseg/autodiff/tape.hpp"
#include "morphseg/data/corpus.hpp"
#include "morphseg/data/vocabulary.hpp"
#include "morphseg/model/params.hpp"

namespace morphseg::model {

struct BoundGru {
  ad::Node W_z, U_z, b_z;
  ad::Node W_r, U_r, b_r;
  ad::Node W_h, U_h, b_h;
};

/// Parameter arrays placed on one tape.
struct BoundModel {
  const ModelParams* params = nullptr;
  ad::Node embedding;
  BoundGru encoder_forward, encoder_backward, decoder;
  ad::Node att_W, att_U, att_v;
  ad::Node init_W, init_b;
  ad::Node out_W, out_b;
};

/// Trainable binding collects gradients; inference binding does not.
BoundModel bind(ad::Tape& tape, const ModelParams& params, bool trainable = true);
/// Binds caller-made nodes, one per ParamId (used by gradient checks).
BoundModel bind_nodes(const ModelParams& params, std::span<const ad::Node> nodes);

struct Batch {
  std::size_t size = 0;
  std::size_t source_steps = 0;
  std::size_t target_steps = 0;
  /// Time-major [source_steps * size]; <pad> past each example's end.
  std::vector<std::size_t> source;
  /// Batch-major [size * source_steps]; 1 on real positions.
  std::vector<std::uint8_t> source_mask;
  std::vector<std::size_t> source_lengths;
  /// Time-major [target_steps * size] decoder inputs (vocabulary indices).
  std::vector<std::size_t> decoder_input;
  /// Time-major [target_steps * size] output-space targets;
  /// ad::kIgnoreTarget past each example's end.
  std::vector<std::size_t> target;
};

/// Pads to the longest example, or to the given minimum lengths.
Batch make_batch(std::span<const data::EncodedExample> examples, std::size_t min_source_steps = 0,
                 std::size_t min_target_steps = 0);

struct EncoderStates {
  std::size_t batch = 0;
  std::size_t steps = 0;
  /// [steps*batch x 2H], time-major.
  ad::Node states;
  /// states * U_a, [steps*batch x A], reused by every attention step.
  ad::Node projected;
  /// Backward GRU state after reading the whole source (position 1), [batch x H].
  ad::Node final_backward;
  /// Batch-major [batch * steps].
  std::vector<std::uint8_t> mask;
};

struct Attention {
  ad::Node context;  // [B x 2H]
  ad::Node weights;  // [B x T]
};

struct DecoderStep {
  ad::Node distribution;  // [B x output_size]
  ad::Node state;         // [B x H]
  ad::Node attention;     // [B x T]
};

EncoderStates encode(const BoundModel& model, const Batch& batch);
Attention attend(const BoundModel& model, ad::Node decoder_state, const EncoderStates& enc);
ad::Node initial_decoder_state(const BoundModel& model, const EncoderStates& enc);
/// `previous` holds one vocabulary index per batch row.
DecoderStep decode_step(const BoundModel& model, std::span<const std::size_t> previous,
                        ad::Node decoder_state, const EncoderStates& enc);

struct SequenceLoss {
  ad::Node per_example;  // [B x 1]
  ad::Node total;        // scalar
};

/// Teacher-forced negative log-likelihood, summed over target steps.
SequenceLoss sequence_nll(const BoundModel& model, const Batch& batch);
/// Single-example convenience form.
ad::Node sequence_nll(const BoundModel& model, const data::EncodedExample& example);

struct Decoded {
  /// Characters with the separator rendered as '|'.
  std::u32string output;
  /// Stopped at the length limit instead of <eos>.
  bool truncated = false;
};

/// Decode length limit used when none is given: 2 * |word| + 5.
std::size_t default_max_length(std::size_t word_length);

/// Argmax decoding from <bos>. Examples are processed in batches; results
/// do not depend on batch composition.
std::vector<Decoded> greedy_decode(const ModelParams& params, const data::Vocabulary& vocab,
                                   std::span<const data::EncodedExample> sources,
                                   std::optional<std::size_t> max_length = std::nullopt,
                                   std::size_t batch_size = 64);

}  // namespace morphseg::model
