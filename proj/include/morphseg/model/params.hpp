#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "morphseg/autodiff/tape.hpp"

namespace morphseg::model {

struct ModelConfig {
  std::size_t hidden = 100;
  std::size_t embed = 300;
  /// Width of the additive-attention hidden layer.
  std::size_t attention = 100;

  bool operator==(const ModelConfig&) const = default;
};

/// Parameter ids of one GRU: update (z), reset (r) and candidate (h) gates,
/// each with an input matrix W [in x H], a recurrent matrix U [H x H] and a
/// bias b [H].
struct GruIds {
  ad::ParamId W_z, U_z, b_z;
  ad::ParamId W_r, U_r, b_r;
  ad::ParamId W_h, U_h, b_h;
};

/// Every learnable array of the encoder-decoder, stored in a fixed order
/// under stable names (the checkpoint format relies on both).
class ModelParams {
 public:
  /// All arrays zero-filled with the shapes implied by the sizes.
  ModelParams(ModelConfig config, std::size_t vocab_size, std::size_t output_size);

  /// Adopts arrays loaded from disk; names and shapes must match exactly.
  static ModelParams from_arrays(ModelConfig config, std::size_t vocab_size, std::size_t output_size,
                                 ad::ParamSet arrays);

  const ModelConfig& config() const noexcept { return config_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  std::size_t output_size() const noexcept { return output_size_; }

  ad::ParamSet& arrays() noexcept { return arrays_; }
  const ad::ParamSet& arrays() const noexcept { return arrays_; }
  std::size_t parameter_count() const { return arrays_.scalar_count(); }

  ad::ParamId embedding() const noexcept { return embedding_; }
  const GruIds& encoder_forward() const noexcept { return enc_fwd_; }
  const GruIds& encoder_backward() const noexcept { return enc_bwd_; }
  const GruIds& decoder() const noexcept { return dec_; }
  ad::ParamId attention_state() const noexcept { return att_W_; }
  ad::ParamId attention_annotation() const noexcept { return att_U_; }
  ad::ParamId attention_score() const noexcept { return att_v_; }
  ad::ParamId init_weight() const noexcept { return init_W_; }
  ad::ParamId init_bias() const noexcept { return init_b_; }
  ad::ParamId output_weight() const noexcept { return out_W_; }
  ad::ParamId output_bias() const noexcept { return out_b_; }

  /// Ids of the square recurrent matrices (U_z, U_r, U_h of every GRU) and
  /// the encoder-to-decoder state projection.
  std::vector<ad::ParamId> hidden_to_hidden() const;
  std::vector<ad::ParamId> biases() const;

  bool operator==(const ModelParams& other) const {
    return config_ == other.config_ && vocab_size_ == other.vocab_size_ &&
           output_size_ == other.output_size_ && arrays_ == other.arrays_;
  }

 private:
  GruIds add_gru(const std::string& prefix, std::size_t input);

  ModelConfig config_;
  std::size_t vocab_size_ = 0;
  std::size_t output_size_ = 0;
  ad::ParamSet arrays_;
  ad::ParamId embedding_ = 0;
  GruIds enc_fwd_{}, enc_bwd_{}, dec_{};
  ad::ParamId att_W_ = 0, att_U_ = 0, att_v_ = 0;
  ad::ParamId init_W_ = 0, init_b_ = 0;
  ad::ParamId out_W_ = 0, out_b_ = 0;
};

}  // namespace morphseg::model
