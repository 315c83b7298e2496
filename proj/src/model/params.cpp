#include "morphseg/model/params.hpp"

#include <stdexcept>

namespace morphseg::model {

using ad::Tensor;

ModelParams::ModelParams(ModelConfig config, std::size_t vocab_size, std::size_t output_size)
    : config_(config), vocab_size_(vocab_size), output_size_(output_size) {
  if (config.hidden == 0 || config.embed == 0 || config.attention == 0) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  if (vocab_size == 0 || output_size == 0) throw std::invalid_argument("empty vocabulary");
  const std::size_t H = config.hidden;
  const std::size_t E = config.embed;
  const std::size_t A = config.attention;

  embedding_ = arrays_.add("embedding", Tensor::matrix(vocab_size, E));
  enc_fwd_ = add_gru("encoder.forward", E);
  enc_bwd_ = add_gru("encoder.backward", E);
  dec_ = add_gru("decoder", E + 2 * H);
  att_W_ = arrays_.add("attention.W", Tensor::matrix(H, A));
  att_U_ = arrays_.add("attention.U", Tensor::matrix(2 * H, A));
  att_v_ = arrays_.add("attention.v", Tensor::matrix(A, 1));
  init_W_ = arrays_.add("decoder_init.W", Tensor::matrix(H, H));
  init_b_ = arrays_.add("decoder_init.b", Tensor({H}));
  out_W_ = arrays_.add("output.W", Tensor::matrix(H, output_size));
  out_b_ = arrays_.add("output.b", Tensor({output_size}));
}

GruIds ModelParams::add_gru(const std::string& prefix, std::size_t input) {
  const std::size_t H = config_.hidden;
  GruIds g{};
  g.W_z = arrays_.add(prefix + ".W_z", Tensor::matrix(input, H));
  g.U_z = arrays_.add(prefix + ".U_z", Tensor::matrix(H, H));
  g.b_z = arrays_.add(prefix + ".b_z", Tensor({H}));
  g.W_r = arrays_.add(prefix + ".W_r", Tensor::matrix(input, H));
  g.U_r = arrays_.add(prefix + ".U_r", Tensor::matrix(H, H));
  g.b_r = arrays_.add(prefix + ".b_r", Tensor({H}));
  g.W_h = arrays_.add(prefix + ".W_h", Tensor::matrix(input, H));
  g.U_h = arrays_.add(prefix + ".U_h", Tensor::matrix(H, H));
  g.b_h = arrays_.add(prefix + ".b_h", Tensor({H}));
  return g;
}

ModelParams ModelParams::from_arrays(ModelConfig config, std::size_t vocab_size,
                                     std::size_t output_size, ad::ParamSet arrays) {
  ModelParams p(config, vocab_size, output_size);
  if (arrays.size() != p.arrays_.size()) {
    throw std::invalid_argument("expected " + std::to_string(p.arrays_.size()) + " parameter arrays, got " +
                                std::to_string(arrays.size()));
  }
  for (ad::ParamId id = 0; id < arrays.size(); ++id) {
    if (arrays.name(id) != p.arrays_.name(id)) {
      throw std::invalid_argument("parameter " + std::to_string(id) + " is '" + arrays.name(id) +
                                  "', expected '" + p.arrays_.name(id) + "'");
    }
    p.arrays_.assign(id, arrays.value(id));
  }
  return p;
}

std::vector<ad::ParamId> ModelParams::hidden_to_hidden() const {
  std::vector<ad::ParamId> ids;
  for (const GruIds* g : {&enc_fwd_, &enc_bwd_, &dec_}) {
    ids.insert(ids.end(), {g->U_z, g->U_r, g->U_h});
  }
  ids.push_back(init_W_);
  return ids;
}

std::vector<ad::ParamId> ModelParams::biases() const {
  std::vector<ad::ParamId> ids;
  for (const GruIds* g : {&enc_fwd_, &enc_bwd_, &dec_}) {
    ids.insert(ids.end(), {g->b_z, g->b_r, g->b_h});
  }
  ids.push_back(init_b_);
  ids.push_back(out_b_);
  return ids;
}

}  // namespace morphseg::model
