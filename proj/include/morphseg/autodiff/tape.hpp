#pragma once

// Reverse-mode differentiation over dense row-major tensors.
//
// A Tape records every value produced while evaluating a loss. Nodes are
// cheap handles into that record; the tape is rebuilt per minibatch and a
// node's value never changes after creation. Trainable parameters enter the
// tape through ParamSet buffers, and backward() collects their gradients
// into a GradStore keyed by ParamId.

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morphseg/autodiff/tensor.hpp"

namespace morphseg::ad {

using ParamId = std::size_t;

enum class OpKind : std::uint8_t {
  Constant,
  Variable,
  Parameter,
  Matmul,
  Add,
  Sub,
  Hadamard,
  Tanh,
  Sigmoid,
  AddBias,
  AddTiled,
  ConcatCols,
  ConcatRows,
  SliceRows,
  Gather,
  SelectRows,
  Reshape,
  Transpose,
  Softmax,
  WeightedRowSum,
  CrossEntropy,
  Sum,
};

std::string_view to_string(OpKind kind);

class Tape;

class Node {
 public:
  Node() = default;

  const Tensor& value() const;
  /// Gradient of the last backward() loss with respect to this node. Nodes the
  /// loss does not depend on report zeros of the value's shape.
  const Tensor& grad() const;
  OpKind kind() const;
  std::span<const std::uint32_t> parents() const;
  Tape& tape() const { return *tape_; }
  std::uint32_t index() const noexcept { return index_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Node(Tape* tape, std::uint32_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::uint32_t index_ = 0;
};

/// Named trainable arrays. Values are immutable buffers; assign() swaps in a
/// new buffer so tapes built earlier keep seeing the old one.
class ParamSet {
 public:
  ParamId add(std::string name, Tensor value);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(ParamId id) const { return names_.at(id); }
  const Tensor& value(ParamId id) const { return *values_.at(id); }
  const std::shared_ptr<const Tensor>& shared(ParamId id) const { return values_.at(id); }
  void assign(ParamId id, Tensor value);
  std::optional<ParamId> find(std::string_view name) const;
  /// Total number of scalar entries over all arrays.
  std::size_t scalar_count() const;

  bool operator==(const ParamSet& other) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::shared_ptr<const Tensor>> values_;
};

/// Accumulated gradients, one tensor per parameter id.
class GradStore {
 public:
  GradStore() = default;
  static GradStore zeros_like(const ParamSet& params);

  bool contains(ParamId id) const { return grads_.contains(id); }
  Tensor& at(ParamId id) { return grads_.at(id); }
  const Tensor& at(ParamId id) const { return grads_.at(id); }
  void accumulate(ParamId id, const Tensor& g);
  void zero();
  std::size_t size() const noexcept { return grads_.size(); }
  bool all_finite() const;

  auto begin() const { return grads_.begin(); }
  auto end() const { return grads_.end(); }

 private:
  std::map<ParamId, Tensor> grads_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Input that never receives a gradient.
  Node constant(Tensor value);
  /// Leaf that receives a gradient (readable through Node::grad()).
  Node variable(Tensor value);
  /// Leaf backed by a parameter buffer. Untrainable parameters behave as
  /// constants (inference tapes skip all gradient bookkeeping).
  Node parameter(const ParamSet& params, ParamId id, bool trainable = true);

  /// Fills the gradient of every node reachable from `loss` and returns the
  /// parameter gradients. `loss` must hold exactly one value.
  GradStore backward(Node loss);
  /// Same, accumulating parameter gradients into `into`.
  void backward(Node loss, GradStore& into);

  std::size_t size() const noexcept { return records_.size(); }
  /// Number of probabilities raised to the 1e-12 floor by cross_entropy.
  std::size_t clamped_probabilities() const noexcept { return clamped_; }

 private:
  friend class Node;
  friend struct OpBuilder;

  struct Record {
    OpKind kind = OpKind::Constant;
    bool requires_grad = false;
    std::shared_ptr<const Tensor> value;
    Tensor grad;
    bool has_grad = false;
    std::vector<std::uint32_t> parents;
    std::vector<std::size_t> indices;
    std::size_t arg = 0;
    ParamId param = 0;
  };

  Node push(Record record);
  Record& record(Node n);
  const Record& record(Node n) const;
  Tensor& grad_of(std::uint32_t index);
  void propagate(std::uint32_t index);

  std::vector<Record> records_;
  std::size_t clamped_ = 0;
};

inline constexpr std::size_t kIgnoreTarget = std::numeric_limits<std::size_t>::max();
inline constexpr double kProbabilityFloor = 1e-12;

// Operations. All operands must live on the same tape.

/// [m x k] * [k x n] -> [m x n].
Node matmul(Node a, Node b);

enum class Elementwise { Add, Sub, Hadamard, Tanh, Sigmoid };
/// Unary kinds ignore `y`; binary kinds require equal shapes.
Node elementwise(Elementwise kind, Node x, std::optional<Node> y = std::nullopt);
Node add(Node x, Node y);
Node sub(Node x, Node y);
Node hadamard(Node x, Node y);
Node tanh(Node x);
Node sigmoid(Node x);

/// Adds a length-n bias to every row of an [r x n] matrix.
Node add_bias(Node x, Node bias);
/// x is [k*B x n], y is [B x n]; row r of x gets row (r mod B) of y.
Node add_tiled(Node x, Node y);
Node concat_cols(std::span<const Node> parts);
/// Stacks matrices with equal column counts.
Node concat_rows(std::span<const Node> parts);
Node slice_rows(Node x, std::size_t begin, std::size_t count);
/// Rows of `table` at `indices` -> [indices.size() x cols].
Node gather_rows(Node table, std::vector<std::size_t> indices);
/// Row r is taken from `a` when take_a[r] != 0, else from `b`.
Node select_rows(std::vector<std::uint8_t> take_a, Node a, Node b);
Node reshape(Node x, std::size_t rows, std::size_t cols);
Node transpose(Node x);

/// Row-wise softmax, stabilised by subtracting the row maximum.
Node softmax(Node x);
/// Row-wise softmax over entries whose mask is non-zero; masked entries are
/// exactly 0. `mask` has one entry per element of x.
Node masked_softmax(Node x, std::vector<std::uint8_t> mask);

/// weights [B x T], states [T*B x D] (time-major rows) -> [B x D] with
/// out[b] = sum_t weights[b,t] * states[t*B + b].
Node weighted_row_sum(Node weights, Node states);

/// -log(dist[target]) for a single probability row -> scalar.
Node cross_entropy(Node dist, std::size_t target);
/// Per-row negative log-likelihood -> [B x 1]; rows whose target is
/// kIgnoreTarget contribute 0.
Node cross_entropy_rows(Node dist, std::vector<std::size_t> targets);

/// Sum of all entries -> scalar.
Node sum(Node x);

}  // namespace morphseg::ad
