#include "morphseg/autodiff/tape.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Core>

namespace morphseg::ad {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using ArrayMap = Eigen::Map<Eigen::ArrayXd>;
using ConstArrayMap = Eigen::Map<const Eigen::ArrayXd>;

MatrixMap as_matrix(Tensor& t) {
  return MatrixMap(t.raw(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}
ConstMatrixMap as_matrix(const Tensor& t) {
  return ConstMatrixMap(t.raw(), static_cast<Eigen::Index>(t.rows()),
                        static_cast<Eigen::Index>(t.cols()));
}
ArrayMap as_array(Tensor& t) { return ArrayMap(t.raw(), static_cast<Eigen::Index>(t.size())); }
ConstArrayMap as_array(const Tensor& t) {
  return ConstArrayMap(t.raw(), static_cast<Eigen::Index>(t.size()));
}

void require_matrix(const Tensor& t, std::string_view op) {
  if (t.rank() > 2) {
    throw DimensionError(std::string(op) + ": rank-" + std::to_string(t.rank()) +
                         " operand " + t.shape_string() + " is not supported");
  }
}

void require_same_tape(Node a, Node b) {
  if (!a.valid() || !b.valid() || &a.tape() != &b.tape()) {
    throw std::invalid_argument("operands belong to different tapes");
  }
}

}  // namespace

std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::Constant: return "constant";
    case OpKind::Variable: return "variable";
    case OpKind::Parameter: return "parameter";
    case OpKind::Matmul: return "matmul";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Hadamard: return "hadamard";
    case OpKind::Tanh: return "tanh";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::AddBias: return "add_bias";
    case OpKind::AddTiled: return "add_tiled";
    case OpKind::ConcatCols: return "concat_cols";
    case OpKind::ConcatRows: return "concat_rows";
    case OpKind::SliceRows: return "slice_rows";
    case OpKind::Gather: return "gather_rows";
    case OpKind::SelectRows: return "select_rows";
    case OpKind::Reshape: return "reshape";
    case OpKind::Transpose: return "transpose";
    case OpKind::Softmax: return "softmax";
    case OpKind::WeightedRowSum: return "weighted_row_sum";
    case OpKind::CrossEntropy: return "cross_entropy";
    case OpKind::Sum: return "sum";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// ParamSet / GradStore

ParamId ParamSet::add(std::string name, Tensor value) {
  if (find(name)) throw std::invalid_argument("duplicate parameter name '" + name + "'");
  names_.push_back(std::move(name));
  values_.push_back(std::make_shared<const Tensor>(std::move(value)));
  return names_.size() - 1;
}

void ParamSet::assign(ParamId id, Tensor value) {
  if (!value.same_shape(*values_.at(id))) {
    throw DimensionError("parameter '" + names_[id] + "' expects shape " +
                         values_[id]->shape_string() + ", got " + value.shape_string());
  }
  values_[id] = std::make_shared<const Tensor>(std::move(value));
}

std::optional<ParamId> ParamSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v->size();
  return n;
}

bool ParamSet::operator==(const ParamSet& other) const {
  if (names_ != other.names_) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(*values_[i] == *other.values_[i])) return false;
  }
  return true;
}

GradStore GradStore::zeros_like(const ParamSet& params) {
  GradStore store;
  for (ParamId id = 0; id < params.size(); ++id) {
    store.grads_.emplace(id, Tensor(params.value(id).shape(), 0.0));
  }
  return store;
}

void GradStore::accumulate(ParamId id, const Tensor& g) {
  auto it = grads_.find(id);
  if (it == grads_.end()) {
    grads_.emplace(id, g);
    return;
  }
  if (!it->second.same_shape(g)) {
    throw DimensionError("gradient shape mismatch for parameter " + std::to_string(id));
  }
  as_array(it->second) += as_array(g);
}

void GradStore::zero() {
  for (auto& [id, g] : grads_) g.fill(0.0);
}

bool GradStore::all_finite() const {
  return std::all_of(grads_.begin(), grads_.end(),
                     [](const auto& kv) { return kv.second.all_finite(); });
}

// ---------------------------------------------------------------------------
// Node

const Tensor& Node::value() const { return *tape_->record(*this).value; }

const Tensor& Node::grad() const {
  auto& rec = tape_->record(*this);
  if (!rec.has_grad) {
    rec.grad = Tensor(rec.value->shape(), 0.0);
    rec.has_grad = true;
  }
  return rec.grad;
}

OpKind Node::kind() const { return tape_->record(*this).kind; }

std::span<const std::uint32_t> Node::parents() const { return tape_->record(*this).parents; }

// ---------------------------------------------------------------------------
// Tape

Node Tape::push(Record record) {
  records_.push_back(std::move(record));
  return Node(this, static_cast<std::uint32_t>(records_.size() - 1));
}

Tape::Record& Tape::record(Node n) { return records_.at(n.index()); }
const Tape::Record& Tape::record(Node n) const { return records_.at(n.index()); }

Tensor& Tape::grad_of(std::uint32_t index) {
  auto& rec = records_[index];
  if (!rec.has_grad) {
    rec.grad = Tensor(rec.value->shape(), 0.0);
    rec.has_grad = true;
  }
  return rec.grad;
}

Node Tape::constant(Tensor value) {
  Record r;
  r.kind = OpKind::Constant;
  r.value = std::make_shared<const Tensor>(std::move(value));
  return push(std::move(r));
}

Node Tape::variable(Tensor value) {
  Record r;
  r.kind = OpKind::Variable;
  r.requires_grad = true;
  r.value = std::make_shared<const Tensor>(std::move(value));
  return push(std::move(r));
}

Node Tape::parameter(const ParamSet& params, ParamId id, bool trainable) {
  Record r;
  r.kind = OpKind::Parameter;
  r.requires_grad = trainable;
  r.value = params.shared(id);
  r.param = id;
  return push(std::move(r));
}

GradStore Tape::backward(Node loss) {
  GradStore store;
  backward(loss, store);
  return store;
}

void Tape::backward(Node loss, GradStore& into) {
  if (&loss.tape() != this) throw std::invalid_argument("loss node belongs to another tape");
  const auto& lrec = record(loss);
  if (lrec.value->size() != 1) {
    throw DimensionError("backward requires a scalar loss, got shape " + lrec.value->shape_string());
  }
  for (auto& rec : records_) {
    rec.has_grad = false;
    rec.grad = Tensor();
  }
  grad_of(loss.index()).fill(1.0);

  for (std::int64_t i = loss.index(); i >= 0; --i) {
    const auto idx = static_cast<std::uint32_t>(i);
    auto& rec = records_[idx];
    if (!rec.requires_grad || !rec.has_grad) continue;
    if (rec.kind == OpKind::Parameter) {
      into.accumulate(rec.param, rec.grad);
      continue;
    }
    propagate(idx);
  }
}

void Tape::propagate(std::uint32_t index) {
  // Copy what we need: grad_of() may reallocate nothing, but references into
  // records_ stay valid because the tape does not grow during backward.
  const Record& rec = records_[index];
  const Tensor& g = rec.grad;
  const Tensor& y = *rec.value;
  auto wants = [&](std::size_t p) { return records_[rec.parents[p]].requires_grad; };
  auto parent_value = [&](std::size_t p) -> const Tensor& { return *records_[rec.parents[p]].value; };
  auto parent_grad = [&](std::size_t p) -> Tensor& { return grad_of(rec.parents[p]); };

  switch (rec.kind) {
    case OpKind::Constant:
    case OpKind::Variable:
    case OpKind::Parameter:
      return;

    case OpKind::Matmul: {
      const auto G = as_matrix(g);
      if (wants(0)) as_matrix(parent_grad(0)).noalias() += G * as_matrix(parent_value(1)).transpose();
      if (wants(1)) as_matrix(parent_grad(1)).noalias() += as_matrix(parent_value(0)).transpose() * G;
      return;
    }
    case OpKind::Add:
      if (wants(0)) as_array(parent_grad(0)) += as_array(g);
      if (wants(1)) as_array(parent_grad(1)) += as_array(g);
      return;
    case OpKind::Sub:
      if (wants(0)) as_array(parent_grad(0)) += as_array(g);
      if (wants(1)) as_array(parent_grad(1)) -= as_array(g);
      return;
    case OpKind::Hadamard:
      if (wants(0)) as_array(parent_grad(0)) += as_array(g) * as_array(parent_value(1));
      if (wants(1)) as_array(parent_grad(1)) += as_array(g) * as_array(parent_value(0));
      return;
    case OpKind::Tanh:
      if (wants(0)) as_array(parent_grad(0)) += as_array(g) * (1.0 - as_array(y).square());
      return;
    case OpKind::Sigmoid:
      if (wants(0)) as_array(parent_grad(0)) += as_array(g) * as_array(y) * (1.0 - as_array(y));
      return;
    case OpKind::AddBias: {
      if (wants(0)) as_array(parent_grad(0)) += as_array(g);
      if (wants(1)) {
        Tensor& gb = parent_grad(1);
        const auto colsum = as_matrix(g).colwise().sum();
        for (std::size_t c = 0; c < gb.size(); ++c) gb[c] += colsum(static_cast<Eigen::Index>(c));
      }
      return;
    }
    case OpKind::AddTiled: {
      if (wants(0)) as_array(parent_grad(0)) += as_array(g);
      if (wants(1)) {
        auto GY = as_matrix(parent_grad(1));
        const auto G = as_matrix(g);
        const auto b = GY.rows();
        for (Eigen::Index r = 0; r < G.rows(); ++r) GY.row(r % b) += G.row(r);
      }
      return;
    }
    case OpKind::ConcatCols: {
      const auto G = as_matrix(g);
      Eigen::Index offset = 0;
      for (std::size_t p = 0; p < rec.parents.size(); ++p) {
        const auto width = static_cast<Eigen::Index>(parent_value(p).cols());
        if (wants(p)) as_matrix(parent_grad(p)) += G.middleCols(offset, width);
        offset += width;
      }
      return;
    }
    case OpKind::ConcatRows: {
      const auto G = as_matrix(g);
      Eigen::Index offset = 0;
      for (std::size_t p = 0; p < rec.parents.size(); ++p) {
        const auto height = static_cast<Eigen::Index>(parent_value(p).rows());
        if (wants(p)) as_matrix(parent_grad(p)) += G.middleRows(offset, height);
        offset += height;
      }
      return;
    }
    case OpKind::SliceRows: {
      if (!wants(0)) return;
      auto GX = as_matrix(parent_grad(0));
      GX.middleRows(static_cast<Eigen::Index>(rec.arg), static_cast<Eigen::Index>(g.rows())) +=
          as_matrix(g);
      return;
    }
    case OpKind::Gather: {
      if (!wants(0)) return;
      auto GT = as_matrix(parent_grad(0));
      const auto G = as_matrix(g);
      for (std::size_t r = 0; r < rec.indices.size(); ++r) {
        GT.row(static_cast<Eigen::Index>(rec.indices[r])) += G.row(static_cast<Eigen::Index>(r));
      }
      return;
    }
    case OpKind::SelectRows: {
      const auto G = as_matrix(g);
      for (std::size_t r = 0; r < rec.indices.size(); ++r) {
        const std::size_t p = rec.indices[r] ? 0 : 1;
        if (wants(p)) as_matrix(parent_grad(p)).row(static_cast<Eigen::Index>(r)) += G.row(static_cast<Eigen::Index>(r));
      }
      return;
    }
    case OpKind::Reshape:
      if (wants(0)) as_array(parent_grad(0)) += as_array(g);
      return;
    case OpKind::Transpose:
      if (wants(0)) as_matrix(parent_grad(0)) += as_matrix(g).transpose();
      return;
    case OpKind::Softmax: {
      if (!wants(0)) return;
      auto GX = as_matrix(parent_grad(0));
      const auto G = as_matrix(g);
      const auto Y = as_matrix(y);
      for (Eigen::Index r = 0; r < Y.rows(); ++r) {
        const double dot = Y.row(r).dot(G.row(r));
        GX.row(r).array() += Y.row(r).array() * (G.row(r).array() - dot);
      }
      return;
    }
    case OpKind::WeightedRowSum: {
      const Tensor& w = parent_value(0);
      const Tensor& h = parent_value(1);
      const auto G = as_matrix(g);
      const auto W = as_matrix(w);
      const auto H = as_matrix(h);
      const Eigen::Index batch = W.rows();
      const Eigen::Index steps = W.cols();
      if (wants(0)) {
        auto GW = as_matrix(parent_grad(0));
        for (Eigen::Index t = 0; t < steps; ++t) {
          for (Eigen::Index b = 0; b < batch; ++b) GW(b, t) += G.row(b).dot(H.row(t * batch + b));
        }
      }
      if (wants(1)) {
        auto GH = as_matrix(parent_grad(1));
        for (Eigen::Index t = 0; t < steps; ++t) {
          for (Eigen::Index b = 0; b < batch; ++b) GH.row(t * batch + b) += W(b, t) * G.row(b);
        }
      }
      return;
    }
    case OpKind::CrossEntropy: {
      if (!wants(0)) return;
      const Tensor& dist = parent_value(0);
      Tensor& gd = parent_grad(0);
      const std::size_t cols = dist.cols();
      for (std::size_t r = 0; r < rec.indices.size(); ++r) {
        const std::size_t t = rec.indices[r];
        if (t == kIgnoreTarget) continue;
        const double p = dist[r * cols + t];
        if (p > kProbabilityFloor) gd[r * cols + t] -= g[r] / p;
      }
      return;
    }
    case OpKind::Sum:
      if (wants(0)) as_array(parent_grad(0)) += g[0];
      return;
  }
}

// ---------------------------------------------------------------------------
// Operations

struct OpBuilder {
  static Node make(OpKind kind, std::initializer_list<Node> parents, Tensor value,
                   std::vector<std::size_t> indices = {}, std::size_t arg = 0) {
    return make(kind, std::span<const Node>(parents.begin(), parents.size()), std::move(value),
                std::move(indices), arg);
  }

  static Node make(OpKind kind, std::span<const Node> parents, Tensor value,
                   std::vector<std::size_t> indices = {}, std::size_t arg = 0) {
    Tape& tape = parents.front().tape();
    Tape::Record r;
    r.kind = kind;
    r.value = std::make_shared<const Tensor>(std::move(value));
    r.indices = std::move(indices);
    r.arg = arg;
    r.parents.reserve(parents.size());
    for (const Node& p : parents) {
      if (&p.tape() != &tape) throw std::invalid_argument("operands belong to different tapes");
      r.parents.push_back(p.index());
      r.requires_grad = r.requires_grad || tape.records_[p.index()].requires_grad;
    }
    return tape.push(std::move(r));
  }

  static void count_clamped(Tape& tape, std::size_t n) { tape.clamped_ += n; }
};

Node matmul(Node a, Node b) {
  require_same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_matrix(A, "matmul");
  require_matrix(B, "matmul");
  if (A.cols() != B.rows()) {
    throw DimensionError("matmul: inner dimensions differ for " + A.shape_string() + " and " +
                         B.shape_string());
  }
  Tensor out = Tensor::matrix(A.rows(), B.cols());
  as_matrix(out).noalias() = as_matrix(A) * as_matrix(B);
  return OpBuilder::make(OpKind::Matmul, {a, b}, std::move(out));
}

Node elementwise(Elementwise kind, Node x, std::optional<Node> y) {
  const Tensor& X = x.value();
  switch (kind) {
    case Elementwise::Tanh: {
      Tensor out(X.shape());
      as_array(out) = as_array(X).tanh();
      return OpBuilder::make(OpKind::Tanh, {x}, std::move(out));
    }
    case Elementwise::Sigmoid: {
      Tensor out(X.shape());
      auto o = as_array(out);
      const auto in = as_array(X);
      // 1 / (1 + e^-x) for x >= 0, e^x / (1 + e^x) otherwise.
      for (Eigen::Index i = 0; i < in.size(); ++i) {
        const double v = in(i);
        if (v >= 0) {
          o(i) = 1.0 / (1.0 + std::exp(-v));
        } else {
          const double e = std::exp(v);
          o(i) = e / (1.0 + e);
        }
      }
      return OpBuilder::make(OpKind::Sigmoid, {x}, std::move(out));
    }
    default:
      break;
  }
  if (!y) throw std::invalid_argument("binary elementwise operation needs two operands");
  require_same_tape(x, *y);
  const Tensor& Y = y->value();
  if (!X.same_shape(Y)) {
    throw DimensionError("elementwise: shape mismatch " + X.shape_string() + " vs " + Y.shape_string());
  }
  Tensor out(X.shape());
  switch (kind) {
    case Elementwise::Add:
      as_array(out) = as_array(X) + as_array(Y);
      return OpBuilder::make(OpKind::Add, {x, *y}, std::move(out));
    case Elementwise::Sub:
      as_array(out) = as_array(X) - as_array(Y);
      return OpBuilder::make(OpKind::Sub, {x, *y}, std::move(out));
    case Elementwise::Hadamard:
      as_array(out) = as_array(X) * as_array(Y);
      return OpBuilder::make(OpKind::Hadamard, {x, *y}, std::move(out));
    default:
      throw std::logic_error("unreachable elementwise kind");
  }
}

Node add(Node x, Node y) { return elementwise(Elementwise::Add, x, y); }
Node sub(Node x, Node y) { return elementwise(Elementwise::Sub, x, y); }
Node hadamard(Node x, Node y) { return elementwise(Elementwise::Hadamard, x, y); }
Node tanh(Node x) { return elementwise(Elementwise::Tanh, x); }
Node sigmoid(Node x) { return elementwise(Elementwise::Sigmoid, x); }

Node add_bias(Node x, Node bias) {
  require_same_tape(x, bias);
  const Tensor& X = x.value();
  const Tensor& B = bias.value();
  require_matrix(X, "add_bias");
  if (B.size() != X.cols() || B.rows() != 1) {
    throw DimensionError("add_bias: bias " + B.shape_string() + " does not fit " + X.shape_string());
  }
  Tensor out = X;
  auto O = as_matrix(out);
  const Eigen::Map<const Eigen::RowVectorXd> b(B.raw(), static_cast<Eigen::Index>(B.size()));
  O.rowwise() += b;
  return OpBuilder::make(OpKind::AddBias, {x, bias}, std::move(out));
}

Node add_tiled(Node x, Node y) {
  require_same_tape(x, y);
  const Tensor& X = x.value();
  const Tensor& Y = y.value();
  require_matrix(X, "add_tiled");
  require_matrix(Y, "add_tiled");
  if (X.cols() != Y.cols() || Y.rows() == 0 || X.rows() % Y.rows() != 0) {
    throw DimensionError("add_tiled: " + Y.shape_string() + " does not tile " + X.shape_string());
  }
  Tensor out = Tensor::matrix(X.rows(), X.cols());
  auto O = as_matrix(out);
  const auto XM = as_matrix(X);
  const auto YM = as_matrix(Y);
  const auto b = YM.rows();
  for (Eigen::Index r = 0; r < XM.rows(); ++r) O.row(r) = XM.row(r) + YM.row(r % b);
  return OpBuilder::make(OpKind::AddTiled, {x, y}, std::move(out));
}

Node concat_cols(std::span<const Node> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no operands");
  const std::size_t rows = parts.front().value().rows();
  std::size_t cols = 0;
  for (const Node& p : parts) {
    require_matrix(p.value(), "concat_cols");
    if (p.value().rows() != rows) {
      throw DimensionError("concat_cols: row counts differ (" + parts.front().value().shape_string() +
                           " vs " + p.value().shape_string() + ")");
    }
    cols += p.value().cols();
  }
  Tensor out = Tensor::matrix(rows, cols);
  auto O = as_matrix(out);
  Eigen::Index offset = 0;
  for (const Node& p : parts) {
    const auto P = as_matrix(p.value());
    O.middleCols(offset, P.cols()) = P;
    offset += P.cols();
  }
  return OpBuilder::make(OpKind::ConcatCols, parts, std::move(out));
}

Node concat_rows(std::span<const Node> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no operands");
  const std::size_t cols = parts.front().value().cols();
  std::size_t rows = 0;
  for (const Node& p : parts) {
    require_matrix(p.value(), "concat_rows");
    if (p.value().cols() != cols) {
      throw DimensionError("concat_rows: column counts differ (" + parts.front().value().shape_string() +
                           " vs " + p.value().shape_string() + ")");
    }
    rows += p.value().rows();
  }
  Tensor out = Tensor::matrix(rows, cols);
  double* dst = out.raw();
  for (const Node& p : parts) dst = std::copy_n(p.value().raw(), p.value().size(), dst);
  return OpBuilder::make(OpKind::ConcatRows, parts, std::move(out));
}

Node slice_rows(Node x, std::size_t begin, std::size_t count) {
  const Tensor& X = x.value();
  require_matrix(X, "slice_rows");
  if (begin + count > X.rows()) {
    throw DimensionError("slice_rows: rows [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") exceed " + X.shape_string());
  }
  const std::size_t cols = X.cols();
  Tensor out = Tensor::matrix(count, cols);
  std::copy_n(X.raw() + begin * cols, count * cols, out.raw());
  return OpBuilder::make(OpKind::SliceRows, {x}, std::move(out), {}, begin);
}

Node gather_rows(Node table, std::vector<std::size_t> indices) {
  const Tensor& T = table.value();
  require_matrix(T, "gather_rows");
  const std::size_t cols = T.cols();
  Tensor out = Tensor::matrix(indices.size(), cols);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= T.rows()) {
      throw std::out_of_range("gather_rows: index " + std::to_string(indices[r]) + " outside " +
                              T.shape_string());
    }
    std::copy_n(T.raw() + indices[r] * cols, cols, out.raw() + r * cols);
  }
  return OpBuilder::make(OpKind::Gather, {table}, std::move(out), std::move(indices));
}

Node select_rows(std::vector<std::uint8_t> take_a, Node a, Node b) {
  require_same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (!A.same_shape(B) || take_a.size() != A.rows()) {
    throw DimensionError("select_rows: operands " + A.shape_string() + ", " + B.shape_string() +
                         " with " + std::to_string(take_a.size()) + " selectors");
  }
  Tensor out = B;
  const std::size_t cols = A.cols();
  for (std::size_t r = 0; r < take_a.size(); ++r) {
    if (take_a[r]) std::copy_n(A.raw() + r * cols, cols, out.raw() + r * cols);
  }
  std::vector<std::size_t> sel(take_a.begin(), take_a.end());
  return OpBuilder::make(OpKind::SelectRows, {a, b}, std::move(out), std::move(sel));
}

Node reshape(Node x, std::size_t rows, std::size_t cols) {
  const Tensor& X = x.value();
  if (rows * cols != X.size()) {
    throw DimensionError("reshape: cannot view " + X.shape_string() + " as [" +
                         std::to_string(rows) + "x" + std::to_string(cols) + "]");
  }
  Tensor out({rows, cols}, std::vector<double>(X.data().begin(), X.data().end()));
  return OpBuilder::make(OpKind::Reshape, {x}, std::move(out));
}

Node transpose(Node x) {
  const Tensor& X = x.value();
  require_matrix(X, "transpose");
  Tensor out = Tensor::matrix(X.cols(), X.rows());
  as_matrix(out) = as_matrix(X).transpose();
  return OpBuilder::make(OpKind::Transpose, {x}, std::move(out));
}

namespace {

Tensor softmax_forward(const Tensor& X, const std::vector<std::uint8_t>* mask) {
  require_matrix(X, "softmax");
  if (X.size() == 0 || X.cols() == 0) throw std::invalid_argument("softmax: empty input");
  Tensor out(X.shape(), 0.0);
  const std::size_t cols = X.cols();
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const double* in = X.raw() + r * cols;
    double* o = out.raw() + r * cols;
    auto valid = [&](std::size_t c) { return !mask || (*mask)[r * cols + c] != 0; };
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cols; ++c) {
      if (valid(c)) mx = std::max(mx, in[c]);
    }
    if (mx == -std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("softmax: every position of row " + std::to_string(r) + " is masked");
    }
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      if (valid(c)) {
        o[c] = std::exp(in[c] - mx);
        total += o[c];
      }
    }
    for (std::size_t c = 0; c < cols; ++c) o[c] /= total;
  }
  return out;
}

}  // namespace

Node softmax(Node x) {
  return OpBuilder::make(OpKind::Softmax, {x}, softmax_forward(x.value(), nullptr));
}

Node masked_softmax(Node x, std::vector<std::uint8_t> mask) {
  if (mask.size() != x.value().size()) {
    throw DimensionError("masked_softmax: mask of " + std::to_string(mask.size()) +
                         " entries for " + x.value().shape_string());
  }
  return OpBuilder::make(OpKind::Softmax, {x}, softmax_forward(x.value(), &mask));
}

Node weighted_row_sum(Node weights, Node states) {
  require_same_tape(weights, states);
  const Tensor& W = weights.value();
  const Tensor& H = states.value();
  require_matrix(W, "weighted_row_sum");
  require_matrix(H, "weighted_row_sum");
  const std::size_t batch = W.rows();
  const std::size_t steps = W.cols();
  if (H.rows() != batch * steps) {
    throw DimensionError("weighted_row_sum: weights " + W.shape_string() + " do not index states " +
                         H.shape_string());
  }
  Tensor out = Tensor::matrix(batch, H.cols());
  auto O = as_matrix(out);
  const auto WM = as_matrix(W);
  const auto HM = as_matrix(H);
  const auto b = static_cast<Eigen::Index>(batch);
  for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(steps); ++t) {
    for (Eigen::Index r = 0; r < b; ++r) {
      const double w = WM(r, t);
      if (w != 0.0) O.row(r) += w * HM.row(t * b + r);
    }
  }
  return OpBuilder::make(OpKind::WeightedRowSum, {weights, states}, std::move(out));
}

Node cross_entropy_rows(Node dist, std::vector<std::size_t> targets) {
  const Tensor& D = dist.value();
  require_matrix(D, "cross_entropy");
  if (targets.size() != D.rows()) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                         D.shape_string());
  }
  const std::size_t cols = D.cols();
  Tensor out = Tensor::matrix(D.rows(), 1);
  std::size_t clamped = 0;
  for (std::size_t r = 0; r < targets.size(); ++r) {
    const std::size_t t = targets[r];
    if (t == kIgnoreTarget) continue;
    if (t >= cols) {
      throw std::out_of_range("cross_entropy: target " + std::to_string(t) + " outside " +
                              std::to_string(cols) + " classes");
    }
    double p = D[r * cols + t];
    if (!(p > kProbabilityFloor)) {
      p = kProbabilityFloor;
      ++clamped;
    }
    out[r] = -std::log(p);
  }
  Node n = OpBuilder::make(OpKind::CrossEntropy, {dist}, std::move(out), std::move(targets));
  OpBuilder::count_clamped(n.tape(), clamped);
  return n;
}

Node cross_entropy(Node dist, std::size_t target) {
  if (dist.value().rows() != 1) {
    throw DimensionError("cross_entropy: expected one probability row, got " +
                         dist.value().shape_string());
  }
  return sum(cross_entropy_rows(dist, {target}));
}

Node sum(Node x) {
  // Sequential order keeps the result independent of buffer alignment.
  const auto values = x.value().data();
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  return OpBuilder::make(OpKind::Sum, {x}, Tensor::scalar(total));
}

}  // namespace morphseg::ad
