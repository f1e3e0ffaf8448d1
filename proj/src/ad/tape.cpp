#include "rnav/ad/tape.hpp"

#include <stdexcept>

namespace rnav::ad {

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) { return push(Node{std::move(value), {}, false, kNoParameter, {}}); }

Var Tape::variable(Tensor value) { return push(Node{std::move(value), {}, true, kNoParameter, {}}); }

Var Tape::parameter(const ParameterSet& params, std::size_t index, bool track) {
  const Parameter& p = params[index];
  const bool tracked = track && p.trainable;
  return push(Node{p.value, {}, tracked, tracked ? index : kNoParameter, {}});
}

Var Tape::detach(Var v) { return constant(v.value()); }

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  bool tracked = false;
  for (const Var& in : inputs) tracked = tracked || in.requires_grad();
  return push(Node{std::move(value), {}, tracked, kNoParameter, tracked ? std::move(backward) : BackwardFn{}});
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward) {
  bool tracked = false;
  for (const Var& in : inputs) tracked = tracked || in.requires_grad();
  return push(Node{std::move(value), {}, tracked, kNoParameter, tracked ? std::move(backward) : BackwardFn{}});
}

Tensor* Tape::grad_buffer(Var v) {
  Node& n = nodes_[v.id()];
  if (!n.requires_grad) return nullptr;
  if (n.grad.empty()) n.grad = Tensor(n.value.shape(), 0.0);
  return &n.grad;
}

const Tensor& Tape::grad(Var v) {
  Node& n = nodes_[v.id()];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape(), 0.0);
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw std::invalid_argument("backward: loss belongs to another tape");
  const Shape& s = loss.shape();
  if (s.rows != 1 || s.cols != 1) throw_shape_error("backward", s, "is not a scalar loss");
  if (backward_done_) throw std::logic_error("backward: tape already differentiated");
  backward_done_ = true;
  if (!loss.requires_grad()) return;

  grad_buffer(loss)->fill(1.0);
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
    n.backward(*this, n.grad);
  }
}

void Tape::collect_parameter_grads(GradientSet& grads) const {
  for (const Node& n : nodes_) {
    if (n.param_index == kNoParameter || n.grad.empty()) continue;
    grads[n.param_index] += n.grad;
  }
}

}  // namespace rnav::ad
