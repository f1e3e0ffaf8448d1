#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <vector>

#include "rnav/ad/parameters.hpp"
#include "rnav/ad/tensor.hpp"

namespace rnav::ad {

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid as long as the tape.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
  double item() const { return value().item(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Linear record of a forward computation. Nodes are appended in evaluation
// order, so every node's inputs precede it and a single reverse sweep visits
// each node once.
//
// A tape is single-threaded. Independent episodes use independent tapes and
// reduce their parameter gradients explicitly (collect_parameter_grads).
class Tape {
 public:
  // Receives the gradient flowing into the node's output.
  using BackwardFn = std::function<void(Tape&, const Tensor&)>;

  static constexpr std::size_t kNoParameter = std::numeric_limits<std::size_t>::max();

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);
  // Leaf bound to params[index]; tracked only when `track` and the parameter is trainable.
  Var parameter(const ParameterSet& params, std::size_t index, bool track = true);
  // Copy of `v` as an untracked leaf: nothing upstream of it receives gradient through it.
  Var detach(Var v);

  // Appends an operation result. The node is tracked iff any input is tracked;
  // untracked nodes drop `backward` so inference builds no closures.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward);

  // Populates gradients of every tracked node with d(loss)/d(node).
  // Throws ShapeError if loss is not a [1, 1] tensor.
  void backward(Var loss);

  // Gradient buffer of a tracked node, zero-initialized on first access;
  // nullptr for untracked nodes. Backward closures accumulate through this.
  Tensor* grad_buffer(Var v);
  // Gradient after backward(); zeros when nothing flowed into v.
  const Tensor& grad(Var v);

  // Adds every parameter leaf's gradient into grads[param index].
  void collect_parameter_grads(GradientSet& grads) const;

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::size_t param_index = kNoParameter;
    BackwardFn backward;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }
inline bool Var::requires_grad() const { return tape_->requires_grad(id_); }

}  // namespace rnav::ad
