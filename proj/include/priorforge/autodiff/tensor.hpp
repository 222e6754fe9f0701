#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace priorforge::ad {

using Shape = std::vector<std::int64_t>;

std::int64_t numel(Shape const &shape);
std::string to_string(Shape const &shape);

class Tensor;

namespace detail {

struct Node;
using NodePtr = std::shared_ptr<Node>;
using BackwardFn = std::function<void(Node &)>;

struct Node
{
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad; // empty until first touched by backward()
  bool requires_grad = false;
  std::uint64_t id = 0;
  std::vector<NodePtr> parents;
  BackwardFn backward;

  bool has_grad() const { return !grad.empty(); }
  std::vector<double> &ensure_grad();
};

} // namespace detail

/// Dense float64 array participating in a reverse-mode graph. Copies are
/// shallow: two Tensor handles may refer to the same node.
class Tensor
{
public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  Shape const &shape() const;
  std::int64_t dim(std::size_t axis) const;
  std::size_t rank() const { return shape().size(); }
  std::int64_t numel() const;
  std::uint64_t id() const;
  bool requires_grad() const;

  std::span<double const> data() const;
  std::span<double> data();
  double item() const;

  bool has_grad() const;
  std::span<double const> grad() const;
  std::span<double> grad();
  void zero_grad();

  /// Fresh leaf with a copy of the values and no graph history.
  Tensor detach() const;

  detail::Node &node() const { return *node_; }
  detail::NodePtr const &node_ptr() const { return node_; }

  /// Used by op implementations: creates a result node whose gradient
  /// flows to `parents` through `fn`. When no parent requires a gradient
  /// the closure is dropped and the result is a constant.
  static Tensor make_result(Shape shape,
                            std::vector<double> value,
                            std::vector<Tensor> const &parents,
                            detail::BackwardFn fn);

private:
  explicit Tensor(detail::NodePtr n)
    : node_(std::move(n))
  {
  }
  detail::NodePtr node_;
};

/// Trainable tensor with a hierarchical layer-path name.
struct Parameter
{
  std::string name;
  Tensor tensor;
};

/// Populates gradients of every leaf reachable from `loss`. Leaf gradients
/// accumulate across calls; intermediate gradients are recomputed each call.
void backward(Tensor const &loss);

} // namespace priorforge::ad
