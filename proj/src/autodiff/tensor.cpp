#include "priorforge/autodiff/tensor.hpp"

#include "priorforge/error.hpp"

#include <fmt/format.h>

#include <atomic>
#include <unordered_set>

namespace priorforge::ad {

namespace {
std::uint64_t next_id()
{
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}
} // namespace

std::int64_t numel(Shape const &shape)
{
  std::int64_t n = 1;
  for (auto e : shape) {
    n *= e;
  }
  return n;
}

std::string to_string(Shape const &shape)
{
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    s += fmt::format("{}{}", i ? "," : "", shape[i]);
  }
  return s + ")";
}

std::vector<double> &detail::Node::ensure_grad()
{
  if (grad.empty()) {
    grad.assign(value.size(), 0.0);
  }
  return grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad)
{
  for (auto e : shape) {
    if (e < 0) {
      throw ShapeError(fmt::format("negative extent in shape {}", to_string(shape)));
    }
  }
  auto n = std::make_shared<detail::Node>();
  n->value.assign(static_cast<std::size_t>(ad::numel(shape)), value);
  n->shape = std::move(shape);
  n->requires_grad = requires_grad;
  n->id = next_id();
  return Tensor(std::move(n));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad)
{
  if (static_cast<std::int64_t>(values.size()) != ad::numel(shape)) {
    throw ShapeError(
      fmt::format("data length {} does not match shape {}", values.size(), to_string(shape)));
  }
  auto n = std::make_shared<detail::Node>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  n->requires_grad = requires_grad;
  n->id = next_id();
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({}, {value}, requires_grad); }

Shape const &Tensor::shape() const { return node_->shape; }

std::int64_t Tensor::dim(std::size_t axis) const
{
  if (axis >= node_->shape.size()) {
    throw ShapeError(fmt::format("axis {} out of range for shape {}", axis, to_string(node_->shape)));
  }
  return node_->shape[axis];
}

std::int64_t Tensor::numel() const { return static_cast<std::int64_t>(node_->value.size()); }
std::uint64_t Tensor::id() const { return node_->id; }
bool Tensor::requires_grad() const { return node_->requires_grad; }
std::span<double const> Tensor::data() const { return node_->value; }
std::span<double> Tensor::data() { return node_->value; }

double Tensor::item() const
{
  if (node_->value.size() != 1) {
    throw ShapeError(fmt::format("item() on tensor of shape {}", to_string(node_->shape)));
  }
  return node_->value[0];
}

bool Tensor::has_grad() const { return node_->has_grad(); }
std::span<double const> Tensor::grad() const { return node_->grad; }
std::span<double> Tensor::grad() { return node_->grad; }

void Tensor::zero_grad()
{
  if (node_->has_grad()) {
    std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
  }
}

Tensor Tensor::detach() const { return from(node_->shape, node_->value, false); }

Tensor Tensor::make_result(Shape shape,
                           std::vector<double> value,
                           std::vector<Tensor> const &parents,
                           detail::BackwardFn fn)
{
  Tensor out = from(std::move(shape), std::move(value), false);
  bool any = false;
  for (auto const &p : parents) {
    any = any || p.requires_grad();
  }
  if (any) {
    out.node_->requires_grad = true;
    out.node_->parents.reserve(parents.size());
    for (auto const &p : parents) {
      out.node_->parents.push_back(p.node_);
    }
    out.node_->backward = std::move(fn);
  }
  return out;
}

void backward(Tensor const &loss)
{
  if (!loss.defined() || loss.numel() != 1) {
    throw ShapeError(fmt::format("backward() requires a scalar loss, got shape {}",
                                 loss.defined() ? to_string(loss.shape()) : std::string("<undefined>")));
  }
  if (!loss.requires_grad()) {
    return;
  }

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<detail::Node *> order;
  std::unordered_set<detail::Node *> seen;
  std::vector<std::pair<detail::Node *, std::size_t>> stack;
  stack.emplace_back(&loss.node(), 0);
  seen.insert(&loss.node());
  while (!stack.empty()) {
    auto &[n, next] = stack.back();
    if (next < n->parents.size()) {
      detail::Node *p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) {
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  for (auto *n : order) {
    if (!n->parents.empty()) {
      n->grad.assign(n->value.size(), 0.0);
    } else {
      n->ensure_grad();
    }
  }
  loss.node().grad[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node *n = *it;
    if (n->backward) {
      for (auto &p : n->parents) {
        if (p->requires_grad) {
          p->ensure_grad();
        }
      }
      n->backward(*n);
    }
  }
}

} // namespace priorforge::ad
