// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lorafa Authors

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tensor.hpp"

namespace lorafa {

enum class OpKind { MatMul, Add, Scale, Gelu, SoftmaxRows, LayerNorm };

std::string_view to_string(OpKind kind);

/// Non-tensor arguments of the forward call.
struct OpAttrs {
  double factor = 1.0;  // Scale
  double eps = 1e-5;    // LayerNorm
  bool batched = false; // MatMul: b carries the same batch dims as a (else b is 2-D, broadcast)
  Shape lhs_shape;      // Add: operand shapes, for broadcast reduction
  Shape rhs_shape;
};

/// Tensors a forward call kept for its backward, by slot name.
///
/// Slots per op: MatMul "a", "b"; Gelu "x"; SoftmaxRows "y" (the output);
/// LayerNorm "x", "gamma"; Add and Scale keep nothing. Tensors are shared so
/// one stored activation can serve several consumers.
class SavedInputs {
 public:
  SavedInputs& keep(std::string slot, std::shared_ptr<const Tensor> tensor);
  SavedInputs& keep(std::string slot, const Tensor& tensor);
  /// Non-owning; `tensor` must outlive this object (used for parameters).
  SavedInputs& borrow(std::string slot, const Tensor& tensor);

  bool has(std::string_view slot) const;
  /// Throws a retention-policy error if the slot was not kept.
  const Tensor& get(OpKind kind, std::string_view slot) const;

 private:
  std::vector<std::pair<std::string, std::shared_ptr<const Tensor>>> slots_;
};

/// Reverse-mode rule for one primitive. `wanted[i]` selects the gradient of
/// forward input i (MatMul: a, b; Add: a, b; LayerNorm: x, gamma, beta;
/// otherwise: x). Only the saved tensors the selected gradients depend on are
/// read, so e.g. the MatMul gradient for b alone never touches slot "b".
std::vector<std::optional<Tensor>> vjp(OpKind kind, const SavedInputs& saved,
                                       const Tensor& upstream, const std::vector<bool>& wanted,
                                       const OpAttrs& attrs = {});

}  // namespace lorafa
