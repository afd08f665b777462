#pragma once

#include <functional>
#include <vector>

#include "roirank/autodiff.hpp"

namespace roirank {

/// Compares reverse-mode gradients against central finite differences.
///
/// `fn` rebuilds the scalar-valued computation from the current contents of
/// `leaves` on every call; grad_check mutates leaf values in place while
/// probing. Returns the maximum over checked elements of
///   |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
/// Throws NumericError if two forward passes of `fn` disagree.
double grad_check(const std::function<Value()>& fn,
                  const std::vector<Value>& leaves, double epsilon = 1e-5);

/// Same oracle, but probes at most `max_elems_per_leaf` elements of each
/// leaf, chosen deterministically from `seed`. Makes checking gradients of
/// 100k-element parameter tensors affordable.
double grad_check_sampled(const std::function<Value()>& fn,
                          const std::vector<Value>& leaves,
                          std::size_t max_elems_per_leaf, std::uint64_t seed,
                          double epsilon = 1e-5);

}  // namespace roirank
