#pragma once

#include "spintomo/harmonics.hpp"
#include "spintomo/sinogram.hpp"

namespace spintomo {

/// Per-slice analysis of sinogram data up to degree L.
inline HarmonicStack sinogram_to_stack(const Sinogram& b, int L) {
    ShtPlan plan(b.grid, L);
    HarmonicStack stack;
    stack.L = L;
    stack.slices.reserve(b.n_s());
    std::size_t npts = b.grid.size();
    for (std::size_t is = 0; is < b.n_s(); ++is)
        stack.slices.push_back(
            plan.forward(std::span<const double>(b.values.data() + is * npts, npts)));
    return stack;
}

/// Per-slice synthesis back onto the sinogram layout of `tmpl`.
inline Sinogram stack_to_sinogram(const HarmonicStack& stack, const Sinogram& tmpl) {
    if (stack.slices.size() != tmpl.n_s())
        throw std::invalid_argument("stack_to_sinogram: slice count mismatch");
    ShtPlan plan(tmpl.grid, stack.L);
    Sinogram out = tmpl;
    std::size_t npts = tmpl.grid.size();
    for (std::size_t is = 0; is < stack.slices.size(); ++is) {
        auto slice = plan.inverse_real(stack.slices[is]);
        std::copy(slice.begin(), slice.end(), out.values.begin() + is * npts);
    }
    return out;
}

enum class HarmonicFilterMode { q, q_sqrt, truncate };

/// Band-limits the data to degree L and scales each component according to
/// the mode: the filter Q, its square root, or plain truncation.
inline Sinogram filter_sinogram(const Sinogram& b, int L, HarmonicFilterMode mode) {
    HarmonicStack stack = sinogram_to_stack(b, L);
    switch (mode) {
        case HarmonicFilterMode::q: stack = apply_q(stack); break;
        case HarmonicFilterMode::q_sqrt: stack = apply_q_sqrt(stack); break;
        case HarmonicFilterMode::truncate: break;
    }
    return stack_to_sinogram(stack, b);
}

}  // namespace spintomo
