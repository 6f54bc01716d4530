#pragma once

#include <vector>

#include "evtach/frames.hpp"

namespace evtach {

/// zero_shift scores the template against each frame at its own position;
/// max_over_shifts searches all 2D cyclic displacements and keeps the best,
/// which tolerates features that drift within the RoI.
enum class CorrMode { zero_shift, max_over_shifts };

/// raw is the plain product sum; normalized divides by the L2 norms of
/// template and frame (cosine similarity, in [-1, 1]), with all-zero
/// operands scoring 0 by convention.
enum class CorrNorm { raw, normalized };

/// Two interchangeable implementations that must agree to 1e-9 relative:
/// `direct` computes the sums by explicit loops, `transform` goes through
/// frequency-domain products (cyclic correlation).
enum class CorrBackend { direct, transform };

struct CorrelationResponse {
    std::vector<double> scores; // one per frame index
    CorrMode mode = CorrMode::zero_shift;
    CorrNorm norm = CorrNorm::normalized;
};

CorrelationResponse correlate(const Template& tpl, const FrameSequence& seq, CorrMode mode,
                              CorrNorm norm, CorrBackend backend);

} // namespace evtach
