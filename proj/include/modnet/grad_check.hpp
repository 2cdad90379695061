#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "modnet/tape.hpp"

namespace modnet {

// Comparison of analytic (tape) gradients against central finite differences.
struct GradReport {
    struct Sample {
        std::string param;
        int index{0};
        double analytic{0.0};
        double numeric{0.0};
        double abs_err{0.0};
        double rel_err{0.0};
    };

    double max_abs_err{0.0};
    double max_rel_err{0.0};
    std::vector<Sample> samples;
    const Sample* worst() const;
};

// relative error |a-n| / max(|a|, |n|, eps) with eps = 1e-8
double grad_rel_err(double analytic, double numeric);

// Checks d(forward)/d(param) for every parameter in `params` on a sampled
// subset of coordinates (min(32, numel) per parameter, seeded sampling).
//
// `forward` must rebuild the computation on the given tape from the current
// parameter values and return the scalar loss; it is invoked many times.
// Non-deterministic forwards are detected by double evaluation and rejected.
// eps must lie in (0, 1e-2].
GradReport grad_check(const std::function<Var(Tape&)>& forward, std::vector<Param*> params, double eps,
                      std::uint64_t sample_seed = 0);

}  // namespace modnet
