#include "modnet/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "modnet/errors.hpp"
#include "modnet/rng.hpp"

namespace modnet {

const GradReport::Sample* GradReport::worst() const {
    const Sample* w = nullptr;
    for (const Sample& s : samples) {
        if (!w || s.rel_err > w->rel_err) w = &s;
    }
    return w;
}

double grad_rel_err(double analytic, double numeric) {
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
    return std::fabs(analytic - numeric) / denom;
}

namespace {

double eval_value(const std::function<Var(Tape&)>& forward) {
    Tape tape;
    Var loss = forward(tape);
    return tape.scalar(loss);
}

}  // namespace

GradReport grad_check(const std::function<Var(Tape&)>& forward, std::vector<Param*> params, double eps,
                      std::uint64_t sample_seed) {
    if (!(eps > 0.0 && eps <= 1e-2)) throw std::invalid_argument("grad_check: eps must lie in (0, 1e-2]");

    const double f0 = eval_value(forward);
    const double f1 = eval_value(forward);
    if (f0 != f1) throw NumericError("grad_check: forward is not deterministic (double evaluation mismatch)");
    if (!std::isfinite(f0)) throw NumericError("grad_check: non-finite forward value");

    // One analytic pass; gradients land in each Param::grad.
    for (Param* p : params) p->zero_grad();
    {
        Tape tape;
        Var loss = forward(tape);
        tape.backward(loss);
    }

    GradReport report;
    Rng rng(mix_seed(sample_seed, 0x67726164));
    for (Param* p : params) {
        const int n = p->value.size();
        std::vector<int> coords(n);
        std::iota(coords.begin(), coords.end(), 0);
        if (n > 32) {
            rng.shuffle(coords);
            coords.resize(32);
            std::sort(coords.begin(), coords.end());
        }
        for (int c : coords) {
            const double saved = p->value.data[c];
            p->value.data[c] = saved + eps;
            const double fp = eval_value(forward);
            p->value.data[c] = saved - eps;
            const double fm = eval_value(forward);
            p->value.data[c] = saved;

            GradReport::Sample s;
            s.param = p->name;
            s.index = c;
            s.analytic = p->grad.data[c];
            s.numeric = (fp - fm) / (2.0 * eps);
            s.abs_err = std::fabs(s.analytic - s.numeric);
            s.rel_err = grad_rel_err(s.analytic, s.numeric);
            report.max_abs_err = std::max(report.max_abs_err, s.abs_err);
            report.max_rel_err = std::max(report.max_rel_err, s.rel_err);
            report.samples.push_back(std::move(s));
        }
    }
    return report;
}

}  // namespace modnet
