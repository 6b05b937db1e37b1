#ifndef DETO_BENCHMARK_HPP
#define DETO_BENCHMARK_HPP

#include <iosfwd>
#include <vector>

#include "deto/rng.hpp"
#include "deto/types.hpp"

namespace deto {

enum class PeakShape { Cone, Gaussian };

struct Peak {
    Vector center;
    double height = 0.0;
    double width = 0.0;
};

/// Moving-peaks generator settings. Heights drift in [30, 70], widths in
/// [1, 12], centers inside the box; the severities scale the per-change
/// Gaussian height/width drift and the fixed-length random center shift.
struct MPBConfig {
    int dim = 1;
    int peaks = 5;
    PeakShape shape = PeakShape::Cone;
    Box bounds = Box::cube(1, 0.0, 100.0);
    double height_severity = 1.0;  // h
    double shift_severity = 1.0;   // s
    double width_severity = 0.5;   // w
    double height_min = 30.0, height_max = 70.0;
    double width_min = 1.0, width_max = 12.0;

    static MPBConfig standard(int dim, int peaks, PeakShape shape, double height_severity,
                              double shift_severity) {
        MPBConfig cfg;
        cfg.dim = dim;
        cfg.peaks = peaks;
        cfg.shape = shape;
        cfg.bounds = Box::cube(dim, 0.0, 100.0);
        cfg.height_severity = height_severity;
        cfg.shift_severity = shift_severity;
        return cfg;
    }
};

/// One landscape snapshot. Evaluation takes the max over peak components:
/// cones H - W ||x - c||, or Gaussian bumps H exp(-||x - c||^2 / (2 W^2)).
/// Value type: advancing produces a new state.
class MPBState {
public:
    static MPBState init(const MPBConfig& cfg, Rng& rng);

    double eval(const Vector& x) const;

    /// One environment change: heights and widths drift (clamped to their
    /// ranges), centers shift by exactly shift_severity in a uniformly random
    /// direction with reflection at the box.
    MPBState advanced(Rng& rng) const;

    /// Global maximum: the tallest peak's height, attained at its center.
    std::pair<Vector, double> true_optimum() const;

    int step() const { return step_; }
    const std::vector<Peak>& peaks() const { return peaks_; }
    const Box& bounds() const { return config_.bounds; }
    const MPBConfig& config() const { return config_; }

    /// Text dump: a header with shape/step/bounds, then one `H W c1 .. cn`
    /// line per peak.
    void dump(std::ostream& os) const;
    static MPBState parse(std::istream& is);

private:
    MPBConfig config_;
    std::vector<Peak> peaks_;
    int step_ = 1;
};

/// Budgeted objective handle over a landscape sequence. Each evaluate() call
/// burns one function evaluation; true optima are available for metrics
/// without touching the counter.
class DynamicProblem {
public:
    DynamicProblem(const MPBConfig& cfg, std::uint64_t instance_seed);

    int current_step() const { return state_.step(); }
    const Box& bounds() const { return state_.bounds(); }
    int dim() const { return state_.bounds().dim(); }

    /// Evaluates at the current step; `t` must match it.
    double evaluate(const Vector& x, int t);
    void advance();

    long evaluations() const { return evaluations_; }
    std::pair<Vector, double> optimum() const { return state_.true_optimum(); }
    const MPBState& state() const { return state_; }

private:
    MPBState state_;
    Rng rng_;
    long evaluations_ = 0;
};

}  // namespace deto

#endif  // DETO_BENCHMARK_HPP
