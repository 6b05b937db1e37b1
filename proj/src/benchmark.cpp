#include "deto/benchmark.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace deto {

namespace {

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// Mirror back into [lo, hi]; one fold per overshoot.
double reflect(double v, double lo, double hi) {
    const double span = hi - lo;
    while (v < lo || v > hi) {
        if (v < lo) v = lo + (lo - v);
        if (v > hi) v = hi - (v - hi);
        if (span <= 0.0) break;
    }
    return v;
}

}  // namespace

MPBState MPBState::init(const MPBConfig& cfg, Rng& rng) {
    if (cfg.dim < 1 || cfg.peaks < 1)
        throw std::invalid_argument("MPBState: dim and peak count must be >= 1");
    if (cfg.bounds.dim() != cfg.dim)
        throw std::invalid_argument("MPBState: bounds dimension mismatch");

    MPBState st;
    st.config_ = cfg;
    st.step_ = 1;
    for (int i = 0; i < cfg.peaks; ++i) {
        Peak p;
        p.center.resize(cfg.dim);
        for (int d = 0; d < cfg.dim; ++d)
            p.center[d] = rng.uniform(cfg.bounds.lower[d], cfg.bounds.upper[d]);
        p.height = rng.uniform(cfg.height_min, cfg.height_max);
        p.width = rng.uniform(cfg.width_min, cfg.width_max);
        st.peaks_.push_back(std::move(p));
    }
    return st;
}

double MPBState::eval(const Vector& x) const {
    if (x.size() != config_.dim) throw std::invalid_argument("MPBState::eval: dimension mismatch");
    double best = -std::numeric_limits<double>::infinity();
    for (const Peak& p : peaks_) {
        const double dist2 = (x - p.center).squaredNorm();
        double v;
        if (config_.shape == PeakShape::Cone)
            v = p.height - p.width * std::sqrt(dist2);
        else
            v = p.height * std::exp(-dist2 / (2.0 * p.width * p.width));
        best = std::max(best, v);
    }
    return best;
}

MPBState MPBState::advanced(Rng& rng) const {
    MPBState next = *this;
    next.step_ = step_ + 1;
    for (Peak& p : next.peaks_) {
        p.height = clamp(p.height + config_.height_severity * rng.normal(),
                         config_.height_min, config_.height_max);
        p.width = clamp(p.width + config_.width_severity * rng.normal(),
                        config_.width_min, config_.width_max);
        const Vector shift = config_.shift_severity * rng.unit_vector(config_.dim);
        for (int d = 0; d < config_.dim; ++d)
            p.center[d] = reflect(p.center[d] + shift[d], config_.bounds.lower[d],
                                  config_.bounds.upper[d]);
    }
    return next;
}

std::pair<Vector, double> MPBState::true_optimum() const {
    // max_x max_i g_i(x) = max_i H_i: every component attains its own
    // maximum H_i at its center, and no component exceeds its height.
    int best = 0;
    for (size_t i = 1; i < peaks_.size(); ++i)
        if (peaks_[i].height > peaks_[best].height) best = static_cast<int>(i);
    return {peaks_[best].center, peaks_[best].height};
}

void MPBState::dump(std::ostream& os) const {
    os << "mpb " << (config_.shape == PeakShape::Cone ? "cone" : "gaussian") << " dim "
       << config_.dim << " peaks " << peaks_.size() << " step " << step_ << "\n";
    os << "bounds";
    for (int d = 0; d < config_.dim; ++d)
        os << " " << config_.bounds.lower[d] << " " << config_.bounds.upper[d];
    os << "\n";
    os << "severity " << config_.height_severity << " " << config_.shift_severity << " "
       << config_.width_severity << "\n";
    os.precision(17);
    for (const Peak& p : peaks_) {
        os << p.height << " " << p.width;
        for (int d = 0; d < config_.dim; ++d) os << " " << p.center[d];
        os << "\n";
    }
}

MPBState MPBState::parse(std::istream& is) {
    std::string tag, shape, word;
    MPBConfig cfg;
    int peak_count = 0, step = 1;
    if (!(is >> tag >> shape >> word >> cfg.dim >> word >> peak_count >> word >> step)
        || tag != "mpb")
        throw std::invalid_argument("MPBState::parse: malformed header");
    cfg.shape = shape == "cone" ? PeakShape::Cone : PeakShape::Gaussian;
    cfg.peaks = peak_count;
    Vector lo(cfg.dim), hi(cfg.dim);
    if (!(is >> word) || word != "bounds")
        throw std::invalid_argument("MPBState::parse: missing bounds");
    for (int d = 0; d < cfg.dim; ++d) is >> lo[d] >> hi[d];
    cfg.bounds = Box(lo, hi);
    if (!(is >> word) || word != "severity")
        throw std::invalid_argument("MPBState::parse: missing severity");
    is >> cfg.height_severity >> cfg.shift_severity >> cfg.width_severity;

    MPBState st;
    st.config_ = cfg;
    st.step_ = step;
    for (int i = 0; i < peak_count; ++i) {
        Peak p;
        p.center.resize(cfg.dim);
        if (!(is >> p.height >> p.width))
            throw std::invalid_argument("MPBState::parse: truncated peak line");
        for (int d = 0; d < cfg.dim; ++d) is >> p.center[d];
        st.peaks_.push_back(std::move(p));
    }
    if (!is) throw std::invalid_argument("MPBState::parse: truncated input");
    return st;
}

DynamicProblem::DynamicProblem(const MPBConfig& cfg, std::uint64_t instance_seed)
    : rng_(instance_seed) {
    state_ = MPBState::init(cfg, rng_);
}

double DynamicProblem::evaluate(const Vector& x, int t) {
    if (t != state_.step())
        throw std::invalid_argument("DynamicProblem: evaluation requested for a step that "
                                    "is not current");
    ++evaluations_;
    return state_.eval(x);
}

void DynamicProblem::advance() { state_ = state_.advanced(rng_); }

}  // namespace deto
