#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace qflow {

/// Piecewise-constant K-valued test function on [0, T), zero beyond T.
/// Breakpoints 0 = t_0 < t_1 < ... < t_m = T; values v_1..v_m are K-coordinate
/// rows over the multiplicity basis (length d each).
struct StepFunction {
    double horizon = 0.0;
    std::vector<double> breaks;                       // includes 0 and T
    std::vector<std::vector<std::complex<double>>> values;  // one per interval

    static StepFunction zero(std::size_t d, double T) {
        StepFunction f;
        f.horizon = T;
        if (T > 0.0) {
            f.breaks = {0.0, T};
            f.values = {std::vector<std::complex<double>>(d, 0.0)};
        } else {
            f.breaks = {0.0};
        }
        return f;
    }

    static StepFunction constant(const std::vector<std::complex<double>>& v, double T) {
        StepFunction f;
        f.horizon = T;
        f.breaks = {0.0, T};
        f.values = {v};
        f.validate();
        return f;
    }

    std::size_t dim() const { return values.empty() ? 0 : values.front().size(); }
    std::size_t intervals() const { return values.size(); }

    void validate() const {
        if (horizon < 0.0) throw std::invalid_argument("step function: negative horizon");
        if (breaks.size() != values.size() + 1)
            throw std::invalid_argument("step function: breakpoint/value count mismatch");
        if (!breaks.empty()) {
            if (breaks.front() != 0.0) throw std::invalid_argument("step function: must start at 0");
            if (breaks.back() != horizon)
                throw std::invalid_argument("step function: last breakpoint must equal horizon");
        }
        for (std::size_t k = 1; k < breaks.size(); ++k)
            if (!(breaks[k - 1] < breaks[k]))
                throw std::invalid_argument("step function: breakpoints must increase strictly");
        for (std::size_t k = 1; k < values.size(); ++k)
            if (values[k].size() != values[0].size())
                throw std::invalid_argument("step function: inconsistent value dimension");
    }

    std::vector<std::complex<double>> value_at(double t) const {
        if (t < 0.0) throw std::invalid_argument("step function: negative time");
        if (t >= horizon || values.empty())
            return std::vector<std::complex<double>>(dim(), 0.0);
        for (std::size_t k = 1; k < breaks.size(); ++k)
            if (t < breaks[k]) return values[k - 1];
        return std::vector<std::complex<double>>(dim(), 0.0);
    }

    /// theta_s shift: f(. + s), defined on [0, max(T - s, 0)).
    StepFunction shift(double s) const {
        if (s < 0.0) throw std::invalid_argument("step function: negative shift");
        StepFunction out;
        if (s >= horizon) {
            out.horizon = 0.0;
            out.breaks = {0.0};
            return out;
        }
        out.horizon = horizon - s;
        out.breaks.push_back(0.0);
        for (std::size_t k = 1; k < breaks.size(); ++k) {
            if (breaks[k] <= s) continue;
            out.breaks.push_back(breaks[k] - s);
            out.values.push_back(values[k - 1]);
        }
        out.validate();
        return out;
    }
};

struct IntervalPair {
    double length;
    std::vector<std::complex<double>> f_value;
    std::vector<std::complex<double>> g_value;
};

/// Common refinement of two step functions on [0, t], padding a zero-valued
/// tail when t exceeds the declared horizon.
inline std::vector<IntervalPair> common_refinement(const StepFunction& f, const StepFunction& g,
                                                   double t) {
    if (t < 0.0) throw std::invalid_argument("refinement: negative time");
    std::size_t d = std::max(f.dim(), g.dim());
    std::vector<double> cuts{0.0};
    for (double b : f.breaks)
        if (b > 0.0 && b < t) cuts.push_back(b);
    for (double b : g.breaks)
        if (b > 0.0 && b < t) cuts.push_back(b);
    cuts.push_back(t);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<IntervalPair> out;
    for (std::size_t k = 1; k < cuts.size(); ++k) {
        double mid = 0.5 * (cuts[k - 1] + cuts[k]);
        auto fv = f.value_at(mid);
        auto gv = g.value_at(mid);
        fv.resize(d, 0.0);
        gv.resize(d, 0.0);
        out.push_back({cuts[k] - cuts[k - 1], fv, gv});
    }
    return out;
}

}  // namespace qflow
