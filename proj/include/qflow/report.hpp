#pragma once

#include <sstream>
#include <string>
#include <vector>

namespace qflow {

/// One verified identity instance: which identity, on which inputs, the
/// certified residual bound and the tolerance it was held to.
struct CheckResult {
    std::string identity;  // e.g. "first_order_product", "tau_dissipation"
    std::string detail;    // inputs, human readable
    double residual = 0.0;
    double tol = 0.0;
    bool pass = false;
};

struct VerificationReport {
    std::string subject;
    std::vector<CheckResult> checks;

    void add(std::string identity, std::string detail, double residual, double tol) {
        checks.push_back({std::move(identity), std::move(detail), residual, tol,
                          residual <= tol});
    }

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    std::size_t failures() const {
        std::size_t n = 0;
        for (const auto& c : checks)
            if (!c.pass) ++n;
        return n;
    }

    double max_residual() const {
        double m = 0.0;
        for (const auto& c : checks) m = std::max(m, c.residual);
        return m;
    }

    std::string summary() const {
        std::ostringstream os;
        os << subject << ": " << checks.size() << " checks, " << failures() << " failed";
        if (!all_pass()) {
            for (const auto& c : checks)
                if (!c.pass)
                    os << "\n  FAIL " << c.identity << " [" << c.detail
                       << "] residual=" << c.residual << " tol=" << c.tol;
        }
        return os.str();
    }
};

}  // namespace qflow
