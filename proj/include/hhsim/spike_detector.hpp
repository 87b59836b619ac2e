#pragma once

#include <optional>

namespace hhsim {

/// Stopping-time spike detector on the (m, h) gating pair.
///
/// A spike is the first grid time at which m crosses above h while the
/// detector is armed. After a spike at tau the detector stays disarmed until
/// some grid time t > tau + delta0 with m < h.
class SpikeDetector {
public:
    enum class Phase { BelowSeekingUp, AboveSeekingDown };

    explicit SpikeDetector(double delta0 = 1.0) : delta0_(delta0) {}

    /// Feed one grid transition ending at time t; returns t if a spike fires.
    std::optional<double> observe(double m_prev, double h_prev, double m_cur, double h_cur, double t) {
        if (phase_ == Phase::BelowSeekingUp) {
            if (m_prev <= h_prev && m_cur > h_cur) {
                phase_ = Phase::AboveSeekingDown;
                last_spike_ = t;
                return t;
            }
        } else if (t > last_spike_ + delta0_ && m_cur < h_cur) {
            phase_ = Phase::BelowSeekingUp;
        }
        return std::nullopt;
    }

    [[nodiscard]] Phase phase() const noexcept { return phase_; }
    [[nodiscard]] double last_spike() const noexcept { return last_spike_; }
    [[nodiscard]] double delta0() const noexcept { return delta0_; }

private:
    double delta0_;
    Phase phase_ = Phase::BelowSeekingUp;
    double last_spike_ = 0.0;
};

}  // namespace hhsim
