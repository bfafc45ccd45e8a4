#pragma once

#include <string>

#include <fmt/format.h>

namespace fluxent {

enum class ResonanceKind { SingleQubit, TwoQubit };

// Plus: eps_q + g + k*omega = 0. Minus: eps_q - g + k*omega = 0, the mirror
// branch reached from the other coupling sector.
enum class CouplingBranch { Plus, Minus };

struct ResonanceInfo {
    ResonanceKind kind{ResonanceKind::TwoQubit};
    int qubit{0};  // 1 or 2, 0 for the two-qubit condition
    CouplingBranch branch{CouplingBranch::Plus};
    int k{0};
    double detuning{0.0};  // signed residual of the condition at k

    bool extended() const { return kind == ResonanceKind::SingleQubit && branch == CouplingBranch::Minus; }

    std::string label() const {
        if (kind == ResonanceKind::TwoQubit) return "two-qubit";
        return fmt::format("qubit{}{}", qubit, branch == CouplingBranch::Plus ? "+g" : "-g");
    }

    std::string describe() const {
        if (kind == ResonanceKind::TwoQubit)
            return fmt::format("eps1+eps2{:+d}*omega = {:.6g}", k, detuning);
        return fmt::format("eps{}{}g{:+d}*omega = {:.6g}", qubit,
                           branch == CouplingBranch::Plus ? '+' : '-', k, detuning);
    }
};

}  // namespace fluxent
