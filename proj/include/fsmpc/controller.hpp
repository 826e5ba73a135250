#pragma once

#include "fsmpc/mpc.hpp"

#include <optional>

namespace fsmpc {

/// Raised when the controller is driven outside its preconditions
/// (alarm or infeasible solve before any plan exists).
class ProtocolError : public Error {
public:
    using Error::Error;
};

enum class Mode { Nominal, Fallback, Recovery };
const char* to_string(Mode m);

struct ControllerState {
    Mode mode = Mode::Nominal;
    int k = 0;                          ///< fallback steps already applied
    std::optional<MPCSolution> plan;    ///< last feasible plan
    std::optional<int> t_fail;
    int t = 0;
};

struct StepDiag {
    Mode mode = Mode::Nominal;  ///< mode used for this step's input
    bool solved = false;        ///< an MPC solve was attempted
    bool feasible = false;      ///< that solve succeeded
    bool triggered = false;     ///< fallback started at this step
    bool clamped = false;       ///< recovery input was projected onto U
    int recovery_index = -1;
    int qp_iterations = 0;
};

struct ControllerStep {
    Vec u;
    ControllerState state;
    StepDiag diag;
};

/// One step of the fallback-safe mode machine. Fallback step k applies plan entry k+1
/// (the plan was computed one step before the fault); after T fallback steps the
/// recovery policy of the plan's recovery set takes over.
ControllerStep controller_step(ControllerState state, const Vec& xhat, const Vec& y, bool alarm,
                               TubeMPC& mpc);

/// Euclidean projection onto a polytope (used to clamp recovery inputs).
Vec project(const HPolytope& P, const Vec& v);

} // namespace fsmpc
