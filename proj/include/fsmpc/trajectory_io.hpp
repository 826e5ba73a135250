#pragma once

#include "fsmpc/sim.hpp"

#include <iosfwd>
#include <json.hpp>
#include <vector>

namespace fsmpc {

/// Header line for one episode; `extra` keys (config hash, seed) are merged in.
nlohmann::json episode_header(const Trajectory& tr, const nlohmann::json& extra = {});
nlohmann::json step_to_json(const StepRecord& s);

/// Header line followed by one line per step.
void write_trajectory(std::ostream& os, const Trajectory& tr, const nlohmann::json& extra = {});
/// Reads every episode in a JSONL stream. Throws FormatError on malformed input.
std::vector<Trajectory> read_trajectories(std::istream& is);

} // namespace fsmpc
