#pragma once

#include "fsmpc/config.hpp"

#include <string>

namespace fsmpc::cli {

enum ExitCode { kOk = 0, kConfig = 2, kPrecondition = 3, kNotCertified = 4 };

struct Flags {
    std::string out;
    int workers = 1;
    std::uint64_t seed = 0;
};

int cmd_simulate(const RunConfig& cfg, const Flags& f);
int cmd_collect(const RunConfig& cfg, const Flags& f);
int cmd_calibrate(const RunConfig& cfg, const Flags& f);
int cmd_evaluate(const RunConfig& cfg, const Flags& f);
int cmd_rpi(const RunConfig& cfg, const Flags& f);

} // namespace fsmpc::cli
