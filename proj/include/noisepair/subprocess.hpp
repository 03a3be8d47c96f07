#pragma once

#include <string>

namespace noisepair {

struct CommandResult {
    int exit_code = -1;
    bool timed_out = false;
};

// Runs `command` through /bin/sh -c with a wall-clock timeout. On timeout the
// process group is killed and timed_out is set.
CommandResult run_command(const std::string& command, double timeout_seconds);

}  // namespace noisepair
