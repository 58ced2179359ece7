#pragma once

namespace switchback {
namespace cli {

// Full command-line entry point. Returns the process exit code:
// 0 ok, 1 usage, 2 bad data or bad configuration, 3 numeric failure.
int run(int argc, const char* const* argv);

}  // namespace cli
}  // namespace switchback
