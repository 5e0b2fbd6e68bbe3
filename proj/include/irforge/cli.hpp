#pragma once

namespace irforge {

/// Entry point for the `irforge` binary. Exit codes: 0 success, 1 partial
/// result or runtime failure, 2 usage or configuration error.
int run_cli(int argc, char** argv);

}  // namespace irforge
