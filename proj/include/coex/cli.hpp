#pragma once

namespace coex {

/// Entry point for the spectrum_agent tool. Exit codes: 0 success,
/// 1 validation or I/O failure, 2 usage error.
int cli_main(int argc, const char* const* argv);

}  // namespace coex
