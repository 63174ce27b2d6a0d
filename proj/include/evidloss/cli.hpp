#pragma once

namespace evidloss {

/// Exit codes: 0 success, 1 runtime failure (including failed verification
/// checks), 2 usage error.
int run_cli(int argc, char** argv);

}  // namespace evidloss
