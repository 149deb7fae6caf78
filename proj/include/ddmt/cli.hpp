#pragma once

namespace ddmt {

// Entry point behind the `ddmt` binary. Subcommands: train, detect, ablate,
// synth. Exit codes: 0 ok, 2 config error, 3 data error, 4 bundle/mode
// mismatch, 1 anything else.
int cli_main(int argc, const char* const* argv);

}  // namespace ddmt
