#ifndef FWI_CLI_HPP
#define FWI_CLI_HPP

namespace fwi {

/// Command-line entry point (subcommands: forward, make-data, invert,
/// gradcheck, metrics, export). Returns 0 on success, 1 on validation
/// failures, 2 on numerical divergence.
int cli_main(int argc, char** argv);

}  // namespace fwi

#endif
