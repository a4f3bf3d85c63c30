#pragma once

#include <iosfwd>

namespace mir::cli {

// Parses arguments and runs one subcommand. Errors go to `err` as a single
// line "error: <field>: <message>" and yield a nonzero status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mir::cli
