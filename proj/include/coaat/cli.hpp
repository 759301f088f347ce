#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coaat {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int protocol = 1;  // contracts-level error; name on stderr
inline constexpr int usage = 2;
inline constexpr int connection = 3;
inline constexpr int auth = 4;
}  // namespace exit_code

// `args` excludes the program name.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

// Replays one of the sequence diagrams ("fig2" or "fig3") against a fresh
// in-process service. Prints the chain dump and events; nonzero when the
// observed order differs from the diagram.
int run_scenario(const std::string& name, bool json_lines, std::ostream& out, std::ostream& err);

}  // namespace coaat
