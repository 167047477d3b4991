#pragma once

#include <string>
#include <vector>

namespace histlda {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Parses the whole string (surrounding blanks allowed) as a finite double.
bool parse_double(const std::string& text, double& out);

std::vector<std::string> split(const std::string& text, char sep);

}  // namespace histlda
