#pragma once

#include <iosfwd>
#include <string>

#include "revlab/pomdp.hpp"

namespace revlab {

inline constexpr int kPomdpFormatVersion = 1;

// Line-oriented text format, see README. Numbers are written in shortest
// round-trip form, so save(load(x)) reproduces x byte for byte.
void save_pomdp(std::ostream& out, const TabularPOMDP& m);
TabularPOMDP load_pomdp(std::istream& in);

std::string pomdp_to_string(const TabularPOMDP& m);
TabularPOMDP pomdp_from_string(const std::string& text);

void save_pomdp_file(const std::string& path, const TabularPOMDP& m);
TabularPOMDP load_pomdp_file(const std::string& path);

// Shortest decimal that parses back to exactly x.
std::string format_double(double x);
double parse_double(const std::string& token);

}  // namespace revlab
