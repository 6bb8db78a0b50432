#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ecoforge::netlogo {

// Lowercase, runs of non-alphanumerics become one hyphen ("Kudzu Bug" -> "kudzu-bug").
std::string slugify(std::string_view label);

// English plural for a slug ("kudzu-bug" -> "kudzu-bugs", "grass" -> "grasses").
std::string pluralize(std::string_view singular);

bool is_primitive(std::string_view word);

struct Problem {
    int line;
    std::string message;
};

// Checks a code tab against the NetLogo subset the emitter produces: balanced
// brackets and parentheses, top-level declarations, non-nested to/end blocks,
// and every word either a number, a primitive, or a name declared in the file
// (globals, breeds and their derived primitives, turtles-own, procedures, lets).
std::vector<Problem> check_source(std::string_view source);

} // namespace ecoforge::netlogo
