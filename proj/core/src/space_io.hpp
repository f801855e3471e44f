#pragma once

#include <iosfwd>

#include "carol/task.hpp"

namespace carol::bin {

void write_space(std::ostream& out, const SpaceSpec& space);
SpaceSpec read_space(std::istream& in);

}  // namespace carol::bin
