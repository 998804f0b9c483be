#pragma once

#include "cier/series.hpp"

#include <iosfwd>
#include <vector>

namespace cier::series {

// Episode-log CSV: header `episode,step,reward,done,a0..a{d-1},s0..s{m-1}`,
// one row per transition. next_state is not stored; on read it is taken
// from the following row of the same episode (the last row repeats its own
// state).

void write_episode_log(std::ostream& out, const std::vector<Transition>& log);
std::vector<Transition> read_episode_log(std::istream& in);

}  // namespace cier::series
