#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ghosttrack/synthworld.hpp"

namespace ghosttrack::scenarios {

/// One walker crossing behind a wall, fully hidden for exactly 10 frames, noiseless.
Scenario single_walker_occlusion();

/// Five walkers, three occluders, 2 px detector noise, 300 frames; layout drawn from seed.
Scenario benchmark(std::uint64_t seed);

/// Same world as benchmark(seed) seen from a camera panning back and forth.
Scenario panning(std::uint64_t seed);

/// Walkers with purely lateral motion (linear image trajectories) and GT-quality detector.
Scenario linear_walkers(std::uint64_t seed);

/// Small end-to-end demo (short, low resolution).
Scenario demo();

/// Names accepted by by_name.
std::vector<std::string> names();
/// "demo", "single", "benchmark:<seed>", "panning:<seed>", "linear:<seed>".
Scenario by_name(const std::string& name);

}  // namespace ghosttrack::scenarios
