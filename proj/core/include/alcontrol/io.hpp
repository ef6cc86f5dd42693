#pragma once

/**
 * @file io.hpp
 * @brief CSV serialization of paths, trajectories, costates and homotopy fields.
 *
 * Every file starts with a header row. Breakpoint times appear twice, in the
 * same order as in memory.
 */

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "alcontrol/paths.hpp"
#include "alcontrol/pmp.hpp"

namespace alc {

class CsvError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// t, x_1..x_n, a_1..a_m
void write_epath_csv(std::ostream & os, const EPath & p);
/// t, x_1..x_n, a_1..a_m, u_1..u_p
void write_trajectory_csv(std::ostream & os, const Trajectory & traj);
/// t, z_1..z_m, z0, H; `h` may be empty
void write_costate_csv(std::ostream & os, const CostatePath & c, const std::vector<double> & h = {});
/// t, eps, x_1..x_n, a_1..a_m, b_1..b_m
void write_homotopy_csv(std::ostream & os, const HomotopyField & h);

/// Grid step is recovered as the largest node spacing.
Trajectory read_trajectory_csv(std::istream & is);
CostatePath read_costate_csv(std::istream & is);

void write_file(const std::string & path, const std::string & content);
std::string read_file(const std::string & path);

}  // namespace alc
