#pragma once

#include "fbarcirc/htm.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fbarcirc {

/// Touchstone v1 harmonic-0 block: `# Hz S RI R <z0>` followed by one line
/// per frequency holding S11 S12 ... SPP as (Re, Im) pairs, row-major,
/// values to 9 significant digits. `comments` become `!` lines. All ports
/// must share one reference impedance.
void write_touchstone(std::ostream& out, const SParamGrid& grid, const std::vector<std::string>& comments = {});

/// Reads the harmonic-0 block written by write_touchstone.
SParamGrid read_touchstone(std::istream& in, int ports);

/// Every mixing product as rows `f_Hz,n,q,p,ReS,ImS`; `comments` become
/// `#` lines above the column header.
void write_harmonic_csv(std::ostream& out, const SParamGrid& grid, const std::vector<std::string>& comments = {});

}  // namespace fbarcirc
