#pragma once

// Static SVG figures of transmission and tunneling scans.

#include <string>
#include <vector>

#include "tunnelsim/analysis.hpp"

namespace tunnelsim {

struct PlotProvenance {
  std::string source;     // input table path
  std::string spec_hash;  // optional
};

/// Figure 3: T against sigma_b / sigma_c for each a_s, with the exponential fit of the a_s = 0 GPE series.
/// Figure 4: T_GPE over (V0/E, a_s) as a cell map plus cross sections at V0/E = 0.9, 1.0, 1.1.
/// Figure 5: six panels, T (top row) and Delta T (bottom row) against width for three a_s.
/// Figure 6: T against V0/E at a_s = 0 with tanh fits of both solvers.
/// BVE series carry 3 stderr error bars. Throws SchemaError when the table lacks the needed series.
std::string render_figure(int figure, const std::vector<TransmissionResult>& rows,
                          double sigma_c_ref, const PlotProvenance& provenance);

}  // namespace tunnelsim
