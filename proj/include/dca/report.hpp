#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace dca {

struct CycleRecord {
  int cycle = 0;
  double value = 0.0;
  double wall_seconds = 0.0;
};

/// Per-cycle trace of a fit. `quantity` names what `value` holds: "bound"
/// for variational lower bounds, "loglik_estimate" for sampler estimates,
/// "loglik" for exact NMF likelihoods.
struct FitReport {
  std::string quantity;
  std::vector<CycleRecord> cycles;
  bool converged = false;
  /// Value re-evaluated with the final parameters, when the engine has one.
  double final_value = std::numeric_limits<double>::quiet_NaN();
};

/// Tab-separated "cycle<TAB>value<TAB>wall_seconds" rows under a one-line
/// header; a trailing "# final<TAB>value" line when final_value is set.
void write_report(const FitReport& report, std::ostream& out);

}  // namespace dca
