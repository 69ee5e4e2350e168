#include "dca/report.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace dca {

void write_report(const FitReport& report, std::ostream& out) {
  out << std::setprecision(17);
  out << "cycle\t" << (report.quantity.empty() ? "value" : report.quantity) << "\twall_seconds\n";
  for (const auto& r : report.cycles) out << r.cycle << '\t' << r.value << '\t' << r.wall_seconds << '\n';
  if (!std::isnan(report.final_value)) out << "# final\t" << report.final_value << '\n';
}

}  // namespace dca
