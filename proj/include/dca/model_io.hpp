#pragma once

#include <iosfwd>
#include <string>

#include "dca/model.hpp"

namespace dca {

// JSON model document:
//   {"format": "dca-model", "version": 1, "family": "gp"|"cgp"|"dm",
//    "K": int, "J": int, "alpha": [K], "beta": [K] (gp, cgp), "rho": [K] (cgp),
//    "gamma": [J], "theta": [[K] x J] (row-major, one row per word),
//    "groups": null | [J] (1-based group id per word, 0 = ungrouped)}
// Extra keys (e.g. "seed", "algorithm") are preserved on read as metadata.
// Doubles are written with 17 significant digits.

inline constexpr int kModelFormatVersion = 1;

void write_model(const ModelParams& params, std::ostream& out, const std::string& metadata_json = "{}");
ModelParams read_model(std::istream& in, const std::string& name = "<stream>");

void save_model(const ModelParams& params, const std::string& path, const std::string& metadata_json = "{}");
ModelParams load_model(const std::string& path);

}  // namespace dca
