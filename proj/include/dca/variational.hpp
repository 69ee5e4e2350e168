#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dca/corpus.hpp"
#include "dca/model.hpp"
#include "dca/report.hpp"

namespace dca {

/// Per-document variational parameters: Gamma(a_k, b_k) surrogates for the
/// GP scores, Dirichlet(a) for the DM proportions (b is empty for DM).
struct VariationalState {
  Vector a;
  Vector b;
  double bound = std::numeric_limits<double>::quiet_NaN();
};

struct EStepResult {
  VariationalState state;
  /// w_j n_{j,k} for each observed entry (rows follow the document entries).
  Matrix contrib;
  double bound = 0.0;
};

/// Uniform start for one document: a_k = (sum alpha + L) / K, b_k = 1 + beta_k
/// for GP, a_k = 0.5 for DM.
VariationalState initial_state(const Document& doc, const ModelParams& params);

/// One rewrite of the responsibilities and a (b fixed at 1 + beta) for a
/// GP document. The returned bound and contributions use responsibilities
/// recomputed from the updated a.
EStepResult e_step_gp(const Document& doc, const ModelParams& params, const VariationalState& state);
/// DM counterpart; E[ln m_k] = digamma(a_k) - digamma(sum a).
EStepResult e_step_dm(const Document& doc, const ModelParams& params, const VariationalState& state);
/// Dispatches on params.family (CGP is not supported).
EStepResult e_step(const Document& doc, const ModelParams& params, const VariationalState& state);

/// Lower bound on log p(w | theta, alpha, beta, GP) for the given a, with the
/// responsibilities at their optimum for that a.
double bound_gp(const Document& doc, const ModelParams& params, const VariationalState& state);
double bound_dm(const Document& doc, const ModelParams& params, const VariationalState& state);
double variational_bound(const Document& doc, const ModelParams& params, const VariationalState& state);

/// theta_{j,k} proportional to totals_{j,k} + gamma_j, normalized per column
/// (per group when given).
Matrix m_step(const Matrix& totals, const Vector& gamma, const std::optional<GroupSpec>& groups = std::nullopt);

/// Posterior mean scores under the surrogate: a/b (GP) or a / sum a (DM).
Vector variational_scores(const VariationalState& state, Family family);

struct VariationalConfig {
  int max_cycles = 200;
  /// Stop once |bound_t - bound_{t-1}| < tol * |bound_{t-1}|.
  double tol = 1e-6;
  int threads = 1;
  /// When set, per-document a vectors are written here after every cycle.
  std::string checkpoint_path;
};

struct VariationalFit {
  ModelParams params;
  std::vector<VariationalState> states;
  FitReport report;
  /// sum_i w_{j,(i)} n_{j,k,(i)} from the last cycle.
  Matrix suffstats;
  /// Per cycle: total bound + sum_{j,k} gamma_j ln theta_{j,k}, with the theta
  /// used in that cycle. The M-step maximizes this, so it never decreases.
  std::vector<double> objective;
};

/// Alternates document E-steps with the theta M-step. `states`, when
/// nonempty, resumes from stored a vectors instead of the uniform start.
VariationalFit fit_variational(const Corpus& corpus, const ModelParams& init, const VariationalConfig& config,
                               std::vector<VariationalState> states = {});

// One line per document: "a_1 ... a_K[<TAB>b_1 ... b_K]".
void write_states(const std::vector<VariationalState>& states, std::ostream& out);
std::vector<VariationalState> read_states(std::istream& in, int num_components, const std::string& name = "<stream>");
void save_states(const std::vector<VariationalState>& states, const std::string& path);
std::vector<VariationalState> load_states(const std::string& path, int num_components);

}  // namespace dca
