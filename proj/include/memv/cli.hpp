#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace memv {

/**
 * One resolved invocation. cli_main fills it from flags and the optional
 * config file (flags win); run() enforces the cross-field rules: exactly
 * one error-covariance source and exactly one sigma0 form where the
 * command needs them, and distinct column selectors.
 */
struct RunConfig {
  std::string command;  // test | sweep | simulate | suggest
  std::string input;
  std::string response;
  std::vector<std::string> covariates;

  // Error-covariance sources. s_matrix_path names a file with m lines of m
  // comma-separated values; s_stddevs builds diag(tau_1^2, ..., tau_m^2);
  // kappa_grid_spec ("lo:step:hi" or a comma list, empty for the default
  // grid) drives the sweep command.
  std::string s_matrix_path;
  std::vector<double> s_stddevs;
  std::string kappa_grid_spec;

  std::optional<double> sigma0;      // hypothesized variance, absolute
  std::optional<double> sigma0_rel;  // as a fraction of the response std
  std::optional<double> z_alpha;     // default 3 when neither is given
  std::optional<double> alpha;       // converted via z = Phi^-1(1 - alpha)

  std::string out;  // report path (test/suggest), base path (sweep),
                    // directory (simulate)
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency

  // simulate grid overrides; an empty list keeps the default grid value.
  std::vector<int> sizes;
  std::vector<double> x_error_factors;
  std::vector<double> y_error_factors;
  std::vector<double> pa_levels;
  std::vector<double> f_factors;
  int replications = 30;
  std::vector<double> c_true;  // exactly two entries when given
  double x3_coeff = 1.0;
};

// Executes one command and writes its artifacts. Throws usage_error,
// data_error, or degeneracy_error; never encodes the test decision in the
// outcome.
void run(const RunConfig& cfg);

// Parses argv plus any config file, executes, and maps errors to exit
// codes: 0 success, 2 usage error, 3 data error, 4 numerical degeneracy.
int cli_main(int argc, char** argv);

}  // namespace memv
