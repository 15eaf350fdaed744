#pragma once

#include <stdexcept>
#include <string>

namespace pzb {

enum class errc {
  non_positive_alpha1,
  invalid_params,
  zero_gain,
  factorization_failure,
  eigensolver_failure,
  branch_imbalance,
  ambiguous_match,
  unlabeled_spectrum,
  scheme_mismatch,
  file_format,
  singular_system,
  non_positive_energy,
  degenerate_window,
  no_plateau,
  insufficient_levels,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::non_positive_alpha1: return "NonPositiveAlpha1";
    case errc::invalid_params: return "InvalidParams";
    case errc::zero_gain: return "ZeroGain";
    case errc::factorization_failure: return "FactorizationFailure";
    case errc::eigensolver_failure: return "EigensolverFailure";
    case errc::branch_imbalance: return "BranchImbalance";
    case errc::ambiguous_match: return "AmbiguousMatch";
    case errc::unlabeled_spectrum: return "UnlabeledSpectrum";
    case errc::scheme_mismatch: return "SchemeMismatch";
    case errc::file_format: return "FileFormat";
    case errc::singular_system: return "SingularSystem";
    case errc::non_positive_energy: return "NonPositiveEnergy";
    case errc::degenerate_window: return "DegenerateWindow";
    case errc::no_plateau: return "NoPlateau";
    case errc::insufficient_levels: return "InsufficientLevels";
  }
  return "Unknown";
}

// config-type errors map to exit code 1 in the CLI, the rest to 2
inline bool is_config_error(errc c) {
  return c == errc::non_positive_alpha1 || c == errc::invalid_params || c == errc::zero_gain ||
         c == errc::file_format || c == errc::insufficient_levels || c == errc::scheme_mismatch;
}

struct error : std::runtime_error {
  errc code;
  error(errc c, const std::string& what) : std::runtime_error(std::string(errc_name(c)) + ": " + what), code(c) {}
};

}  // namespace pzb
