#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "uqforge/domain.hpp"
#include "uqforge/mc_forward.hpp"

namespace uqforge {

// Paired sample matrices for variance-based sensitivity analysis: A and B are
// independent prior draws; AB[i] is A with column i taken from B, BA[i] the
// mirror image. f* hold the scalar QoI over each matrix's rows.
struct SensitivityDesign {
  Matrix A;
  Matrix B;
  std::vector<Matrix> AB;
  std::vector<Matrix> BA;
  Vector fA;
  Vector fB;
  std::vector<Vector> fAB;
  std::vector<Vector> fBA;

  long n_samples() const { return A.rows(); }
  int n_params() const { return static_cast<int>(A.cols()); }

  // First n rows only; used for convergence sweeps.
  SensitivityDesign head(long n) const;
};

enum class FirstOrderMethod { Sobol1990, Saltelli2010, Jansen1999 };
enum class TotalEffectMethod { Homma1996, Sobol2007, Jansen1999 };

const char* method_name(FirstOrderMethod m);
const char* method_name(TotalEffectMethod m);

SensitivityDesign build_design(const std::vector<PriorSpec>& priors, long n_samples, const QoiMap& qoi,
                               RngStream& rng);

// f0 = mean(fA); V = unbiased sample variance of fA.
std::pair<double, double> estimate_f0_and_V(const SensitivityDesign& design);

struct IndexEstimate {
  double raw = 0.0;      // estimator value, may fall slightly outside [0, 1]
  double clamped = 0.0;  // presentation view, clipped to [0, 1]
  bool degenerate = false;  // set when V = 0
};

IndexEstimate first_order(FirstOrderMethod method, const SensitivityDesign& design, int i);
IndexEstimate total_effect(TotalEffectMethod method, const SensitivityDesign& design, int i);

// The 2n+2 text files: qoi_samplesA/B plus per-parameter column-swap files;
// each row is the parameter columns followed by the QoI value.
std::vector<std::filesystem::path> write_gsa_files(const SensitivityDesign& design,
                                                   const std::filesystem::path& directory,
                                                   const std::vector<std::string>& parameter_names);

}  // namespace uqforge
