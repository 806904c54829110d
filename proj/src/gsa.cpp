#include "uqforge/gsa.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

namespace uqforge {

namespace {

Vector evaluate_rows(const Matrix& samples, const QoiMap& qoi) {
  Vector f(samples.rows());
  for (long k = 0; k < samples.rows(); ++k) {
    const Vector q = qoi.eval(samples.row(k).transpose());
    if (q.size() != 1 || !q.allFinite()) {
      throw QoiEvalError("gsa: QoI evaluation is non-finite or non-scalar", k);
    }
    f[k] = q[0];
  }
  return f;
}

void append_value(std::string& line, double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  line.append(buf, res.ptr);
}

void write_sample_file(const std::filesystem::path& path, const Matrix& samples, const Vector& f) {
  std::ofstream os(path);
  if (!os) throw IoError("gsa: cannot open " + path.string() + " for writing");
  std::string line;
  for (long k = 0; k < samples.rows(); ++k) {
    line.clear();
    for (long j = 0; j < samples.cols(); ++j) {
      append_value(line, samples(k, j));
      line.push_back(' ');
    }
    append_value(line, f[k]);
    line.push_back('\n');
    os << line;
  }
  if (!os) throw IoError("gsa: write failed for " + path.string());
}

}  // namespace

SensitivityDesign SensitivityDesign::head(long n) const {
  if (n < 2 || n > n_samples()) throw DimensionError("design head: invalid row count");
  SensitivityDesign h;
  h.A = A.topRows(n);
  h.B = B.topRows(n);
  h.fA = fA.head(n);
  h.fB = fB.head(n);
  for (std::size_t i = 0; i < AB.size(); ++i) {
    h.AB.push_back(AB[i].topRows(n));
    h.BA.push_back(BA[i].topRows(n));
    h.fAB.push_back(fAB[i].head(n));
    h.fBA.push_back(fBA[i].head(n));
  }
  return h;
}

const char* method_name(FirstOrderMethod m) {
  switch (m) {
    case FirstOrderMethod::Sobol1990: return "sobol1990";
    case FirstOrderMethod::Saltelli2010: return "saltelli2010";
    case FirstOrderMethod::Jansen1999: return "jansen1999";
  }
  return "?";
}

const char* method_name(TotalEffectMethod m) {
  switch (m) {
    case TotalEffectMethod::Homma1996: return "homma1996";
    case TotalEffectMethod::Sobol2007: return "sobol2007";
    case TotalEffectMethod::Jansen1999: return "jansen1999";
  }
  return "?";
}

SensitivityDesign build_design(const std::vector<PriorSpec>& priors, long n_samples, const QoiMap& qoi,
                               RngStream& rng) {
  if (priors.empty()) throw DimensionError("gsa: need at least one parameter prior");
  if (n_samples < 2) throw InsufficientDataError("gsa: need at least 2 samples");
  if (qoi.output_dim != 1) throw DimensionError("gsa: QoI must be scalar");
  int n_params = 0;
  for (const auto& p : priors) n_params += p.dim();
  if (qoi.input_dim != n_params) throw DimensionError("gsa: QoI input dimension mismatch");

  SensitivityDesign design;
  design.A.resize(n_samples, n_params);
  design.B.resize(n_samples, n_params);
  for (long k = 0; k < n_samples; ++k) {
    int offset = 0;
    for (const auto& p : priors) {
      design.A.row(k).segment(offset, p.dim()) = p.realize(rng).transpose();
      offset += p.dim();
    }
    offset = 0;
    for (const auto& p : priors) {
      design.B.row(k).segment(offset, p.dim()) = p.realize(rng).transpose();
      offset += p.dim();
    }
  }
  design.fA = evaluate_rows(design.A, qoi);
  design.fB = evaluate_rows(design.B, qoi);
  for (int i = 0; i < n_params; ++i) {
    Matrix ab = design.A;
    ab.col(i) = design.B.col(i);
    Matrix ba = design.B;
    ba.col(i) = design.A.col(i);
    design.fAB.push_back(evaluate_rows(ab, qoi));
    design.fBA.push_back(evaluate_rows(ba, qoi));
    design.AB.push_back(std::move(ab));
    design.BA.push_back(std::move(ba));
  }
  return design;
}

std::pair<double, double> estimate_f0_and_V(const SensitivityDesign& design) {
  const long n = design.n_samples();
  const double f0 = design.fA.mean();
  const double v = (design.fA.array() - f0).square().sum() / static_cast<double>(n - 1);
  return {f0, v};
}

// The estimators run on mean-centered QoI values g = f - f0. Centering does
// not change any estimator's expectation (the f0^2 terms vanish with it) but
// removes an O(f0 * sigma) noise component from the Sobol/Saltelli/Homma
// product forms; the Jansen squared-difference forms are unaffected either
// way.
IndexEstimate first_order(FirstOrderMethod method, const SensitivityDesign& design, int i) {
  const long n = design.n_samples();
  const auto [f0, v] = estimate_f0_and_V(design);
  IndexEstimate est;
  if (v <= 0.0) {
    est.degenerate = true;
    return est;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const Vector gA = design.fA.array() - f0;
  const Vector gB = design.fB.array() - f0;
  double numerator = 0.0;
  switch (method) {
    case FirstOrderMethod::Sobol1990: {
      const Vector gBA = design.fBA[i].array() - f0;
      numerator = inv_n * gA.dot(gBA);
      break;
    }
    case FirstOrderMethod::Saltelli2010: {
      const Vector gAB = design.fAB[i].array() - f0;
      numerator = inv_n * gB.dot(gAB - gA);
      break;
    }
    case FirstOrderMethod::Jansen1999:
      numerator = v - 0.5 * inv_n * (design.fB - design.fAB[i]).squaredNorm();
      break;
  }
  est.raw = numerator / v;
  est.clamped = std::clamp(est.raw, 0.0, 1.0);
  return est;
}

IndexEstimate total_effect(TotalEffectMethod method, const SensitivityDesign& design, int i) {
  const long n = design.n_samples();
  const auto [f0, v] = estimate_f0_and_V(design);
  IndexEstimate est;
  if (v <= 0.0) {
    est.degenerate = true;
    return est;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const Vector gA = design.fA.array() - f0;
  double numerator = 0.0;
  switch (method) {
    case TotalEffectMethod::Homma1996: {
      const Vector gAB = design.fAB[i].array() - f0;
      numerator = v - inv_n * gA.dot(gAB);
      break;
    }
    case TotalEffectMethod::Sobol2007: {
      const Vector gAB = design.fAB[i].array() - f0;
      numerator = inv_n * gA.dot(gA - gAB);
      break;
    }
    case TotalEffectMethod::Jansen1999:
      numerator = 0.5 * inv_n * (design.fA - design.fAB[i]).squaredNorm();
      break;
  }
  est.raw = numerator / v;
  est.clamped = std::clamp(est.raw, 0.0, 1.0);
  return est;
}

std::vector<std::filesystem::path> write_gsa_files(const SensitivityDesign& design,
                                                   const std::filesystem::path& directory,
                                                   const std::vector<std::string>& parameter_names) {
  if (static_cast<int>(parameter_names.size()) != design.n_params()) {
    throw DimensionError("gsa: one name per parameter required");
  }
  std::filesystem::create_directories(directory);
  std::vector<std::filesystem::path> written;
  const auto emit = [&](const std::string& file, const Matrix& m, const Vector& f) {
    const std::filesystem::path path = directory / file;
    write_sample_file(path, m, f);
    written.push_back(path);
  };
  emit("qoi_samplesA.txt", design.A, design.fA);
  emit("qoi_samplesB.txt", design.B, design.fB);
  for (int i = 0; i < design.n_params(); ++i) {
    emit(parameter_names[i] + "_qoi_samplesAi.txt", design.AB[i], design.fAB[i]);
    emit(parameter_names[i] + "_qoi_samplesBi.txt", design.BA[i], design.fBA[i]);
  }
  return written;
}

}  // namespace uqforge
