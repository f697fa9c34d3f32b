#pragma once

#include "tclfit/calibrate.hpp"
#include "tclfit/coeff_models.hpp"
#include "tclfit/generator.hpp"
#include "tclfit/operators.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace tclfit {

inline constexpr int kDatasetVersion = 1;
inline constexpr int kModelVersion = 1;

/// ρ = ½(I + a·σ). Unfiltered: shot noise can push it out of the PSD cone.
DensityMatrix linear_inversion(const Eigen::Vector3d& expectations);

/// Ingestion filter: Hermitian, unit-trace, PSD (to 1e-12) input passes through
/// unchanged; anything else goes through spectral_filter. Keeps save/load byte-stable.
DensityMatrix ingest_state(const CMatrix& raw);

struct SynthProtocol {
  int n_experiments = 8;
  double p_max_mhz = 3.47;
  double duration_us = 50.0;
  double sample_dt_us = 0.004;
  double dt_us = 0.004;  // integration step; sample_dt_us must be a multiple
  int shots = 0;         // 0: noiseless
  std::uint64_t seed = 0;
  std::optional<double> rot_frequency_ghz;  // default: resonant with the system

  void validate() const;
};

/// Square pulses p ~ U(0, p_max), q = 0, from |0⟩⟨0|. With shots, each Pauli axis is
/// estimated from `shots` binomial draws, inverted and filtered.
Dataset generate_synthetic(const CoefficientSource& truth, const SystemConfig& cfg, const SynthProtocol& protocol);

/// Binomial estimate of ⟨σ⟩ from `shots` ideal projective measurements.
double sample_expectation(double exact, int shots, std::mt19937_64& rng);

/// Versioned JSON documents. Unknown keys and missing fields raise ParseError naming
/// the key path; expectation values outside [−1, 1] raise ValidationError; another
/// version raises MigrationError.
Dataset parse_dataset(const std::string& text);
std::string dump_dataset(const Dataset& data);
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& data, const std::string& path);

std::string dump_model(const CoefficientModel& model);
CoefficientModel parse_model(const std::string& text);

/// Model plus fit diagnostics and metrics.
std::string dump_result(const FitResult& result);
FitResult parse_result(const std::string& text);
FitResult load_result(const std::string& path);
void save_result(const FitResult& result, const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace tclfit
