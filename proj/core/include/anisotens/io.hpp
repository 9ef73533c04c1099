#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "anisotens/classifier.hpp"
#include "anisotens/maxent.hpp"
#include "anisotens/point_groups.hpp"
#include "anisotens/sym_tensor.hpp"
#include "anisotens/traceless_bases.hpp"

namespace anisotens::io {

using tensors::TensorD;

// --- JSON forms -----------------------------------------------------------
// All emitters format floating point with 17 significant digits and sorted
// object keys, so equal inputs produce byte-identical output.

std::string tensor_to_json(const TensorD& t, int indent = 0);
TensorD tensor_from_json_string(const std::string& text);

std::string rotation_to_json(const so3::Rotation& r);

std::string tensor_space_to_json(const bases::TensorSpace& s);
std::string invariant_space_to_json(const groups::InvariantSpace& s);
std::string invariant_check_to_json(const groups::InvariantSpace& analytic,
                                    const groups::InvariantSpace& numeric,
                                    double principal_angle);

maxent::MomentTargets targets_from_json_file(const std::filesystem::path& path);
std::string solution_to_json(const maxent::MaxEntSolution& sol);
maxent::MaxEntSolution solution_from_json_file(const std::filesystem::path& path);

classifier::OrderParameterSet params_from_json_file(const std::filesystem::path& path);
std::string report_to_json(const classifier::SymmetryReport& report,
                           const classifier::BreakingGraph* graph = nullptr);
std::string report_to_text(const classifier::SymmetryReport& report);
std::string graph_to_json(const classifier::BreakingGraph& graph);

// --- orientation samples ---------------------------------------------------

enum class SampleFormat { Quaternion, Matrix, Euler };
SampleFormat sample_format_from_string(const std::string& name);

struct OrientationSample {
  std::vector<so3::Rotation> rotations;
  std::vector<double> weights;  // normalized to sum 1
  std::size_t size() const { return rotations.size(); }
};

/// Reads a sample file: a JSON array of records, an object with
/// "rotations" (+ optional "weights"), or one JSON record per line.
/// Parse and validation errors carry the record index or line number.
OrientationSample ingest(const std::filesystem::path& path, SampleFormat format);
OrientationSample ingest_stream(std::istream& in, SampleFormat format,
                                const std::string& stream_name = "<stream>");

std::string sample_to_json(const std::vector<so3::Rotation>& rotations, SampleFormat format);

// --- empirical moments ------------------------------------------------------

struct MomentEstimate {
  std::map<classifier::OrderParam, TensorD> values;
  std::map<classifier::OrderParam, TensorD> standard_errors;  // per component
  std::size_t count = 0;
  /// Sum over tensors and components of multiplicity * SE^2; the squared
  /// noise scale of the whole estimate in the tensor dot metric.
  double noise_norm2() const;
};

MomentEstimate estimate_moments(const OrientationSample& sample,
                                const std::vector<classifier::OrderParam>& selection,
                                int threads = 1);

std::vector<classifier::OrderParam> parse_selection(const std::string& comma_list);

/// Rejection sampling against the uniform proposal; bound taken from the
/// solution grid with a 1.1 safety factor. Deterministic for fixed seed.
std::vector<so3::Rotation> sample_density(const maxent::MaxEntSolution& sol, std::size_t count,
                                          std::uint64_t seed);

// --- pipeline ----------------------------------------------------------------

struct PipelineOptions {
  std::string tensors_arg;   // params file path, or comma list of kinds with --samples
  std::string samples_path;  // empty: tensors_arg is a params file
  SampleFormat sample_format = SampleFormat::Quaternion;
  std::string molecule;      // optional molecular group label
  double tol = 0.0;          // 0: relative 1e-8 for files, noise-scaled for samples
  bool graph = false;
  std::string out_path;      // empty: stdout
  std::string format = "json";
  int threads = 1;
};

/// ingest -> moments -> detection -> report. Returns 0 on success, 2 when
/// no group passes the tolerance, 1 on input errors (message on err).
int run_classify(const PipelineOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace anisotens::io
