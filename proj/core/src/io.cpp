#include "anisotens/io.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

namespace anisotens::io {

using classifier::OrderParam;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Deterministic JSON dump: sorted keys (std::map backed objects) and %.17g
// floating point.
// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void dump_value(const json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        if (indent > 0) out += pad_in;
        out += json(it.key()).dump();
        out += indent > 0 ? ": " : ":";
        dump_value(it.value(), out, indent, depth + 1);
      }
      out += nl;
      if (indent > 0) out += pad;
      out += "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      bool first = true;
      for (const auto& v : j) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        if (indent > 0) out += pad_in;
        dump_value(v, out, indent, depth + 1);
      }
      out += nl;
      if (indent > 0) out += pad;
      out += "]";
      return;
    }
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

std::string dump(const json& j, int indent = 2) {
  std::string out;
  dump_value(j, out, indent, 0);
  if (indent > 0) out += "\n";
  return out;
}

json tensor_json(const TensorD& t) {
  json comps = json::object();
  for (int i = 0; i < t.size(); ++i) {
    if (t[i] == 0.0) continue;
    const auto m = tensors::multiset_at(t.order(), i);
    comps[std::to_string(m.k1) + "," + std::to_string(m.k2) + "," + std::to_string(m.k3)] = t[i];
  }
  return json{{"order", t.order()}, {"comps", comps}};
}

TensorD tensor_from(const json& j) {
  if (!j.is_object() || !j.contains("order"))
    throw std::invalid_argument("tensor JSON must be an object with an 'order' field");
  TensorD t(j.at("order").get<int>());
  if (j.contains("comps")) {
    for (const auto& [key, value] : j.at("comps").items()) {
      int k1, k2, k3;
      if (std::sscanf(key.c_str(), "%d,%d,%d", &k1, &k2, &k3) != 3)
        throw std::invalid_argument("bad tensor component key: " + key);
      if (k1 < 0 || k2 < 0 || k3 < 0 || k1 + k2 + k3 != t.order())
        throw std::invalid_argument("tensor component key outside order " +
                                    std::to_string(t.order()) + ": " + key);
      t.at(k1, k2, k3) = value.get<double>();
    }
  }
  return t;
}

json rotation_json(const so3::Rotation& r) {
  json a = json::array();
  for (double v : r.data()) a.push_back(v);
  return a;
}

so3::Rotation rotation_from(const json& j) {
  if (!j.is_array() || j.size() != 9)
    throw std::invalid_argument("rotation JSON must be a 9-entry row-major array");
  std::array<double, 9> m{};
  for (int i = 0; i < 9; ++i) m[static_cast<std::size_t>(i)] = j[static_cast<std::size_t>(i)].get<double>();
  return so3::Rotation::from_array(m);
}

json space_json(const bases::TensorSpace& s) {
  json basis = json::array();
  for (const auto& b : s.basis) basis.push_back(tensor_json(b));
  return json{{"order", s.order}, {"label", s.label}, {"dimension", s.dimension()}, {"basis", basis}};
}

}  // namespace

std::string tensor_to_json(const TensorD& t, int indent) { return dump(tensor_json(t), indent); }

TensorD tensor_from_json_string(const std::string& text) { return tensor_from(json::parse(text)); }

std::string rotation_to_json(const so3::Rotation& r) { return dump(rotation_json(r), 0); }

std::string tensor_space_to_json(const bases::TensorSpace& s) { return dump(space_json(s)); }

std::string invariant_space_to_json(const groups::InvariantSpace& s) {
  json j = space_json(s.space);
  j["group"] = s.group;
  return dump(j);
}

std::string invariant_check_to_json(const groups::InvariantSpace& analytic,
                                    const groups::InvariantSpace& numeric,
                                    double principal_angle) {
  json j;
  j["group"] = analytic.group;
  j["order"] = analytic.order;
  j["analytic_dimension"] = analytic.dimension();
  j["numeric_dimension"] = numeric.dimension();
  j["max_principal_angle"] = principal_angle;
  j["agree"] = analytic.dimension() == numeric.dimension() && principal_angle < 1e-8;
  return dump(j);
}

maxent::MomentTargets targets_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open targets file: " + path.string());
  json j = json::parse(in);
  if (!j.is_array()) throw std::invalid_argument("targets file must hold a JSON array");
  maxent::MomentTargets targets;
  for (const auto& entry : j) {
    maxent::MomentTarget t;
    t.target = tensor_from(entry.at("tensor"));
    if (entry.contains("base")) {
      t.base = tensor_from(entry.at("base"));
    } else if (entry.contains("kind")) {
      t.base = classifier::base_tensor(classifier::order_param_from_string(entry.at("kind")));
    } else {
      const int n = entry.contains("order") ? entry.at("order").get<int>() : t.target.order();
      t.base = tensors::to_double(bases::monomial_traceless(n, 0, 0));
    }
    if (entry.contains("order") && entry.at("order").get<int>() != t.target.order())
      throw std::invalid_argument("targets file: 'order' disagrees with the tensor order");
    targets.entries.push_back(std::move(t));
  }
  targets.validate();
  return targets;
}

std::string solution_to_json(const maxent::MaxEntSolution& sol) {
  json targets = json::array();
  for (const auto& e : sol.targets.entries)
    targets.push_back(json{{"order", e.base.order()},
                           {"base", tensor_json(e.base)},
                           {"tensor", tensor_json(e.target)}});
  json b = json::array();
  for (const auto& row : sol.b) b.push_back(row);
  json residuals = sol.residuals;
  json j{{"b", b},
         {"logZ", sol.log_z},
         {"residuals", residuals},
         {"iterations", sol.iterations},
         {"grad_norm", sol.grad_norm},
         {"grid_spec",
          json{{"max_order", sol.grid.exactness_order}, {"nodes", sol.grid.nodes.size()}}},
         {"targets", targets}};
  return dump(j);
}

maxent::MaxEntSolution solution_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open solution file: " + path.string());
  json j = json::parse(in);
  maxent::MaxEntSolution sol;
  for (const auto& entry : j.at("targets")) {
    maxent::MomentTarget t;
    t.base = tensor_from(entry.at("base"));
    t.target = tensor_from(entry.at("tensor"));
    sol.targets.entries.push_back(std::move(t));
  }
  for (const auto& row : j.at("b")) sol.b.push_back(row.get<std::vector<double>>());
  sol.log_z = j.at("logZ").get<double>();
  if (j.contains("residuals")) sol.residuals = j.at("residuals").get<std::vector<double>>();
  if (j.contains("grid_spec") && j.at("grid_spec").contains("max_order"))
    sol.grid.exactness_order = j.at("grid_spec").at("max_order").get<int>();
  return sol;
}

classifier::OrderParameterSet params_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open tensor file: " + path.string());
  json j = json::parse(in);
  classifier::OrderParameterSet set;
  if (j.contains("molecular_group")) set.molecular_group = j.at("molecular_group").get<std::string>();
  if (!j.contains("tensors") || !j.at("tensors").is_object())
    throw std::invalid_argument("tensor file needs a 'tensors' object keyed by Q1/Q2/M2/T3/Q4");
  for (const auto& [key, value] : j.at("tensors").items()) {
    const OrderParam p = classifier::order_param_from_string(key);
    TensorD t = tensor_from(value);
    if (t.order() != classifier::order_of(p))
      throw std::invalid_argument("tensor " + key + " must have order " +
                                  std::to_string(classifier::order_of(p)));
    if (t.order() >= 2) {
      const TensorD tr = tensors::trace(t);
      const double scale = std::sqrt(std::max(1.0, tensors::norm_squared(t)));
      if (std::sqrt(tensors::norm_squared(tr)) > 1e-10 * scale)
        throw std::invalid_argument("tensor " + key + " is not traceless");
    }
    set.tensors[p] = std::move(t);
  }
  if (set.tensors.empty()) throw std::invalid_argument("tensor file holds no tensors");
  return set;
}

namespace {

json coefficients_json(const classifier::CoefficientVector& c) {
  json j;
  j["frame"] = rotation_json(c.frame);
  for (const auto& [kind, vals] : c.coeffs) j[classifier::to_string(kind)] = vals;
  return j;
}

json graph_json(const classifier::BreakingGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) {
    json node{{"group", n.group},
              {"free_coefficients", n.free_coefficients},
              {"constraints", n.constraints}};
    if (!n.alt_free_coefficients.empty() || !n.alt_constraints.empty()) {
      node["three_fold_frame"] = json{{"free_coefficients", n.alt_free_coefficients},
                                      {"constraints", n.alt_constraints}};
    }
    nodes.push_back(node);
  }
  json edges = json::array();
  for (const auto& e : g.edges)
    edges.push_back(json{{"from", e.from},
                         {"to", e.to},
                         {"freed_coefficients", e.freed_coefficients},
                         {"dropped_constraints", e.dropped_constraints}});
  return json{{"nodes", nodes}, {"edges", edges}};
}

}  // namespace

std::string graph_to_json(const classifier::BreakingGraph& graph) { return dump(graph_json(graph)); }

std::string report_to_json(const classifier::SymmetryReport& report,
                           const classifier::BreakingGraph* graph) {
  json j;
  j["detected"] = report.detected;
  j["frame"] = rotation_json(report.frame);
  j["coefficients"] = coefficients_json(report.coefficients);
  j["distances"] = report.distances;
  j["tol"] =
      json{{"value", report.tolerance.tol}, {"mode", report.tolerance.relative ? "relative" : "absolute"}};
  if (graph) j["graph"] = graph_json(*graph);
  return dump(j);
}

std::string report_to_text(const classifier::SymmetryReport& report) {
  std::ostringstream os;
  os << "detected symmetry: " << report.detected << "\n";
  os << "tolerance: " << format_double(report.tolerance.tol)
     << (report.tolerance.relative ? " (relative)" : " (absolute)") << "\n";
  os << "distances:\n";
  for (const auto& [g, d] : report.distances)
    os << "  " << g << ": " << format_double(d) << "\n";
  os << "frame (rows):\n";
  for (int i = 0; i < 3; ++i) {
    os << " ";
    for (int j = 0; j < 3; ++j) os << " " << format_double(report.frame(i, j));
    os << "\n";
  }
  for (const auto& [kind, vals] : report.coefficients.coeffs) {
    os << classifier::to_string(kind) << " coefficients:";
    const auto& names = classifier::slot_names(kind);
    for (std::size_t i = 0; i < vals.size(); ++i)
      os << " " << names[i] << "=" << format_double(vals[i]);
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Samples
// ---------------------------------------------------------------------------

SampleFormat sample_format_from_string(const std::string& name) {
  if (name == "quat" || name == "quaternion") return SampleFormat::Quaternion;
  if (name == "matrix") return SampleFormat::Matrix;
  if (name == "euler") return SampleFormat::Euler;
  throw std::invalid_argument("unknown sample format: " + name);
}

namespace {

so3::Rotation record_to_rotation(const json& rec, SampleFormat format, std::size_t index) {
  const std::string where = "record " + std::to_string(index);
  try {
    switch (format) {
      case SampleFormat::Quaternion: {
        if (!rec.is_array() || rec.size() != 4)
          throw std::invalid_argument("expected 4 quaternion entries, got " +
                                      std::to_string(rec.is_array() ? rec.size() : 0));
        return so3::rotation_from_quaternion(
            {rec[0].get<double>(), rec[1].get<double>(), rec[2].get<double>(), rec[3].get<double>()});
      }
      case SampleFormat::Matrix: {
        if (!rec.is_array() || rec.size() != 9)
          throw std::invalid_argument("expected 9 matrix entries, got " +
                                      std::to_string(rec.is_array() ? rec.size() : 0));
        return rotation_from(rec);
      }
      case SampleFormat::Euler: {
        if (!rec.is_object())
          throw std::invalid_argument("expected an object with alpha/beta/gamma");
        return so3::rotation_from_euler(so3::EulerAngles(rec.at("alpha").get<double>(),
                                                         rec.at("beta").get<double>(),
                                                         rec.at("gamma").get<double>()));
      }
    }
  } catch (const std::exception& e) {
    throw std::invalid_argument(where + ": " + e.what());
  }
  throw std::logic_error("unreachable");
}

void normalize_weights(OrientationSample& sample) {
  if (sample.weights.empty()) {
    sample.weights.assign(sample.rotations.size(), 1.0 / std::max<std::size_t>(1, sample.rotations.size()));
    return;
  }
  if (sample.weights.size() != sample.rotations.size())
    throw std::invalid_argument("weights and rotations disagree in length");
  double total = 0.0;
  for (double w : sample.weights) {
    if (w < 0) throw std::invalid_argument("weights must be nonnegative");
    total += w;
  }
  if (total <= 0) throw std::invalid_argument("weights sum to zero");
  for (double& w : sample.weights) w /= total;
}

OrientationSample from_container(const json& j, SampleFormat format) {
  OrientationSample sample;
  const json* records = nullptr;
  if (j.is_object() && j.contains("rotations")) {
    records = &j.at("rotations");
    if (j.contains("format")) {
      const SampleFormat file_fmt = sample_format_from_string(j.at("format").get<std::string>());
      if (file_fmt != format)
        throw std::invalid_argument("file declares format '" + j.at("format").get<std::string>() +
                                    "' but a different format was requested");
    }
    if (j.contains("weights")) sample.weights = j.at("weights").get<std::vector<double>>();
  } else if (j.is_array()) {
    records = &j;
  } else if (j.is_object() && format == SampleFormat::Euler) {
    sample.rotations.push_back(record_to_rotation(j, format, 0));
    normalize_weights(sample);
    return sample;
  } else {
    throw std::invalid_argument("sample file must be an array, an object with 'rotations', or "
                                "one record per line");
  }
  // A flat numeric array is a single record, not a list.
  if (records->is_array() && !records->empty() && (*records)[0].is_number()) {
    sample.rotations.push_back(record_to_rotation(*records, format, 0));
  } else {
    std::size_t idx = 0;
    for (const auto& rec : *records) sample.rotations.push_back(record_to_rotation(rec, format, idx++));
  }
  normalize_weights(sample);
  return sample;
}

}  // namespace

OrientationSample ingest_stream(std::istream& in, SampleFormat format,
                                const std::string& stream_name) {
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  // Whole-file JSON first; line-by-line records otherwise.
  try {
    const json j = json::parse(content);
    return from_container(j, format);
  } catch (const json::parse_error&) {
  }
  OrientationSample sample;
  std::istringstream lines(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(stream_name + ":" + std::to_string(line_no) +
                                  ": JSON parse error: " + e.what());
    }
    try {
      sample.rotations.push_back(record_to_rotation(rec, format, sample.rotations.size()));
    } catch (const std::exception& e) {
      throw std::invalid_argument(stream_name + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (sample.rotations.empty())
    throw std::invalid_argument(stream_name + ": no orientation records found");
  normalize_weights(sample);
  return sample;
}

OrientationSample ingest(const std::filesystem::path& path, SampleFormat format) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open sample file: " + path.string());
  return ingest_stream(in, format, path.string());
}

std::string sample_to_json(const std::vector<so3::Rotation>& rotations, SampleFormat format) {
  json records = json::array();
  for (const auto& r : rotations) {
    switch (format) {
      case SampleFormat::Matrix:
        records.push_back(rotation_json(r));
        break;
      case SampleFormat::Euler: {
        const so3::EulerAngles e = so3::euler_from_rotation(r);
        records.push_back(json{{"alpha", e.alpha}, {"beta", e.beta}, {"gamma", e.gamma}});
        break;
      }
      case SampleFormat::Quaternion: {
        // Matrix back to quaternion: standard branch-stable extraction.
        const double t = r(0, 0) + r(1, 1) + r(2, 2);
        double a, b, c, d;
        if (t > 0) {
          const double s = std::sqrt(t + 1.0) * 2;
          a = 0.25 * s;
          b = (r(2, 1) - r(1, 2)) / s;
          c = (r(0, 2) - r(2, 0)) / s;
          d = (r(1, 0) - r(0, 1)) / s;
        } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
          const double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2;
          a = (r(2, 1) - r(1, 2)) / s;
          b = 0.25 * s;
          c = (r(0, 1) + r(1, 0)) / s;
          d = (r(0, 2) + r(2, 0)) / s;
        } else if (r(1, 1) >= r(2, 2)) {
          const double s = std::sqrt(1.0 - r(0, 0) + r(1, 1) - r(2, 2)) * 2;
          a = (r(0, 2) - r(2, 0)) / s;
          b = (r(0, 1) + r(1, 0)) / s;
          c = 0.25 * s;
          d = (r(1, 2) + r(2, 1)) / s;
        } else {
          const double s = std::sqrt(1.0 - r(0, 0) - r(1, 1) + r(2, 2)) * 2;
          a = (r(1, 0) - r(0, 1)) / s;
          b = (r(0, 2) + r(2, 0)) / s;
          c = (r(1, 2) + r(2, 1)) / s;
          d = 0.25 * s;
        }
        const double n = std::sqrt(a * a + b * b + c * c + d * d);
        records.push_back(json::array({a / n, b / n, c / n, d / n}));
        break;
      }
    }
  }
  json j{{"format", format == SampleFormat::Quaternion
                        ? "quat"
                        : (format == SampleFormat::Matrix ? "matrix" : "euler")},
         {"rotations", records}};
  return dump(j);
}

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

double MomentEstimate::noise_norm2() const {
  double s = 0.0;
  for (const auto& [kind, se] : standard_errors) {
    for (int i = 0; i < se.size(); ++i) {
      const auto m = tensors::multiset_at(se.order(), i);
      s += static_cast<double>(tensors::multiplicity(m)) * se[i] * se[i];
    }
  }
  return s;
}

namespace {

/// Deterministic chunked reduction: per-chunk partials accumulated in index
/// order, chunks combined pairwise; results are identical for every thread
/// count.
template <class Value, class Fill, class Zero>
Value chunked_reduce(std::size_t n, int threads, Zero zero, Fill fill) {
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<Value> partials(chunks, zero());
  auto work = [&](std::size_t c) {
    const std::size_t lo = c * kChunk, hi = std::min(n, lo + kChunk);
    fill(partials[c], lo, hi);
  };
  if (threads <= 1 || chunks <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) work(c);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    const int tcount = std::min<std::size_t>(threads, chunks);
    for (int t = 0; t < tcount; ++t)
      pool.emplace_back([&] {
        while (true) {
          const std::size_t c = next.fetch_add(1);
          if (c >= chunks) return;
          work(c);
        }
      });
    for (auto& th : pool) th.join();
  }
  // Pairwise combine in fixed chunk order.
  std::size_t count = chunks;
  while (count > 1) {
    const std::size_t half = (count + 1) / 2;
    for (std::size_t i = 0; i + 1 < count; i += 2) partials[i / 2] = partials[i] + partials[i + 1];
    if (count % 2 == 1) partials[count / 2] = partials[count - 1];
    count = half;
  }
  return partials.empty() ? zero() : partials[0];
}

struct TensorAccum {
  std::vector<TensorD> t;
  TensorAccum operator+(const TensorAccum& o) const {
    TensorAccum out = *this;
    for (std::size_t i = 0; i < t.size(); ++i) out.t[i] += o.t[i];
    return out;
  }
};

}  // namespace

MomentEstimate estimate_moments(const OrientationSample& sample,
                                const std::vector<OrderParam>& selection, int threads) {
  if (sample.rotations.empty()) throw std::invalid_argument("estimate_moments: empty sample");
  if (selection.empty()) throw std::invalid_argument("estimate_moments: empty selection");
  const std::size_t n = sample.rotations.size();

  auto zero = [&] {
    TensorAccum acc;
    for (OrderParam p : selection) acc.t.emplace_back(classifier::order_of(p));
    return acc;
  };
  // Mean pass.
  TensorAccum mean = chunked_reduce<TensorAccum>(
      n, threads, zero, [&](TensorAccum& acc, std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
          for (std::size_t j = 0; j < selection.size(); ++j) {
            const TensorD rotated =
                tensors::rotate(sample.rotations[k], classifier::base_tensor(selection[j]));
            acc.t[j] += sample.weights[k] * rotated;
          }
        }
      });
  // Variance pass for the componentwise standard errors.
  TensorAccum var = chunked_reduce<TensorAccum>(
      n, threads, zero, [&](TensorAccum& acc, std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
          for (std::size_t j = 0; j < selection.size(); ++j) {
            const TensorD rotated =
                tensors::rotate(sample.rotations[k], classifier::base_tensor(selection[j]));
            const double w2 = sample.weights[k] * sample.weights[k];
            for (int i = 0; i < rotated.size(); ++i) {
              const double d = rotated[i] - mean.t[j][i];
              acc.t[j][i] += w2 * d * d;
            }
          }
        }
      });

  MomentEstimate out;
  out.count = n;
  const double bias = n > 1 ? static_cast<double>(n) / (n - 1.0) : 1.0;
  for (std::size_t j = 0; j < selection.size(); ++j) {
    out.values[selection[j]] = tensors::traceless_project(mean.t[j]);
    TensorD se(mean.t[j].order());
    for (int i = 0; i < se.size(); ++i) se[i] = std::sqrt(bias * var.t[j][i]);
    out.standard_errors[selection[j]] = se;
  }
  return out;
}

std::vector<OrderParam> parse_selection(const std::string& comma_list) {
  std::vector<OrderParam> out;
  std::string token;
  std::istringstream in(comma_list);
  while (std::getline(in, token, ',')) {
    if (token.empty()) continue;
    out.push_back(classifier::order_param_from_string(token));
  }
  if (out.empty()) throw std::invalid_argument("empty tensor selection: " + comma_list);
  return out;
}

std::vector<so3::Rotation> sample_density(const maxent::MaxEntSolution& sol, std::size_t count,
                                          std::uint64_t seed) {
  // Density bound from a quadrature scan.
  const int order = std::max(6, sol.grid.exactness_order > 0 ? sol.grid.exactness_order : 12);
  const so3::QuadratureGrid grid = so3::haar_grid(order);
  double max_rho = 0.0;
  for (const auto& node : grid.nodes) max_rho = std::max(max_rho, sol.density(node.p));
  const double bound = 1.1 * max_rho;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<so3::Rotation> out;
  out.reserve(count);
  while (out.size() < count) {
    double a = gauss(rng), b = gauss(rng), c = gauss(rng), d = gauss(rng);
    const double nrm = std::sqrt(a * a + b * b + c * c + d * d);
    if (nrm < 1e-12) continue;
    const so3::Rotation p =
        so3::rotation_from_quaternion({a / nrm, b / nrm, c / nrm, d / nrm});
    if (unit(rng) * bound <= sol.density(p)) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

int run_classify(const PipelineOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    classifier::OrderParameterSet set;
    classifier::DetectOptions detect;
    if (!opts.samples_path.empty()) {
      const std::vector<OrderParam> selection = parse_selection(opts.tensors_arg);
      const OrientationSample sample = ingest(opts.samples_path, opts.sample_format);
      const MomentEstimate est = estimate_moments(sample, selection, opts.threads);
      for (const auto& [k, v] : est.values) set.tensors[k] = v;
      if (opts.tol > 0) {
        detect.tol = opts.tol;
        detect.relative = false;
      } else {
        // Noise-scaled absolute gate: 4-sigma per component, squared.
        detect.tol = std::max(1e-12, 16.0 * est.noise_norm2());
        detect.relative = false;
      }
    } else {
      set = params_from_json_file(opts.tensors_arg);
      detect.tol = opts.tol > 0 ? opts.tol : 1e-8;
      detect.relative = true;
    }
    if (!opts.molecule.empty()) set.molecular_group = opts.molecule;

    const classifier::SymmetryReport report = classifier::detect_symmetry(set, detect);

    const classifier::BreakingGraph* graph_ptr = nullptr;
    classifier::BreakingGraph graph;
    if (opts.graph) {
      graph = classifier::breaking_graph(set.molecular_group, set.selection());
      graph_ptr = &graph;
    }

    std::ostringstream payload;
    if (opts.format == "text") {
      payload << report_to_text(report);
      if (graph_ptr) payload << "graph:\n" << graph_to_json(*graph_ptr);
    } else {
      payload << report_to_json(report, graph_ptr);
    }
    if (!opts.out_path.empty()) {
      std::ofstream f(opts.out_path);
      if (!f) throw std::invalid_argument("cannot write output file: " + opts.out_path);
      f << payload.str();
    } else {
      out << payload.str();
    }
    return report.detected == "none" ? 2 : 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace anisotens::io
