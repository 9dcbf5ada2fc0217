#pragma once

// JSON file formats for datasets, dictionaries, codes and reconstructions.
// Readers are strict: unknown keys and malformed values are rejected with
// the JSON path of the offending element.

#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ksd/configspace.hpp"
#include "ksd/dictionary.hpp"
#include "ksd/error.hpp"
#include "ksd/experiment.hpp"
#include "ksd/learn.hpp"
#include "ksd/linalg.hpp"
#include "ksd/ormp.hpp"
#include "ksd/synth.hpp"

namespace ksd::io {

using json = nlohmann::ordered_json;

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
  throw DataError((path.empty() ? std::string("/") : path) + ": " + msg);
}

inline void expect_keys(const json& obj, const std::string& path, std::initializer_list<const char*> required,
                        std::initializer_list<const char*> optional = {}) {
  if (!obj.is_object()) fail(path, "expected an object");
  std::set<std::string> allowed;
  for (const char* k : required) {
    allowed.insert(k);
    if (!obj.contains(k)) fail(path, std::string("missing field '") + k + "'");
  }
  for (const char* k : optional) allowed.insert(k);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) fail(path, "unknown field '" + it.key() + "'");
  }
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "non-finite number");
  return v;
}

inline long long integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long long>();
}

inline std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

inline const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

inline cplx complex_number(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected a [re, im] pair");
  return {number(j[0], path + "/0"), number(j[1], path + "/1")};
}

inline json to_json(cplx c) { return json::array({c.real(), c.imag()}); }

inline json to_json(const CVector& z) {
  json out = json::array();
  for (Index i = 0; i < z.size(); ++i) out.push_back(to_json(z(i)));
  return out;
}

inline CVector vector_from(const json& j, Index n, const std::string& path) {
  array(j, path);
  if (static_cast<Index>(j.size()) != n) {
    fail(path, "expected " + std::to_string(n) + " points, got " + std::to_string(j.size()));
  }
  CVector z(n);
  for (Index i = 0; i < n; ++i) z(i) = complex_number(j[static_cast<std::size_t>(i)], path + "/" + std::to_string(i));
  return z;
}

inline void check_format(const json& j, const std::string& expected) {
  if (string(j.at("format"), "/format") != expected) fail("/format", "expected '" + expected + "'");
}

}  // namespace detail

inline json metric_to_json(const Metric& m) {
  json out;
  out["kind"] = std::string(to_string(m.kind()));
  out["n"] = m.dim();
  if (m.kind() == MetricKind::custom) {
    json rows = json::array();
    for (Index r = 0; r < m.dim(); ++r) rows.push_back(detail::to_json(CVector(m.phi().matrix().row(r).transpose())));
    out["phi"] = rows;
    out["shift"] = detail::to_json(m.shift());
  }
  return out;
}

inline MetricPtr metric_from_json(const json& j, const std::string& path) {
  detail::expect_keys(j, path, {"kind", "n"}, {"phi", "shift"});
  const MetricKind kind = [&] {
    try {
      return metric_kind_from_string(detail::string(j["kind"], path + "/kind"));
    } catch (const DataError& e) {
      detail::fail(path + "/kind", e.what());
    }
  }();
  const long long n = detail::integer(j["n"], path + "/n");
  if (n < 1) detail::fail(path + "/n", "dimension must be positive");
  if (kind != MetricKind::custom && (j.contains("phi") || j.contains("shift"))) {
    detail::fail(path, "'phi' and 'shift' are only allowed for custom metrics");
  }
  try {
    switch (kind) {
      case MetricKind::landmarks: return Metric::landmarks(n);
      case MetricKind::bspline_closed: return Metric::bspline_closed(n);
      case MetricKind::custom: {
        if (!j.contains("phi") || !j.contains("shift")) detail::fail(path, "custom metrics need 'phi' and 'shift'");
        const json& rows = detail::array(j["phi"], path + "/phi");
        if (static_cast<long long>(rows.size()) != n) detail::fail(path + "/phi", "expected " + std::to_string(n) + " rows");
        CMatrix phi(n, n);
        for (long long r = 0; r < n; ++r) {
          phi.row(r) = detail::vector_from(rows[static_cast<std::size_t>(r)], n, path + "/phi/" + std::to_string(r)).transpose();
        }
        CVector shift = detail::vector_from(j["shift"], n, path + "/shift");
        return Metric::custom(HermMatrix(std::move(phi)), std::move(shift));
      }
    }
  } catch (const UsageError& e) {
    detail::fail(path, e.what());
  } catch (const NumericalError& e) {
    detail::fail(path, e.what());
  }
  detail::fail(path, "unsupported metric");
}

/// Raw configurations with their metric and optional class labels.
struct DatasetFile {
  MetricPtr metric;
  std::vector<CVector> shapes;
  std::vector<std::string> labels;
};

inline json dataset_to_json(const DatasetFile& ds) {
  json out;
  out["format"] = "ksd-dataset";
  out["metric"] = metric_to_json(*ds.metric);
  json shapes = json::array();
  for (const CVector& z : ds.shapes) shapes.push_back(detail::to_json(z));
  out["shapes"] = shapes;
  if (!ds.labels.empty()) out["labels"] = ds.labels;
  return out;
}

inline DatasetFile dataset_from_json(const json& j) {
  detail::expect_keys(j, "", {"format", "metric", "shapes"}, {"labels"});
  detail::check_format(j, "ksd-dataset");
  DatasetFile ds;
  ds.metric = metric_from_json(j["metric"], "/metric");
  const json& shapes = detail::array(j["shapes"], "/shapes");
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    ds.shapes.push_back(detail::vector_from(shapes[k], ds.metric->dim(), "/shapes/" + std::to_string(k)));
  }
  if (j.contains("labels")) {
    const json& labels = detail::array(j["labels"], "/labels");
    if (labels.size() != shapes.size()) detail::fail("/labels", "one label per shape expected");
    for (std::size_t k = 0; k < labels.size(); ++k) ds.labels.push_back(detail::string(labels[k], "/labels/" + std::to_string(k)));
  }
  return ds;
}

inline DatasetFile dataset_from_preshapes(const MetricPtr& metric, const std::vector<PreShape>& shapes,
                                          std::vector<std::string> labels = {}) {
  DatasetFile ds{metric, {}, std::move(labels)};
  for (const PreShape& p : shapes) ds.shapes.push_back(p.vector());
  return ds;
}

/// Projects every configuration onto the pre-shape sphere; degenerate ones
/// are reported with their index.
inline std::vector<PreShape> to_preshapes(const DatasetFile& ds) {
  std::vector<PreShape> out;
  out.reserve(ds.shapes.size());
  for (std::size_t k = 0; k < ds.shapes.size(); ++k) {
    try {
      out.push_back(preshape(ds.shapes[k], ds.metric));
    } catch (const DataError& e) {
      throw DataError("/shapes/" + std::to_string(k) + ": " + e.what());
    }
  }
  return out;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open file for writing");
  out << text;
  if (!out) throw DataError(path + ": write failed");
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(1) + "\n"); }

template <typename Fn>
auto with_file_context(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

inline DatasetFile load_dataset(const std::string& path) {
  const json j = read_json_file(path);
  return with_file_context(path, [&] { return dataset_from_json(j); });
}

inline void save_dataset(const DatasetFile& ds, const std::string& path) { write_json_file(path, dataset_to_json(ds)); }

inline json config_to_json(const LearnConfig& cfg) {
  json out;
  out["atoms"] = cfg.atoms;
  out["sparsity"] = cfg.sparsity;
  out["iterations"] = cfg.iterations;
  out["seed"] = cfg.seed;
  out["batch_size"] = cfg.batch_size;
  out["dead_atom_usage_threshold"] = cfg.dead_atom_usage_threshold;
  out["warm_start"] = cfg.warm_start;
  out["keep_best"] = cfg.keep_best;
  return out;
}

inline LearnConfig config_from_json(const json& j, const std::string& path) {
  detail::expect_keys(j, path, {"atoms", "sparsity", "iterations", "seed", "batch_size", "dead_atom_usage_threshold"},
                      {"warm_start", "keep_best"});
  LearnConfig cfg;
  cfg.atoms = detail::integer(j["atoms"], path + "/atoms");
  cfg.sparsity = detail::integer(j["sparsity"], path + "/sparsity");
  cfg.iterations = detail::integer(j["iterations"], path + "/iterations");
  if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) detail::fail(path + "/seed", "expected an integer");
  cfg.seed = j["seed"].get<std::uint64_t>();
  cfg.batch_size = detail::integer(j["batch_size"], path + "/batch_size");
  cfg.dead_atom_usage_threshold = static_cast<std::size_t>(detail::integer(j["dead_atom_usage_threshold"], path + "/dead_atom_usage_threshold"));
  if (j.contains("warm_start")) {
    if (!j["warm_start"].is_boolean()) detail::fail(path + "/warm_start", "expected a boolean");
    cfg.warm_start = j["warm_start"].get<bool>();
  }
  if (j.contains("keep_best")) {
    if (!j["keep_best"].is_boolean()) detail::fail(path + "/keep_best", "expected a boolean");
    cfg.keep_best = j["keep_best"].get<bool>();
  }
  return cfg;
}

/// A learned dictionary plus the run that produced it.
struct DictionaryFile {
  Dictionary dictionary;
  bool real_weights = false;
  LearnConfig config;
  std::vector<double> loss_history;
  double final_rmse = 0.0;
  std::size_t atom_replacements = 0;
  std::optional<CVector> reference;  ///< align-first reference pre-shape
};

inline json dictionary_to_json(const DictionaryFile& f) {
  json out;
  out["format"] = "ksd-dictionary";
  out["metric"] = metric_to_json(*f.dictionary.metric());
  out["weights"] = f.real_weights ? "real" : "complex";
  json atoms = json::array();
  for (Index j = 0; j < f.dictionary.size(); ++j) atoms.push_back(detail::to_json(CVector(f.dictionary.atoms().col(j))));
  out["atoms"] = atoms;
  out["usage"] = f.dictionary.usage();
  out["config"] = config_to_json(f.config);
  out["loss_history"] = f.loss_history;
  out["final_rmse"] = f.final_rmse;
  out["atom_replacements"] = f.atom_replacements;
  if (f.reference) out["reference"] = detail::to_json(*f.reference);
  return out;
}

inline DictionaryFile dictionary_from_json(const json& j) {
  detail::expect_keys(j, "",
                      {"format", "metric", "weights", "atoms", "config", "loss_history", "final_rmse",
                       "atom_replacements"},
                      {"usage", "reference"});
  detail::check_format(j, "ksd-dictionary");
  DictionaryFile f;
  const MetricPtr metric = metric_from_json(j["metric"], "/metric");
  const std::string weights = detail::string(j["weights"], "/weights");
  if (weights != "real" && weights != "complex") detail::fail("/weights", "expected 'real' or 'complex'");
  f.real_weights = weights == "real";
  const json& atoms = detail::array(j["atoms"], "/atoms");
  if (atoms.empty()) detail::fail("/atoms", "dictionary needs at least one atom");
  CMatrix d(metric->dim(), static_cast<Index>(atoms.size()));
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    d.col(static_cast<Index>(a)) = detail::vector_from(atoms[a], metric->dim(), "/atoms/" + std::to_string(a));
  }
  try {
    f.dictionary = Dictionary(std::move(d), metric, 1e-8);
  } catch (const DataError& e) {
    detail::fail("/atoms", e.what());
  }
  if (j.contains("usage")) {
    const json& usage = detail::array(j["usage"], "/usage");
    if (static_cast<Index>(usage.size()) != f.dictionary.size()) detail::fail("/usage", "one count per atom expected");
    std::vector<std::size_t> u;
    for (std::size_t a = 0; a < usage.size(); ++a) u.push_back(static_cast<std::size_t>(detail::integer(usage[a], "/usage/" + std::to_string(a))));
    f.dictionary.set_usage(std::move(u));
  }
  f.config = config_from_json(j["config"], "/config");
  const json& loss = detail::array(j["loss_history"], "/loss_history");
  for (std::size_t i = 0; i < loss.size(); ++i) f.loss_history.push_back(detail::number(loss[i], "/loss_history/" + std::to_string(i)));
  f.final_rmse = detail::number(j["final_rmse"], "/final_rmse");
  f.atom_replacements = static_cast<std::size_t>(detail::integer(j["atom_replacements"], "/atom_replacements"));
  if (j.contains("reference")) f.reference = detail::vector_from(j["reference"], metric->dim(), "/reference");
  return f;
}

inline DictionaryFile load_dictionary(const std::string& path) {
  const json j = read_json_file(path);
  return with_file_context(path, [&] { return dictionary_from_json(j); });
}

/// Sparse codes together with the pre-shapes they encode (after alignment
/// for real-weight dictionaries). Real codes are stored as plain numbers.
struct CodesFile {
  MetricPtr metric;
  Index atoms = 0;
  bool real_weights = false;
  std::vector<CVector> shapes;
  std::vector<SparseCode> codes;
};

inline json codes_to_json(const CodesFile& f) {
  json out;
  out["format"] = "ksd-codes";
  out["metric"] = metric_to_json(*f.metric);
  out["weights"] = f.real_weights ? "real" : "complex";
  out["atoms"] = f.atoms;
  json shapes = json::array();
  for (const CVector& z : f.shapes) shapes.push_back(detail::to_json(z));
  out["shapes"] = shapes;
  json codes = json::array();
  for (const SparseCode& c : f.codes) {
    json e;
    e["support"] = c.support;
    json coeffs = json::array();
    for (const cplx& a : c.coefficients) {
      if (f.real_weights) {
        coeffs.push_back(a.real());
      } else {
        coeffs.push_back(detail::to_json(a));
      }
    }
    e["coefficients"] = coeffs;
    e["residual_norm"] = c.residual_norm;
    codes.push_back(e);
  }
  out["codes"] = codes;
  return out;
}

inline CodesFile codes_from_json(const json& j) {
  detail::expect_keys(j, "", {"format", "metric", "weights", "atoms", "shapes", "codes"});
  detail::check_format(j, "ksd-codes");
  CodesFile f;
  f.metric = metric_from_json(j["metric"], "/metric");
  const std::string weights = detail::string(j["weights"], "/weights");
  if (weights != "real" && weights != "complex") detail::fail("/weights", "expected 'real' or 'complex'");
  f.real_weights = weights == "real";
  f.atoms = detail::integer(j["atoms"], "/atoms");
  const json& shapes = detail::array(j["shapes"], "/shapes");
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    f.shapes.push_back(detail::vector_from(shapes[k], f.metric->dim(), "/shapes/" + std::to_string(k)));
  }
  const json& codes = detail::array(j["codes"], "/codes");
  if (codes.size() != shapes.size()) detail::fail("/codes", "one code per shape expected");
  for (std::size_t k = 0; k < codes.size(); ++k) {
    const std::string path = "/codes/" + std::to_string(k);
    detail::expect_keys(codes[k], path, {"support", "coefficients", "residual_norm"});
    SparseCode c;
    const json& support = detail::array(codes[k]["support"], path + "/support");
    const json& coeffs = detail::array(codes[k]["coefficients"], path + "/coefficients");
    if (support.size() != coeffs.size()) detail::fail(path, "support and coefficients differ in length");
    for (std::size_t i = 0; i < support.size(); ++i) {
      const long long idx = detail::integer(support[i], path + "/support/" + std::to_string(i));
      if (idx < 0 || idx >= f.atoms) detail::fail(path + "/support/" + std::to_string(i), "atom index out of range");
      c.support.push_back(static_cast<Index>(idx));
      const std::string cpath = path + "/coefficients/" + std::to_string(i);
      c.coefficients.push_back(f.real_weights ? cplx(detail::number(coeffs[i], cpath), 0.0)
                                              : detail::complex_number(coeffs[i], cpath));
    }
    c.residual_norm = detail::number(codes[k]["residual_norm"], path + "/residual_norm");
    f.codes.push_back(std::move(c));
  }
  return f;
}

inline CodesFile load_codes(const std::string& path) {
  const json j = read_json_file(path);
  return with_file_context(path, [&] { return codes_from_json(j); });
}

/// Originals, reconstructions and per-sample errors.
struct ReconstructionFile {
  MetricPtr metric;
  std::vector<CVector> originals;
  std::vector<CVector> reconstructions;
  std::vector<double> errors_percent;
  double rmse = 0.0;
};

inline json reconstruction_to_json(const ReconstructionFile& f) {
  json out;
  out["format"] = "ksd-reconstruction";
  out["metric"] = metric_to_json(*f.metric);
  json orig = json::array();
  for (const CVector& z : f.originals) orig.push_back(detail::to_json(z));
  json rec = json::array();
  for (const CVector& z : f.reconstructions) rec.push_back(detail::to_json(z));
  out["originals"] = orig;
  out["reconstructions"] = rec;
  out["errors_percent"] = f.errors_percent;
  out["rmse"] = f.rmse;
  out["rmse_percent"] = 100.0 * f.rmse;
  return out;
}

inline ReconstructionFile reconstruction_from_json(const json& j) {
  detail::expect_keys(j, "", {"format", "metric", "originals", "reconstructions", "errors_percent", "rmse", "rmse_percent"});
  detail::check_format(j, "ksd-reconstruction");
  ReconstructionFile f;
  f.metric = metric_from_json(j["metric"], "/metric");
  const json& orig = detail::array(j["originals"], "/originals");
  const json& rec = detail::array(j["reconstructions"], "/reconstructions");
  if (orig.size() != rec.size()) detail::fail("/reconstructions", "one reconstruction per original expected");
  for (std::size_t k = 0; k < orig.size(); ++k) {
    f.originals.push_back(detail::vector_from(orig[k], f.metric->dim(), "/originals/" + std::to_string(k)));
    f.reconstructions.push_back(detail::vector_from(rec[k], f.metric->dim(), "/reconstructions/" + std::to_string(k)));
  }
  const json& err = detail::array(j["errors_percent"], "/errors_percent");
  for (std::size_t k = 0; k < err.size(); ++k) f.errors_percent.push_back(detail::number(err[k], "/errors_percent/" + std::to_string(k)));
  f.rmse = detail::number(j["rmse"], "/rmse");
  return f;
}

namespace detail {

inline std::pair<double, double> range(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected a [min, max] pair");
  return {number(j[0], path + "/0"), number(j[1], path + "/1")};
}

inline std::string sibling_path(const std::string& base, const std::string& rel) {
  if (rel.empty() || rel.front() == '/') return rel;
  const std::size_t slash = base.find_last_of('/');
  return slash == std::string::npos ? rel : base.substr(0, slash + 1) + rel;
}

}  // namespace detail

/// Synthetic dataset spec. Only "bases" is required; "imported" names a
/// dataset file (relative to `spec_path`) whose shapes back "imported-<i>".
inline SynthSpec synth_spec_from_json(const json& j, const std::string& path = "",
                                      const std::string& spec_path = "") {
  detail::expect_keys(j, path, {"bases"},
                      {"landmarks", "copies", "deformation", "rotation", "scale", "translation", "seed", "imported"});
  SynthSpec s;
  const json& bases = detail::array(j["bases"], path + "/bases");
  for (std::size_t i = 0; i < bases.size(); ++i) s.bases.push_back(detail::string(bases[i], path + "/bases/" + std::to_string(i)));
  if (j.contains("landmarks")) s.landmarks = detail::integer(j["landmarks"], path + "/landmarks");
  if (j.contains("copies")) s.copies = detail::integer(j["copies"], path + "/copies");
  if (j.contains("deformation")) s.deformation = detail::number(j["deformation"], path + "/deformation");
  if (j.contains("rotation")) std::tie(s.rotation_min, s.rotation_max) = detail::range(j["rotation"], path + "/rotation");
  if (j.contains("scale")) std::tie(s.scale_min, s.scale_max) = detail::range(j["scale"], path + "/scale");
  if (j.contains("translation")) s.translation = detail::number(j["translation"], path + "/translation");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0) detail::fail(path + "/seed", "expected a nonnegative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("imported")) {
    const DatasetFile ds = load_dataset(detail::sibling_path(spec_path, detail::string(j["imported"], path + "/imported")));
    if (ds.metric->kind() != MetricKind::landmarks) detail::fail(path + "/imported", "imported shapes must be landmark configurations");
    s.imported = ds.shapes;
  }
  try {
    s.validate();
  } catch (const UsageError& e) {
    detail::fail(path, e.what());
  }
  return s;
}

inline SynthSpec load_synth_spec(const std::string& path) {
  const json j = read_json_file(path);
  return with_file_context(path, [&] { return synth_spec_from_json(j, "", path); });
}

/// Parses "a..b" (inclusive) or a single integer.
inline std::vector<Index> parse_sweep(const std::string& text) {
  auto to_int = [&](const std::string& t) -> Index {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (t.empty() || used != t.size()) throw UsageError("malformed sweep '" + text + "', expected a..b");
    return static_cast<Index>(v);
  };
  const std::size_t dots = text.find("..");
  const Index a = to_int(dots == std::string::npos ? text : text.substr(0, dots));
  const Index b = dots == std::string::npos ? a : to_int(text.substr(dots + 2));
  if (a < 1 || b < a) throw UsageError("sweep '" + text + "' must satisfy 1 <= a <= b");
  std::vector<Index> out;
  for (Index v = a; v <= b; ++v) out.push_back(v);
  return out;
}

/// {"synth": {...}, "sparsity": "a..b" or [..], "atoms", "iterations",
///  "seeds", "keep_mean"}
inline experiment::ExperimentSpec experiment_spec_from_json(const json& j, const std::string& spec_path = "") {
  detail::expect_keys(j, "", {"synth", "sparsity"}, {"atoms", "iterations", "seeds", "keep_mean"});
  experiment::ExperimentSpec e;
  e.synth = synth_spec_from_json(j["synth"], "/synth", spec_path);
  if (j["sparsity"].is_string()) {
    try {
      e.sparsities = parse_sweep(j["sparsity"].get<std::string>());
    } catch (const UsageError& err) {
      detail::fail("/sparsity", err.what());
    }
  } else {
    const json& sp = detail::array(j["sparsity"], "/sparsity");
    for (std::size_t i = 0; i < sp.size(); ++i) e.sparsities.push_back(detail::integer(sp[i], "/sparsity/" + std::to_string(i)));
  }
  if (j.contains("atoms")) e.atoms = detail::integer(j["atoms"], "/atoms");
  if (j.contains("iterations")) e.iterations = detail::integer(j["iterations"], "/iterations");
  if (j.contains("seeds")) {
    const json& seeds = detail::array(j["seeds"], "/seeds");
    e.seeds.clear();
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const long long v = detail::integer(seeds[i], "/seeds/" + std::to_string(i));
      if (v < 0) detail::fail("/seeds/" + std::to_string(i), "seeds are nonnegative");
      e.seeds.push_back(static_cast<std::uint64_t>(v));
    }
  }
  if (j.contains("keep_mean")) {
    if (!j["keep_mean"].is_boolean()) detail::fail("/keep_mean", "expected a boolean");
    e.keep_mean = j["keep_mean"].get<bool>();
  }
  try {
    e.validate();
  } catch (const UsageError& err) {
    detail::fail("", err.what());
  }
  return e;
}

inline experiment::ExperimentSpec load_experiment_spec(const std::string& path) {
  const json j = read_json_file(path);
  return with_file_context(path, [&] { return experiment_spec_from_json(j, path); });
}

}  // namespace ksd::io
