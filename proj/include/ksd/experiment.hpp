#pragma once

// RMSE versus sparsity for complex PCA, align-first and 2DKSD on synthetic
// data, as CSV tables and a log-scale SVG plot.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "ksd/baselines.hpp"
#include "ksd/error.hpp"
#include "ksd/learn.hpp"
#include "ksd/synth.hpp"

namespace ksd::experiment {

struct ExperimentSpec {
  SynthSpec synth;               ///< its seed is replaced by each experiment seed
  std::vector<Index> sparsities; ///< N0 values
  Index atoms = 10;              ///< J
  Index iterations = 30;         ///< T
  std::vector<std::uint64_t> seeds{0};
  bool keep_mean = false;        ///< PCA without mean subtraction
  unsigned threads = 0;
  std::string output_dir;        ///< used by the CLI only

  void validate() const {
    if (sparsities.empty()) throw UsageError("the sparsity sweep is empty");
    if (seeds.empty()) throw UsageError("at least one seed is needed");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
      throw UsageError("experiment seeds must be distinct");
    }
    for (Index n0 : sparsities) {
      if (n0 < 1 || n0 > atoms) throw UsageError("every N0 must lie in [1, J]");
    }
    synth.validate();
  }
};

struct Row {
  std::string method;  ///< "pca", "align-first" or "2dksd"
  Index n0 = 0;
  std::uint64_t seed = 0;
  double rmse = 0.0;
};

struct Summary {
  std::string method;
  Index n0 = 0;
  std::size_t runs = 0;
  double mean = 0.0;
  double stddev = 0.0;  ///< population standard deviation over seeds
  double min = 0.0;
  double max = 0.0;
};

inline const std::vector<std::string>& methods() {
  static const std::vector<std::string> m{"pca", "align-first", "2dksd"};
  return m;
}

/// RMSE of the three methods for every N0 on the given pre-shapes.
/// PCA reconstructs with the first N0 modes (plus the mean unless kept).
inline std::vector<Row> compare(const std::vector<PreShape>& data, const std::vector<Index>& sparsities, Index atoms,
                                Index iterations, std::uint64_t seed, bool keep_mean, unsigned threads = 0) {
  if (data.empty()) throw DataError("comparison needs a nonempty dataset");
  const MetricPtr& metric = data.front().metric();
  const Index max_n0 = *std::max_element(sparsities.begin(), sparsities.end());
  if (max_n0 > metric->dim()) throw UsageError("PCA cannot use more modes than the dimension N");
  std::vector<CVector> raw;
  for (const PreShape& p : data) raw.push_back(p.vector());
  const PcaModel pca = complex_pca(raw, metric, max_n0, !keep_mean);

  std::vector<Row> rows;
  for (Index n0 : sparsities) {
    LearnConfig cfg;
    cfg.atoms = atoms;
    cfg.sparsity = n0;
    cfg.iterations = iterations;
    cfg.seed = seed;
    cfg.threads = threads;
    rows.push_back({"pca", n0, seed, pca.rmse(n0)});
    rows.push_back({"align-first", n0, seed, align_first_learn(data, cfg).report.final_rmse});
    rows.push_back({"2dksd", n0, seed, learn(data, cfg).report.final_rmse});
  }
  return rows;
}

/// One synthetic dataset per seed, compared at every N0.
inline std::vector<Row> run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<Row> rows;
  for (std::uint64_t seed : spec.seeds) {
    SynthSpec s = spec.synth;
    s.seed = seed;
    const SynthDataset ds = make_dataset(s);
    const std::vector<Row> part = compare(ds.shapes, spec.sparsities, spec.atoms, spec.iterations, seed, spec.keep_mean,
                                          spec.threads);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

/// Mean and spread across seeds, per method and N0, in sweep order.
inline std::vector<Summary> summarize(const std::vector<Row>& rows) {
  std::vector<Summary> out;
  std::vector<Index> order;
  for (const Row& r : rows) {
    if (std::find(order.begin(), order.end(), r.n0) == order.end()) order.push_back(r.n0);
  }
  for (Index n0 : order) {
    for (const std::string& m : methods()) {
      std::vector<double> v;
      for (const Row& r : rows) {
        if (r.n0 == n0 && r.method == m) v.push_back(r.rmse);
      }
      if (v.empty()) continue;
      Summary s{m, n0, v.size(), 0.0, 0.0, *std::min_element(v.begin(), v.end()), *std::max_element(v.begin(), v.end())};
      for (double x : v) s.mean += x;
      s.mean /= static_cast<double>(v.size());
      for (double x : v) s.stddev += (x - s.mean) * (x - s.mean);
      s.stddev = std::sqrt(s.stddev / static_cast<double>(v.size()));
      out.push_back(s);
    }
  }
  return out;
}

namespace detail {
inline std::string num(double v, const char* f = "%.10g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}
}  // namespace detail

inline std::string rows_csv(const std::vector<Row>& rows) {
  std::string out = "method,n0,seed,rmse,rmse_percent\n";
  for (const Row& r : rows) {
    out += r.method + "," + std::to_string(r.n0) + "," + std::to_string(r.seed) + "," + detail::num(r.rmse) + "," +
           detail::num(100.0 * r.rmse, "%.2f") + "\n";
  }
  return out;
}

inline std::string summary_csv(const std::vector<Summary>& sums) {
  std::string out = "method,n0,runs,mean_rmse,std_rmse,min_rmse,max_rmse\n";
  for (const Summary& s : sums) {
    out += s.method + "," + std::to_string(s.n0) + "," + std::to_string(s.runs) + "," + detail::num(s.mean) + "," +
           detail::num(s.stddev) + "," + detail::num(s.min) + "," + detail::num(s.max) + "\n";
  }
  return out;
}

/// Mean RMSE against N0 on a logarithmic axis, one polyline per method,
/// with min-max bars.
inline std::string plot_svg(const std::vector<Summary>& sums) {
  if (sums.empty()) throw UsageError("nothing to plot");
  const double w = 560.0, h = 380.0, left = 70.0, right = 130.0, top = 20.0, bottom = 50.0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  Index xmin = sums.front().n0, xmax = sums.front().n0;
  for (const Summary& s : sums) {
    if (s.min > 0.0) lo = std::min(lo, s.min);
    hi = std::max(hi, s.max);
    xmin = std::min(xmin, s.n0);
    xmax = std::max(xmax, s.n0);
  }
  if (!(hi > 0.0)) hi = 1.0;
  if (!std::isfinite(lo)) lo = hi / 10.0;
  const double dlo = std::floor(std::log10(lo));
  const double dhi = std::max(std::ceil(std::log10(hi)), dlo + 1.0);
  auto px = [&](Index n0) {
    const double span = xmax > xmin ? static_cast<double>(xmax - xmin) : 1.0;
    const double f = xmax > xmin ? static_cast<double>(n0 - xmin) / span : 0.5;
    return left + f * (w - left - right);
  };
  auto py = [&](double v) {
    const double lv = v > 0.0 ? std::log10(v) : dlo;
    return top + (dhi - lv) / (dhi - dlo) * (h - top - bottom);
  };
  const char* colors[] = {"#2ca02c", "#ff7f0e", "#1f4fd8"};
  auto f3 = [](double v) { return detail::num(v, "%.3f"); };

  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
                    f3(w) + "\" height=\"" + f3(h) + "\" viewBox=\"0 0 " + f3(w) + " " + f3(h) + "\">\n" +
                    "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
                    "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  out += "<path d=\"M" + f3(left) + "," + f3(top) + " L" + f3(left) + "," + f3(h - bottom) + " L" + f3(w - right) + "," +
         f3(h - bottom) + "\" stroke=\"#000000\" fill=\"none\"/>\n";
  for (double d = dlo; d <= dhi + 0.5; d += 1.0) {
    const double y = py(std::pow(10.0, d));
    out += "<path d=\"M" + f3(left - 4.0) + "," + f3(y) + " L" + f3(w - right) + "," + f3(y) +
           "\" stroke=\"#dddddd\" fill=\"none\"/>\n";
    out += "<text x=\"" + f3(left - 8.0) + "\" y=\"" + f3(y + 4.0) + "\" text-anchor=\"end\">1e" +
           std::to_string(static_cast<int>(d)) + "</text>\n";
  }
  std::vector<Index> xs;
  for (const Summary& s : sums) {
    if (std::find(xs.begin(), xs.end(), s.n0) == xs.end()) xs.push_back(s.n0);
  }
  for (Index n0 : xs) {
    out += "<text x=\"" + f3(px(n0)) + "\" y=\"" + f3(h - bottom + 16.0) + "\" text-anchor=\"middle\">" +
           std::to_string(n0) + "</text>\n";
  }
  out += "<text x=\"" + f3(0.5 * (left + w - right)) + "\" y=\"" + f3(h - 10.0) + "\" text-anchor=\"middle\">N0</text>\n";
  out += "<text x=\"16\" y=\"" + f3(0.5 * (top + h - bottom)) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         f3(0.5 * (top + h - bottom)) + ")\">RMSE (log)</text>\n";
  for (std::size_t m = 0; m < methods().size(); ++m) {
    std::string d;
    std::string bars;
    for (const Summary& s : sums) {
      if (s.method != methods()[m]) continue;
      d += (d.empty() ? "M" : " L") + f3(px(s.n0)) + "," + f3(py(s.mean));
      if (s.max > s.min) {
        bars += "<path d=\"M" + f3(px(s.n0)) + "," + f3(py(s.min)) + " L" + f3(px(s.n0)) + "," + f3(py(s.max)) +
                "\" stroke=\"" + colors[m] + "\" fill=\"none\"/>\n";
      }
    }
    if (d.empty()) continue;
    out += "<path class=\"" + methods()[m] + "\" d=\"" + d + "\" stroke=\"" + colors[m] +
           "\" stroke-width=\"2\" fill=\"none\"/>\n" + bars;
    const double ly = top + 10.0 + 18.0 * static_cast<double>(m);
    out += "<path d=\"M" + f3(w - right + 12.0) + "," + f3(ly) + " L" + f3(w - right + 32.0) + "," + f3(ly) +
           "\" stroke=\"" + colors[m] + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + f3(w - right + 38.0) + "\" y=\"" + f3(ly + 4.0) + "\">" + methods()[m] + "</text>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace ksd::experiment
