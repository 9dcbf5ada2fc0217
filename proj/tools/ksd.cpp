// ksd: command-line front end for the shape dictionary library.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ksd/baselines.hpp"
#include "ksd/experiment.hpp"
#include "ksd/io.hpp"
#include "ksd/learn.hpp"
#include "ksd/ormp.hpp"
#include "ksd/shapespace.hpp"
#include "ksd/svg.hpp"
#include "ksd/synth.hpp"

namespace {

using namespace ksd;
using io::json;

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
  return buf;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "ksd: warning: " << w << "\n";
}

struct Loaded {
  io::DatasetFile file;
  std::vector<PreShape> shapes;
};

Loaded load_data(const std::string& path) {
  Loaded out{io::load_dataset(path), {}};
  out.shapes = io::with_file_context(path, [&] { return io::to_preshapes(out.file); });
  return out;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    io::write_text_file(path, text);
  }
}

struct LearnArgs {
  LearnConfig cfg;
  std::string data, out, init;
};

void add_learn_options(CLI::App* cmd, LearnArgs& a) {
  cmd->add_option("--atoms", a.cfg.atoms, "number of atoms J")->required();
  cmd->add_option("--sparsity", a.cfg.sparsity, "atoms per code N0")->required();
  cmd->add_option("--iters", a.cfg.iterations, "iterations T")->capture_default_str();
  cmd->add_option("--seed", a.cfg.seed, "random seed")->capture_default_str();
  cmd->add_option("--threads", a.cfg.threads, "worker threads (0 = KSD_THREADS or all cores)");
  cmd->add_flag("--keep-last{false}", a.cfg.keep_best, "return the last iterate instead of the best one");
  cmd->add_option("data", a.data, "dataset file")->required();
  cmd->add_option("dict-out", a.out, "dictionary output file")->required();
}

void print_learn_summary(const LearnReport& r, const LearnConfig& cfg) {
  std::cout << "atoms " << cfg.atoms << ", sparsity " << cfg.sparsity << ", iterations " << cfg.iterations << ", seed "
            << cfg.seed << "\n";
  if (!r.loss_history.empty()) {
    std::cout << "loss: initial " << g17(r.loss_history.front()) << ", final " << g17(r.loss_history.back()) << "\n";
  }
  std::cout << "atom replacements: " << r.atom_replacements << "\n";
  std::cout << "final RMSE: " << pct(r.final_rmse) << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Sparse shape dictionaries in Kendall's shape space"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ksd 1.0.0");

  // preshape
  std::string pre_in, pre_out;
  auto* pre = app.add_subcommand("preshape", "center and normalize every configuration of a dataset");
  pre->add_option("in", pre_in)->required();
  pre->add_option("out", pre_out)->required();
  pre->callback([&] {
    const Loaded d = load_data(pre_in);
    io::save_dataset(io::dataset_from_preshapes(d.file.metric, d.shapes, d.file.labels), pre_out);
    std::cout << d.shapes.size() << " pre-shapes written\n";
  });

  // learn
  LearnArgs la;
  auto* learn_cmd = app.add_subcommand("learn", "learn a complex-weight shape dictionary");
  add_learn_options(learn_cmd, la);
  learn_cmd->add_option("--batch", la.cfg.batch_size, "codes refreshed per iteration (0 = all)");
  learn_cmd->add_option("--dead-threshold", la.cfg.dead_atom_usage_threshold,
                        "replace atoms used at most this many times");
  learn_cmd->add_flag("--warm-start", la.cfg.warm_start, "keep previous supports when they fit better");
  learn_cmd->add_option("--init", la.init, "initial dictionary file");
  learn_cmd->callback([&] {
    const Loaded d = load_data(la.data);
    std::optional<Dictionary> init;
    if (!la.init.empty()) init = io::load_dictionary(la.init).dictionary;
    const LearnResult r = learn(d.shapes, la.cfg, init);
    warn(r.report.warnings);
    io::DictionaryFile f{r.dictionary, false, la.cfg, r.report.loss_history, r.report.final_rmse,
                         r.report.atom_replacements, std::nullopt};
    io::write_json_file(la.out, io::dictionary_to_json(f));
    print_learn_summary(r.report, la.cfg);
  });

  // align-first
  LearnArgs af;
  auto* af_cmd = app.add_subcommand("align-first", "align along the mean shape, then learn real weights");
  add_learn_options(af_cmd, af);
  af_cmd->callback([&] {
    const Loaded d = load_data(af.data);
    const AlignFirstResult r = align_first_learn(d.shapes, af.cfg);
    warn(r.report.warnings);
    io::DictionaryFile f{r.dictionary, true, af.cfg, r.report.loss_history, r.report.final_rmse,
                         r.report.atom_replacements, r.reference.vector()};
    io::write_json_file(af.out, io::dictionary_to_json(f));
    print_learn_summary(r.report, af.cfg);
  });

  // code
  Index code_n0 = 0;
  unsigned code_threads = 0;
  std::string code_dict, code_data, code_out;
  auto* code_cmd = app.add_subcommand("code", "sparse-code a dataset against a dictionary");
  code_cmd->add_option("--sparsity", code_n0, "atoms per code N0")->required();
  code_cmd->add_option("--threads", code_threads, "worker threads");
  code_cmd->add_option("dict", code_dict)->required();
  code_cmd->add_option("data", code_data)->required();
  code_cmd->add_option("codes-out", code_out)->required();
  code_cmd->callback([&] {
    const io::DictionaryFile f = io::load_dictionary(code_dict);
    const Loaded d = load_data(code_data);
    if (!same_geometry(*f.dictionary.metric(), *d.file.metric)) throw UsageError("dataset and dictionary use different metrics");
    if (code_n0 < 1 || code_n0 > f.dictionary.size()) throw UsageError("--sparsity must lie in [1, J]");
    // Rebind the data to the dictionary's metric handle.
    std::vector<PreShape> shapes;
    for (const PreShape& p : d.shapes) shapes.push_back(preshape(p.vector(), f.dictionary.metric()));
    io::CodesFile out;
    out.metric = f.dictionary.metric();
    out.atoms = f.dictionary.size();
    out.real_weights = f.real_weights;
    out.codes.resize(shapes.size());
    if (f.real_weights) {
      if (!f.reference) throw DataError(code_dict + ": real-weight dictionary without a reference shape");
      const PreShape ref = preshape(*f.reference, f.dictionary.metric());
      const AlignFirstCodes c = align_first_code(shapes, f.dictionary, ref, code_n0, code_threads);
      for (std::size_t k = 0; k < shapes.size(); ++k) {
        out.shapes.push_back(c.aligned[k].vector());
        const RealSparseCode& rc = c.codes[k];
        out.codes[k].support = rc.support;
        out.codes[k].coefficients.assign(rc.coefficients.begin(), rc.coefficients.end());
        out.codes[k].residual_norm = rc.residual_norm;
      }
    } else {
      const CMatrix gram = f.dictionary.gram();
      parallel_for(static_cast<Index>(shapes.size()), resolve_threads(code_threads), [&](Index k) {
        out.codes[static_cast<std::size_t>(k)] = ormp_cholesky(shapes[static_cast<std::size_t>(k)], f.dictionary, gram, code_n0);
      });
      for (const PreShape& p : shapes) out.shapes.push_back(p.vector());
    }
    io::write_json_file(code_out, io::codes_to_json(out));
    double e = 0.0;
    for (const SparseCode& c : out.codes) e += c.residual_norm * c.residual_norm;
    std::cout << out.codes.size() << " codes written, RMSE: "
              << pct(out.codes.empty() ? 0.0 : std::sqrt(e / static_cast<double>(out.codes.size()))) << "\n";
  });

  // reconstruct
  std::string rec_dict, rec_codes, rec_out;
  auto* rec = app.add_subcommand("reconstruct", "reconstruct coded shapes and report errors in percent");
  rec->add_option("dict", rec_dict)->required();
  rec->add_option("codes", rec_codes)->required();
  rec->add_option("out", rec_out)->required();
  rec->callback([&] {
    const io::DictionaryFile f = io::load_dictionary(rec_dict);
    const io::CodesFile c = io::load_codes(rec_codes);
    if (c.atoms != f.dictionary.size()) throw DataError(rec_codes + ": codes refer to " + std::to_string(c.atoms) + " atoms, dictionary has " + std::to_string(f.dictionary.size()));
    if (!same_geometry(*c.metric, *f.dictionary.metric())) throw DataError(rec_codes + ": metric differs from the dictionary's");
    io::ReconstructionFile out;
    out.metric = f.dictionary.metric();
    double e = 0.0;
    for (std::size_t k = 0; k < c.codes.size(); ++k) {
      const Reconstruction r = reconstruct(f.dictionary, c.codes[k]);
      const double err = out.metric->norm(CVector(c.shapes[k] - r.raw));
      e += err * err;
      out.originals.push_back(c.shapes[k]);
      out.reconstructions.push_back(r.raw);
      out.errors_percent.push_back(100.0 * err);
    }
    out.rmse = c.codes.empty() ? 0.0 : std::sqrt(e / static_cast<double>(c.codes.size()));
    io::write_json_file(rec_out, io::reconstruction_to_json(out));
    std::cout << c.codes.size() << " reconstructions, RMSE: " << pct(out.rmse) << "\n";
  });

  // mean
  std::string mean_data, mean_out;
  auto* mean_cmd = app.add_subcommand("mean", "Frechet mean shape for the full Procrustes distance");
  mean_cmd->add_option("data", mean_data)->required();
  mean_cmd->add_option("--out", mean_out, "write the mean as a one-shape dataset");
  mean_cmd->callback([&] {
    const Loaded d = load_data(mean_data);
    const FrechetMean m = frechet_mean(d.shapes);
    if (!m.unique) std::cerr << "ksd: warning: the mean is not unique (top eigenvalue is repeated)\n";
    std::cout << "top eigenvalue: " << g17(m.eigenvalues(0)) << "\n";
    if (m.eigenvalues.size() > 1) std::cout << "second eigenvalue: " << g17(m.eigenvalues(1)) << "\n";
    std::cout << "unique: " << (m.unique ? "yes" : "no") << "\n";
    if (!mean_out.empty()) io::save_dataset(io::dataset_from_preshapes(d.file.metric, {m.mean}, {"mean"}), mean_out);
  });

  // dist
  std::string dist_kind = "full", dist_data, dist_out;
  auto* dist = app.add_subcommand("dist", "pairwise shape distances as CSV");
  dist->add_option("--metric", dist_kind, "full, partial or geodesic")
      ->check(CLI::IsMember({"full", "partial", "geodesic"}))
      ->capture_default_str();
  dist->add_option("data", dist_data)->required();
  dist->add_option("--out", dist_out, "CSV file (default stdout)");
  dist->callback([&] {
    const Loaded d = load_data(dist_data);
    std::string csv = "i,j,distance\n";
    for (std::size_t i = 0; i < d.shapes.size(); ++i) {
      for (std::size_t j = i + 1; j < d.shapes.size(); ++j) {
        const double v = dist_kind == "full"      ? dist_full(d.shapes[i], d.shapes[j])
                         : dist_kind == "partial" ? dist_partial(d.shapes[i], d.shapes[j])
                                                  : dist_geodesic(d.shapes[i], d.shapes[j]);
        csv += std::to_string(i) + "," + std::to_string(j) + "," + g17(v) + "\n";
      }
    }
    write_output(dist_out, csv);
  });

  // pca
  Index pca_modes = 0;
  bool pca_keep = false;
  std::string pca_data, pca_out;
  auto* pca = app.add_subcommand("pca", "complex PCA and its RMSE per number of modes");
  pca->add_option("--modes", pca_modes, "number of modes J")->required();
  pca->add_flag("--keep-mean", pca_keep, "do not subtract the dataset mean");
  pca->add_option("data", pca_data)->required();
  pca->add_option("--out", pca_out, "write modes and eigenvalues as JSON");
  pca->callback([&] {
    const Loaded d = load_data(pca_data);
    std::vector<CVector> raw;
    for (const PreShape& p : d.shapes) raw.push_back(p.vector());
    const PcaModel m = complex_pca(raw, d.file.metric, pca_modes, !pca_keep);
    std::cout << "modes,eigenvalue,rmse_percent\n";
    for (Index j = 1; j <= pca_modes; ++j) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", 100.0 * m.rmse(j));
      std::cout << j << "," << g17(m.eigenvalues(j - 1)) << "," << buf << "\n";
    }
    if (!pca_out.empty()) {
      json j;
      j["format"] = "ksd-pca";
      j["metric"] = io::metric_to_json(*d.file.metric);
      j["mean_subtracted"] = m.mean_subtracted;
      j["dataset_mean"] = io::detail::to_json(m.dataset_mean);
      j["eigenvalues"] = std::vector<double>(m.eigenvalues.data(), m.eigenvalues.data() + m.eigenvalues.size());
      json modes = json::array();
      for (Index c = 0; c < m.modes.cols(); ++c) modes.push_back(io::detail::to_json(CVector(m.modes.col(c))));
      j["modes"] = modes;
      j["total_energy"] = m.total_energy;
      j["samples"] = m.samples;
      io::write_json_file(pca_out, j);
    }
  });

  // synth
  std::string synth_spec, synth_out;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "generate a synthetic shape dataset");
  synth->add_option("--spec", synth_spec, "JSON spec file")->required();
  synth->add_option("--seed", synth_seed, "override the spec's seed");
  synth->add_option("out", synth_out)->required();
  synth->callback([&] {
    SynthSpec s = io::load_synth_spec(synth_spec);
    if (synth_seed) s.seed = *synth_seed;
    const SynthDataset ds = make_dataset(s);
    io::save_dataset(io::dataset_from_preshapes(ds.metric, ds.shapes, ds.labels), synth_out);
    std::cout << ds.shapes.size() << " shapes written\n";
  });

  // render
  std::string render_in, render_out;
  svg::Options ropt;
  bool render_open = false;
  std::size_t render_limit = 0;
  auto* render = app.add_subcommand("render", "draw shapes, atoms or reconstructions as SVG");
  render->add_option("shapes", render_in, "dataset, dictionary, codes or reconstruction file")->required();
  render->add_option("svg-out", render_out)->required();
  render->add_option("--columns", ropt.columns, "shapes per row")->capture_default_str();
  render->add_option("--samples", ropt.curve_samples, "samples per B-spline curve")->capture_default_str();
  render->add_option("--limit", render_limit, "draw at most this many shapes (0 = all)");
  render->add_flag("--open", render_open, "draw landmark polylines open");
  render->add_flag("--points", ropt.show_points, "mark every point");
  render->callback([&] {
    ropt.closed = !render_open;
    const json j = io::read_json_file(render_in);
    const std::string format = j.is_object() && j.contains("format") && j["format"].is_string() ? j["format"].get<std::string>() : "";
    auto cut = [&](std::vector<CVector> v) {
      if (render_limit > 0 && v.size() > render_limit) v.resize(render_limit);
      return v;
    };
    std::string doc;
    io::with_file_context(render_in, [&] {
      if (format == "ksd-dataset") {
        const io::DatasetFile d = io::dataset_from_json(j);
        doc = svg::render(cut(d.shapes), *d.metric, ropt);
      } else if (format == "ksd-dictionary") {
        const io::DictionaryFile f = io::dictionary_from_json(j);
        std::vector<CVector> atoms;
        for (Index a = 0; a < f.dictionary.size(); ++a) atoms.push_back(f.dictionary.atoms().col(a));
        doc = svg::render(cut(atoms), *f.dictionary.metric(), ropt);
      } else if (format == "ksd-codes") {
        const io::CodesFile c = io::codes_from_json(j);
        doc = svg::render(cut(c.shapes), *c.metric, ropt);
      } else if (format == "ksd-reconstruction") {
        const io::ReconstructionFile r = io::reconstruction_from_json(j);
        doc = svg::render_overlay(cut(r.originals), cut(r.reconstructions), *r.metric, ropt);
      } else {
        throw DataError("/format: not a renderable ksd file");
      }
      return 0;
    });
    io::write_text_file(render_out, doc);
  });

  // compare
  std::string cmp_sweep, cmp_data, cmp_out;
  Index cmp_atoms = 10, cmp_iters = 30;
  std::uint64_t cmp_seed = 0;
  bool cmp_keep = false;
  unsigned cmp_threads = 0;
  auto* cmp = app.add_subcommand("compare", "RMSE of PCA, align-first and 2DKSD over a sparsity range (CSV)");
  cmp->add_option("--sweep-sparsity", cmp_sweep, "N0 range a..b")->required();
  cmp->add_option("--atoms", cmp_atoms, "atoms J")->capture_default_str();
  cmp->add_option("--iters", cmp_iters, "iterations T")->capture_default_str();
  cmp->add_option("--seed", cmp_seed, "random seed")->capture_default_str();
  cmp->add_option("--threads", cmp_threads, "worker threads");
  cmp->add_flag("--keep-mean", cmp_keep, "PCA without mean subtraction");
  cmp->add_option("data", cmp_data)->required();
  cmp->add_option("--out", cmp_out, "CSV file (default stdout)");
  cmp->callback([&] {
    const std::vector<Index> sweep = io::parse_sweep(cmp_sweep);
    if (sweep.back() > cmp_atoms) throw UsageError("the sparsity range exceeds --atoms");
    const Loaded d = load_data(cmp_data);
    write_output(cmp_out, experiment::rows_csv(experiment::compare(d.shapes, sweep, cmp_atoms, cmp_iters, cmp_seed,
                                                                   cmp_keep, cmp_threads)));
  });

  // sweep
  std::string sweep_spec, sweep_dir;
  auto* sweep = app.add_subcommand("sweep", "scripted experiment: synthetic data, all methods, several seeds");
  sweep->add_option("--spec", sweep_spec, "experiment spec JSON")->required();
  sweep->add_option("out-dir", sweep_dir)->required();
  sweep->callback([&] {
    const experiment::ExperimentSpec spec = io::load_experiment_spec(sweep_spec);
    const std::vector<experiment::Row> rows = experiment::run_sweep(spec);
    const std::vector<experiment::Summary> sums = experiment::summarize(rows);
    std::error_code ec;
    std::filesystem::create_directories(sweep_dir, ec);
    if (ec) throw DataError(sweep_dir + ": " + ec.message());
    io::write_text_file(sweep_dir + "/rows.csv", experiment::rows_csv(rows));
    io::write_text_file(sweep_dir + "/summary.csv", experiment::summary_csv(sums));
    io::write_text_file(sweep_dir + "/rmse.svg", experiment::plot_svg(sums));
    std::cout << experiment::summary_csv(sums);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ksd: error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ksd::Error& e) {
    std::cerr << "ksd: error: " << e.what() << "\n";
    return ksd::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "ksd: error: " << e.what() << "\n";
    return 1;
  }
}
