#pragma once

// SVG figures: a grid of shapes, optionally with reconstructions drawn over
// the originals. Output bytes depend only on the input.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "ksd/bspline.hpp"
#include "ksd/configspace.hpp"
#include "ksd/error.hpp"
#include "ksd/linalg.hpp"

namespace ksd::svg {

struct Options {
  Index columns = 5;
  double cell = 120.0;      ///< cell edge in px
  double padding = 10.0;    ///< px between the shape and the cell border
  Index curve_samples = 200;
  bool closed = true;       ///< landmark polylines are closed
  bool show_points = false; ///< mark landmarks with small circles
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  return s == "-0.000" ? "0.000" : s;
}

// Points of the drawn outline: landmarks as given, B-spline curves sampled.
inline std::vector<cplx> outline(const CVector& z, const Metric& metric, const Options& opt) {
  if (metric.kind() == MetricKind::bspline_closed) return sample_curve(z, metric.spline_basis(), opt.curve_samples);
  return {z.data(), z.data() + z.size()};
}

struct Box {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -std::numeric_limits<double>::infinity();
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();
  void add(const std::vector<cplx>& pts) {
    for (const cplx& p : pts) {
      xmin = std::min(xmin, p.real());
      xmax = std::max(xmax, p.real());
      ymin = std::min(ymin, p.imag());
      ymax = std::max(ymax, p.imag());
    }
  }
};

class Canvas {
 public:
  Canvas(Index count, const Options& opt) : opt_(opt) {
    if (count < 1) throw UsageError("nothing to render");
    if (opt.columns < 1 || !(opt.cell > 2.0 * opt.padding)) throw UsageError("invalid render layout");
    cols_ = std::min(opt.columns, count);
    rows_ = (count + cols_ - 1) / cols_;
    body_ += header();
  }

  // Draws one cell; every layer shares the cell's scale so overlays align.
  void cell(Index idx, const std::vector<std::vector<cplx>>& layers, const std::vector<std::string>& classes) {
    Box box;
    for (const auto& l : layers) box.add(l);
    const double w = std::max(box.xmax - box.xmin, 1e-12);
    const double h = std::max(box.ymax - box.ymin, 1e-12);
    const double avail = opt_.cell - 2.0 * opt_.padding;
    const double scale = avail / std::max(w, h);
    const double ox = static_cast<double>(idx % cols_) * opt_.cell + opt_.padding + 0.5 * (avail - scale * w);
    const double oy = static_cast<double>(idx / cols_) * opt_.cell + opt_.padding + 0.5 * (avail - scale * h);
    body_ += "<g id=\"shape-" + std::to_string(idx) + "\">\n";
    for (std::size_t l = 0; l < layers.size(); ++l) {
      std::string d;
      for (std::size_t i = 0; i < layers[l].size(); ++i) {
        const double x = ox + scale * (layers[l][i].real() - box.xmin);
        const double y = oy + scale * (box.ymax - layers[l][i].imag());
        d += (i == 0 ? "M" : " L") + fmt(x) + "," + fmt(y);
      }
      if (opt_.closed) d += " Z";
      body_ += "<path class=\"" + classes[l] + "\" d=\"" + d + "\"/>\n";
      if (opt_.show_points) {
        for (const cplx& p : layers[l]) {
          body_ += "<circle class=\"" + classes[l] + "\" cx=\"" + fmt(ox + scale * (p.real() - box.xmin)) + "\" cy=\"" +
                   fmt(oy + scale * (box.ymax - p.imag())) + "\" r=\"1.500\"/>\n";
        }
      }
    }
    body_ += "</g>\n";
  }

  std::string finish() const { return body_ + "</svg>\n"; }

 private:
  std::string header() const {
    const std::string width = fmt(static_cast<double>(cols_) * opt_.cell);
    const std::string height = fmt(static_cast<double>(rows_) * opt_.cell);
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + width + "\" height=\"" + height +
           "\" viewBox=\"0 0 " + width + " " + height + "\">\n"
           "<style>path{fill:none;stroke-width:1.5}circle{stroke:none}"
           ".shape{stroke:#000000}.original{stroke:#999999}.reconstruction{stroke:#1f4fd8}"
           "circle.shape{fill:#000000}circle.original{fill:#999999}circle.reconstruction{fill:#1f4fd8}</style>\n"
           "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  }

  Options opt_;
  Index cols_ = 1;
  Index rows_ = 1;
  std::string body_;
};

}  // namespace detail

/// One path per shape (or atom), laid out on a grid.
inline std::string render(const std::vector<CVector>& shapes, const Metric& metric, const Options& opt = {}) {
  detail::Canvas canvas(static_cast<Index>(shapes.size()), opt);
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    ksd::detail::check_dims(shapes[k].size(), metric.dim(), "render");
    canvas.cell(static_cast<Index>(k), {detail::outline(shapes[k], metric, opt)}, {"shape"});
  }
  return canvas.finish();
}

/// Reconstruction (blue) over the original (gray), one cell per pair.
inline std::string render_overlay(const std::vector<CVector>& originals, const std::vector<CVector>& reconstructions,
                                  const Metric& metric, const Options& opt = {}) {
  if (originals.size() != reconstructions.size()) throw UsageError("overlay needs one reconstruction per original");
  detail::Canvas canvas(static_cast<Index>(originals.size()), opt);
  for (std::size_t k = 0; k < originals.size(); ++k) {
    ksd::detail::check_dims(originals[k].size(), metric.dim(), "render");
    ksd::detail::check_dims(reconstructions[k].size(), metric.dim(), "render");
    canvas.cell(static_cast<Index>(k),
                {detail::outline(originals[k], metric, opt), detail::outline(reconstructions[k], metric, opt)},
                {"original", "reconstruction"});
  }
  return canvas.finish();
}

}  // namespace ksd::svg
