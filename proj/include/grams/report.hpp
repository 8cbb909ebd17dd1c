#pragma once

// Report emission: trajectory CSVs with locale-free shortest round-trip
// number rendering, the comparison ranking text, a hand-built SVG chart, and
// byte-exact file writing.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "grams/runner.hpp"
#include "grams/trajectory.hpp"

namespace grams {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest decimal form that parses back to the same bits; never more than
// 17 significant digits, never locale-dependent.
inline std::string fmt_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string fmt_fixed(double x, int precision) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kTrajectoryHeader =
    "step,optimizer,loss,grad_norm,dist_to_opt,effective_lr";

inline std::string trajectory_csv(const std::vector<TrajectoryRecord>& trajectory,
                                  const std::string& optimizer) {
  std::string out = kTrajectoryHeader;
  out += '\n';
  for (const TrajectoryRecord& r : trajectory) {
    out += std::to_string(r.step);
    out += ',';
    out += optimizer;
    out += ',';
    out += fmt_double(r.loss);
    out += ',';
    out += fmt_double(r.grad_norm);
    out += ',';
    if (!std::isnan(r.dist_to_opt)) out += fmt_double(r.dist_to_opt);
    out += ',';
    out += fmt_double(r.effective_lr);
    out += '\n';
  }
  return out;
}

// Same schema as the run CSV plus H and variant columns; rows from step 0.
inline std::string ham_csv(const HamResult& res, const std::string& variant, double dt) {
  std::string out = kTrajectoryHeader;
  out += ",H,variant\n";
  const Objective& loss = res.system.loss;
  long step = 0;
  for (const HamRecord& r : res.trajectory.records) {
    out += std::to_string(step++);
    out += ',';
    out += variant;
    out += ',';
    out += fmt_double(r.loss);
    out += ',';
    out += fmt_double(norm(loss.gradient(r.w)));
    out += ',';
    if (loss.w_star) out += fmt_double(distance(r.w, *loss.w_star));
    out += ',';
    out += fmt_double(dt);
    out += ',';
    out += fmt_double(r.H);
    out += ',';
    out += variant;
    out += '\n';
  }
  return out;
}

inline std::string ranking_text(const CompareResult& cmp) {
  auto ranked = [&](auto key) {
    std::vector<std::pair<std::string, double>> rows;
    for (const auto& [name, run] : cmp.runs) rows.emplace_back(name, key(run.summary));
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
    return rows;
  };
  std::string out = "ranking by final loss:\n";
  int place = 1;
  for (const auto& [name, v] : ranked([](const RunSummary& s) { return s.final_loss; }))
    out += "  " + std::to_string(place++) + ". " + name + "  " + fmt_double(v) + "\n";
  out += "ranking by final dist_to_opt:\n";
  place = 1;
  for (const auto& [name, v] : ranked([](const RunSummary& s) { return s.final_dist; }))
    out += "  " + std::to_string(place++) + ". " + name + "  " + fmt_double(v) + "\n";
  out += std::string("grams at or below every baseline on both metrics: ") +
         (cmp.ordering_ok ? "yes" : "NO - ORDERING VIOLATION") + "\n";
  return out;
}

namespace detail {

struct Panel {
  double x0, y0, width, height;  // plot area in SVG user units
};

inline double map_range(double v, double lo, double hi, double out0, double out1) {
  if (hi <= lo) return out0;
  return out0 + (v - lo) / (hi - lo) * (out1 - out0);
}

inline void polyline(std::string& svg, const std::vector<std::pair<double, double>>& pts,
                     const char* color) {
  svg += "<polyline fill=\"none\" stroke=\"";
  svg += color;
  svg += "\" stroke-width=\"1.5\" points=\"";
  for (const auto& [x, y] : pts) {
    svg += fmt_fixed(x, 2);
    svg += ',';
    svg += fmt_fixed(y, 2);
    svg += ' ';
  }
  svg += "\"/>\n";
}

inline void text_at(std::string& svg, double x, double y, const std::string& s,
                    const char* anchor = "middle", int size = 11) {
  svg += "<text x=\"" + fmt_fixed(x, 1) + "\" y=\"" + fmt_fixed(y, 1) + "\" font-size=\"" +
         std::to_string(size) +
         "\" font-family=\"sans-serif\" fill=\"#333\" text-anchor=\"" + anchor + "\">" + s +
         "</text>\n";
}

}  // namespace detail

// Two stacked panels over the five runs: log10 of the loss per step, and
// distance to the optimum per step.
inline std::string compare_svg(const CompareResult& cmp) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  const double W = 880.0, H = 660.0;
  const detail::Panel panels[2] = {{70.0, 40.0, 760.0, 250.0}, {70.0, 370.0, 760.0, 250.0}};
  const char* titles[2] = {"log10 loss per step", "distance to optimum per step"};

  long max_step = 1;
  double lo[2] = {1e300, 1e300}, hi[2] = {-1e300, -1e300};
  auto loss_y = [](const TrajectoryRecord& r) {
    return std::log10(std::max(r.loss, 1e-18));
  };
  for (const auto& [name, run] : cmp.runs) {
    for (const TrajectoryRecord& r : run.trajectory) {
      max_step = std::max(max_step, r.step);
      const double ys[2] = {loss_y(r), r.dist_to_opt};
      for (int p = 0; p < 2; ++p) {
        lo[p] = std::min(lo[p], ys[p]);
        hi[p] = std::max(hi[p], ys[p]);
      }
    }
  }
  for (int p = 0; p < 2; ++p) {
    if (hi[p] <= lo[p]) hi[p] = lo[p] + 1.0;
    const double pad = 0.04 * (hi[p] - lo[p]);
    lo[p] -= pad;
    hi[p] += pad;
  }

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
                    fmt_fixed(W, 0) + " " + fmt_fixed(H, 0) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int p = 0; p < 2; ++p) {
    const detail::Panel& pa = panels[p];
    svg += "<rect x=\"" + fmt_fixed(pa.x0, 1) + "\" y=\"" + fmt_fixed(pa.y0, 1) +
           "\" width=\"" + fmt_fixed(pa.width, 1) + "\" height=\"" + fmt_fixed(pa.height, 1) +
           "\" fill=\"none\" stroke=\"#999\"/>\n";
    detail::text_at(svg, pa.x0 + pa.width / 2, pa.y0 - 12, titles[p]);
    for (int tick = 0; tick <= 4; ++tick) {
      const double frac = tick / 4.0;
      const double yval = lo[p] + frac * (hi[p] - lo[p]);
      const double y = detail::map_range(yval, lo[p], hi[p], pa.y0 + pa.height, pa.y0);
      detail::text_at(svg, pa.x0 - 8, y + 4, fmt_fixed(yval, 2), "end", 10);
      const double xval = 1.0 + frac * static_cast<double>(max_step - 1);
      const double x = detail::map_range(xval, 1.0, static_cast<double>(max_step), pa.x0,
                                         pa.x0 + pa.width);
      detail::text_at(svg, x, pa.y0 + pa.height + 16, fmt_fixed(xval, 0), "middle", 10);
    }
    int color_idx = 0;
    for (const auto& [name, run] : cmp.runs) {
      std::vector<std::pair<double, double>> pts;
      pts.reserve(run.trajectory.size());
      for (const TrajectoryRecord& r : run.trajectory) {
        const double yval = (p == 0) ? loss_y(r) : r.dist_to_opt;
        pts.emplace_back(detail::map_range(static_cast<double>(r.step), 1.0,
                                           static_cast<double>(max_step), pa.x0,
                                           pa.x0 + pa.width),
                         detail::map_range(yval, lo[p], hi[p], pa.y0 + pa.height, pa.y0));
      }
      detail::polyline(svg, pts, kColors[color_idx++ % 5]);
    }
  }

  double lx = panels[0].x0;
  int color_idx = 0;
  for (const auto& [name, run] : cmp.runs) {
    svg += "<rect x=\"" + fmt_fixed(lx, 1) + "\" y=\"" + fmt_fixed(H - 24, 1) +
           "\" width=\"12\" height=\"12\" fill=\"" + kColors[color_idx++ % 5] + "\"/>\n";
    detail::text_at(svg, lx + 18, H - 14, name, "start");
    lx += 130.0;
  }
  svg += "</svg>\n";
  return svg;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  f.flush();
  if (!f) throw IoError("write failed: " + path.string());
}

inline std::filesystem::path ensure_out_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw IoError("cannot create output directory: " + dir);
  return p;
}

}  // namespace grams
