#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "covlqr/bench.hpp"

namespace covlqr::bench {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

bool better(const CellSummary& a, const CellSummary& b) {
  if (a.stabilizing_percent != b.stabilizing_percent) {
    return a.stabilizing_percent > b.stabilizing_percent;
  }
  const double ma = a.median_gap.value_or(std::numeric_limits<double>::infinity());
  const double mb = b.median_gap.value_or(std::numeric_limits<double>::infinity());
  return ma < mb;
}

}  // namespace

void write_trials_csv(const std::filesystem::path& path, std::span<const TrialRecord> records) {
  auto out = open_out(path);
  out << "trial,seed,sigma,lambda,status,stabilizing,gap,snr_db,closed_loop_radius,solve_time_s\n";
  for (const auto& r : records) {
    out << r.trial_index << ',' << r.seed << ',' << num(r.sigma) << ',' << num(r.lambda) << ','
        << conic::to_string(r.status) << ',' << (r.stabilizing ? 1 : 0) << ',' << opt_num(r.gap)
        << ',' << num(r.snr_db) << ',' << num(r.closed_loop_radius) << ',' << num(r.solve_time)
        << '\n';
  }
}

void write_table1_csv(const std::filesystem::path& path, std::span<const CellSummary> cells) {
  auto out = open_out(path);
  out << "sigma,lambda,trials,S_percent,M_median,snr_db_lo,snr_db_hi,mean_solve_time_s\n";
  for (const auto& c : cells) {
    out << num(c.sigma) << ',' << num(c.lambda) << ',' << c.trials << ','
        << num(c.stabilizing_percent) << ',' << opt_num(c.median_gap) << ',' << num(c.snr_db_lo)
        << ',' << num(c.snr_db_hi) << ',' << num(c.mean_solve_time) << '\n';
  }
}

std::size_t best_cell(std::span<const CellSummary> row) {
  if (row.empty()) throw std::invalid_argument("best_cell: empty row");
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (better(row[i], row[best])) best = i;
  }
  return best;
}

std::string format_table1(std::span<const CellSummary> cells, bool ansi) {
  // Group by sigma, keeping first-seen order for rows and lambdas.
  std::vector<double> sigmas;
  std::vector<double> lambdas;
  for (const auto& c : cells) {
    if (std::find(sigmas.begin(), sigmas.end(), c.sigma) == sigmas.end()) sigmas.push_back(c.sigma);
    if (std::find(lambdas.begin(), lambdas.end(), c.lambda) == lambdas.end()) {
      lambdas.push_back(c.lambda);
    }
  }
  constexpr int width = 22;
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-8s %-16s", "sigma", "SNR (dB)");
  os << buf;
  for (double l : lambdas) {
    std::snprintf(buf, sizeof buf, "%*s", width, ("lambda=" + num(l)).c_str());
    os << buf;
  }
  os << '\n';

  for (double s : sigmas) {
    std::vector<CellSummary> row;
    for (double l : lambdas) {
      auto it = std::find_if(cells.begin(), cells.end(),
                             [&](const CellSummary& c) { return c.sigma == s && c.lambda == l; });
      if (it != cells.end()) row.push_back(*it);
    }
    if (row.empty()) continue;
    double lo = row.front().snr_db_lo;
    double hi = row.front().snr_db_hi;
    for (const auto& c : row) {
      lo = std::min(lo, c.snr_db_lo);
      hi = std::max(hi, c.snr_db_hi);
    }
    std::snprintf(buf, sizeof buf, "[%.2f, %.2f]", lo, hi);
    std::string snr = buf;
    std::snprintf(buf, sizeof buf, "%-8s %-16s", num(s).c_str(), snr.c_str());
    os << buf;
    const std::size_t best = best_cell(row);
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto& c = row[i];
      std::string m = c.median_gap ? num(*c.median_gap) : "-";
      if (m.size() > 7) {
        std::snprintf(buf, sizeof buf, "%.4g", *c.median_gap);
        m = buf;
      }
      std::snprintf(buf, sizeof buf, "S=%.0f%% M=%s", c.stabilizing_percent, m.c_str());
      std::string text = buf;
      std::string cell;
      std::snprintf(buf, sizeof buf, "%*s", width, i == best && !ansi ? ("*" + text + "*").c_str()
                                                                      : text.c_str());
      cell = buf;
      if (i == best && ansi) {
        const auto pos = cell.find_first_not_of(' ');
        cell = cell.substr(0, pos) + "\x1b[1m" + cell.substr(pos) + "\x1b[0m";
      }
      os << cell;
    }
    os << '\n';
  }
  return os.str();
}

void write_figure1_csv(const std::filesystem::path& path, std::span<const FigurePoint> points) {
  auto out = open_out(path);
  out << "lambda,S,M\n";
  for (const auto& p : points) {
    out << num(p.lambda) << ',' << num(p.summary.stabilizing_percent) << ','
        << opt_num(p.summary.median_gap) << '\n';
  }
}

void write_figure1_svg(const std::filesystem::path& path, std::span<const FigurePoint> points,
                       double sigma) {
  constexpr double W = 720, H = 440, left = 80, right = 80, top = 50, bottom = 70;
  const double pw = W - left - right;
  const double ph = H - top - bottom;

  std::optional<FigurePoint> baseline;
  std::vector<FigurePoint> swept;
  for (const auto& p : points) {
    if (p.lambda == 0.0) baseline = p;
    else if (p.lambda > 0.0) swept.push_back(p);
  }
  std::sort(swept.begin(), swept.end(),
            [](const FigurePoint& a, const FigurePoint& b) { return a.lambda < b.lambda; });

  double lx0 = -3, lx1 = 1;
  if (!swept.empty()) {
    lx0 = std::floor(std::log10(swept.front().lambda));
    lx1 = std::ceil(std::log10(swept.back().lambda));
    if (lx1 <= lx0) lx1 = lx0 + 1;
  }
  double s_lo = 100, m_hi = 0;
  for (const auto& p : points) {
    s_lo = std::min(s_lo, p.summary.stabilizing_percent);
    if (p.summary.median_gap) m_hi = std::max(m_hi, *p.summary.median_gap);
  }
  s_lo = std::max(0.0, std::floor(s_lo / 10.0) * 10.0 - 10.0);
  if (s_lo >= 100) s_lo = 90;
  m_hi = m_hi > 0 ? m_hi * 1.15 : 1.0;

  auto xmap = [&](double lambda) { return left + (std::log10(lambda) - lx0) / (lx1 - lx0) * pw; };
  auto ymap_s = [&](double s) { return top + (100.0 - s) / (100.0 - s_lo) * ph; };
  auto ymap_m = [&](double m) { return top + (1.0 - m / m_hi) * ph; };

  auto out = open_out(path);
  char buf[256];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
                "Stabilizing rate and median gap vs. lambda (sigma = %s)</text>\n",
                W / 2, num(sigma).c_str());
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                left, top, pw, ph);
  out << buf;

  // x ticks at decades
  for (int d = static_cast<int>(lx0); d <= static_cast<int>(lx1); ++d) {
    const double x = xmap(std::pow(10.0, d));
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%g\" x2=\"%.2f\" y2=\"%g\" stroke=\"#ddd\"/>"
                  "<text x=\"%.2f\" y=\"%g\" text-anchor=\"middle\">1e%d</text>\n",
                  x, top, x, top + ph, x, top + ph + 18, d);
    out << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">lambda (log scale)</text>\n",
                left + pw / 2, H - 20);
  out << buf;

  // left axis: S
  for (int i = 0; i <= 5; ++i) {
    const double s = s_lo + (100.0 - s_lo) * i / 5.0;
    const double y = ymap_s(s);
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%.2f\" text-anchor=\"end\" fill=\"#1f77b4\">%.0f</text>\n",
                  left - 6, y + 4, s);
    out << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"20\" y=\"%g\" fill=\"#1f77b4\" transform=\"rotate(-90 20 %g)\" "
                "text-anchor=\"middle\">S (%% stabilizing)</text>\n",
                top + ph / 2, top + ph / 2);
  out << buf;

  // right axis: M
  for (int i = 0; i <= 5; ++i) {
    const double m = m_hi * i / 5.0;
    const double y = ymap_m(m);
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%.2f\" fill=\"#d62728\">%.3g</text>\n", left + pw + 6, y + 4, m);
    out << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" fill=\"#d62728\" transform=\"rotate(90 %g %g)\" "
                "text-anchor=\"middle\">M (median gap)</text>\n",
                W - 20, top + ph / 2, W - 20, top + ph / 2);
  out << buf;

  auto polyline = [&](auto ymap, auto value, const char* color, const char* dash) {
    std::ostringstream pts;
    for (const auto& p : swept) {
      const auto v = value(p);
      if (!v) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", xmap(p.lambda), ymap(*v));
      pts << buf;
    }
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (dash ? std::string(" stroke-dasharray=\"") + dash + "\"" : std::string()) << " points=\""
        << pts.str() << "\"/>\n";
    for (const auto& p : swept) {
      const auto v = value(p);
      if (!v) continue;
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n",
                    xmap(p.lambda), ymap(*v), color);
      out << buf;
    }
  };
  polyline(ymap_s,
           [](const FigurePoint& p) { return std::optional<double>(p.summary.stabilizing_percent); },
           "#1f77b4", nullptr);
  polyline(ymap_m, [](const FigurePoint& p) { return p.summary.median_gap; }, "#d62728", "6,4");

  if (baseline) {
    const double ys = ymap_s(baseline->summary.stabilizing_percent);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%.2f\" x2=\"%g\" y2=\"%.2f\" stroke=\"#1f77b4\" "
                  "stroke-dasharray=\"2,3\"/>\n",
                  left, ys, left + pw, ys);
    out << buf;
    if (baseline->summary.median_gap) {
      const double ym = ymap_m(*baseline->summary.median_gap);
      std::snprintf(buf, sizeof buf,
                    "<line x1=\"%g\" y1=\"%.2f\" x2=\"%g\" y2=\"%.2f\" stroke=\"#d62728\" "
                    "stroke-dasharray=\"2,3\"/>\n",
                    left, ym, left + pw, ym);
      out << buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%.2f\" font-size=\"11\" fill=\"#555\">lambda = 0: "
                  "certainty-equivalent solution</text>\n",
                  left + 6, ys - 6);
    out << buf;
  }

  // legend
  const double lx = left + pw - 170, ly = top + ph - 44;
  char legend[1024];
  std::snprintf(legend, sizeof legend,
                "<rect x=\"%g\" y=\"%g\" width=\"164\" height=\"38\" fill=\"white\" stroke=\"#999\"/>\n"
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#1f77b4\" stroke-width=\"2\"/>"
                "<text x=\"%g\" y=\"%g\">S (left axis)</text>\n"
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#d62728\" stroke-width=\"2\" "
                "stroke-dasharray=\"6,4\"/><text x=\"%g\" y=\"%g\">M (right axis)</text>\n",
                lx, ly, lx + 6, ly + 12, lx + 30, ly + 12, lx + 36, ly + 16, lx + 6, ly + 28,
                lx + 30, ly + 28, lx + 36, ly + 32);
  out << legend;
  out << "</svg>\n";
}

}  // namespace covlqr::bench
