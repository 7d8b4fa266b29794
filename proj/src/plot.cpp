#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "artifacts.hpp"
#include "nstraj/diagnostics.hpp"
#include "nstraj/experiment.hpp"

namespace nstraj {

namespace {

namespace fs = std::filesystem;

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

const char* const kPalette[] = {"#1b6ca8", "#d1495b", "#2e933c", "#edae49", "#6a4c93", "#00798c", "#8d6a9f",
                                "#555555"};

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '<') out += "&lt;";
    else if (ch == '>') out += "&gt;";
    else if (ch == '&') out += "&amp;";
    else out += ch;
  }
  return out;
}

// Log-log line plot; nonpositive or nonfinite points are dropped.
void write_loglog(const fs::path& path, const std::string& title, const std::string& xlabel,
                  const std::string& ylabel, const std::vector<Series>& series) {
  constexpr double W = 720, H = 480, L = 80, R = 190, T = 40, B = 60;
  double x0 = std::numeric_limits<double>::infinity(), x1 = 0, y0 = x0, y1 = 0;
  auto usable = [](double v) { return std::isfinite(v) && v > 0.0; };
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i]) || !usable(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x1 > 0.0)) x0 = 0.1, x1 = 10.0, y0 = 0.1, y1 = 10.0;
  const double lx0 = std::floor(std::log10(x0)), lx1 = std::max(lx0 + 1, std::ceil(std::log10(x1)));
  const double ly0 = std::floor(std::log10(y0)), ly1 = std::max(ly0 + 1, std::ceil(std::log10(y1)));
  auto px = [&](double x) { return L + (std::log10(x) - lx0) / (lx1 - lx0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (std::log10(y) - ly0) / (ly1 - ly0) * (H - T - B); };

  std::ofstream out(path);
  out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">)",
                     W, H)
      << '\n';
  out << fmt::format(R"(<rect width="{}" height="{}" fill="white"/>)", W, H) << '\n';
  out << fmt::format(R"(<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>)", (W - R + L) / 2,
                     escape(title))
      << '\n';
  for (double e = lx0; e <= lx1 + 1e-9; e += 1) {
    const double x = px(std::pow(10.0, e));
    out << fmt::format(R"(<line x1="{:.1f}" y1="{}" x2="{:.1f}" y2="{}" stroke="#ddd"/>)", x, T, x, H - B) << '\n';
    out << fmt::format(R"(<text x="{:.1f}" y="{}" text-anchor="middle">1e{}</text>)", x, H - B + 18, e) << '\n';
  }
  for (double e = ly0; e <= ly1 + 1e-9; e += 1) {
    const double y = py(std::pow(10.0, e));
    out << fmt::format(R"(<line x1="{}" y1="{:.1f}" x2="{}" y2="{:.1f}" stroke="#ddd"/>)", L, y, W - R, y) << '\n';
    out << fmt::format(R"(<text x="{}" y="{:.1f}" text-anchor="end">1e{}</text>)", L - 6, y + 4, e) << '\n';
  }
  out << fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>)", L, T, W - L - R,
                     H - T - B)
      << '\n';
  out << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">{}</text>)", (W - R + L) / 2, H - 16,
                     escape(xlabel))
      << '\n';
  out << fmt::format(R"svg(<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>)svg",
                     (H - B + T) / 2, (H - B + T) / 2, escape(ylabel))
      << '\n';
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i]) || !usable(s.y[i])) continue;
      pts += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), py(s.y[i]));
    }
    out << fmt::format(R"(<polyline fill="none" stroke="{}" stroke-width="1.6"{} points="{}"/>)", color,
                       s.dashed ? R"( stroke-dasharray="6 4")" : "", pts)
        << '\n';
    const double ly = T + 14 + 18.0 * static_cast<double>(k);
    out << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2"{}/>)", W - R + 12, ly,
                       W - R + 36, ly, color, s.dashed ? R"( stroke-dasharray="6 4")" : "")
        << '\n';
    out << fmt::format(R"(<text x="{}" y="{}">{}</text>)", W - R + 42, ly + 4, escape(s.label)) << '\n';
  }
  out << "</svg>\n";
}

std::string slug(std::string s) {
  for (char& ch : s) {
    if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
  }
  return s;
}

// norms*.csv -> one plot per weighted norm t^{s-1/2} ||D^s u||
void plot_norms(const fs::path& dir, const fs::path& file, std::vector<fs::path>& written) {
  const auto table = detail::read_csv(file);
  const auto t = table.numbers("t");
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    const std::string name = table.header[c];
    const double s = std::strtod(name.substr(name.find('^') + 1).c_str(), nullptr);
    const double w = s - 0.5;
    Series weighted{fmt::format("t^{} {}", w, name), t, table.numbers(name)};
    Series raw{name, t, table.numbers(name), true};
    for (std::size_t i = 0; i < t.size(); ++i) weighted.y[i] *= std::pow(t[i], w);
    const auto out = dir / fmt::format("bound_{}_{}.svg", file.stem().string(), slug(name));
    write_loglog(out, fmt::format("t^{} {} ({})", w, name, file.filename().string()), "t", "norm", {weighted, raw});
    written.push_back(out);
  }
}

void plot_separations(const fs::path& dir, std::vector<fs::path>& written) {
  const auto table = detail::read_csv(dir / "separations.csv");
  std::map<std::string, std::pair<Series, Series>> pairs;
  const auto run = table.column("run");
  const auto eps = table.column("epsilon");
  for (const auto& r : table.rows) {
    const std::string key = r[run] + " eps=" + r[eps];
    auto& [eta, env] = pairs[key];
    eta.label = key + " eta";
    env.label = key + " envelope";
    env.dashed = true;
    const double t = std::strtod(r[table.column("t")].c_str(), nullptr);
    eta.x.push_back(t);
    eta.y.push_back(std::strtod(r[table.column("eta")].c_str(), nullptr));
    env.x.push_back(t);
    env.y.push_back(std::strtod(r[table.column("envelope")].c_str(), nullptr));
  }
  std::vector<Series> all;
  for (auto& [key, p] : pairs) {
    if (key.starts_with("validation")) continue;
    all.push_back(p.first);
    all.push_back(p.second);
  }
  const auto out = dir / "separation_vs_envelope.svg";
  write_loglog(out, "separation vs envelope (calibration run)", "t", "eta", all);
  written.push_back(out);
}

void plot_gt(const fs::path& dir, std::vector<fs::path>& written) {
  const auto table = detail::read_csv(dir / "gt.csv");
  std::vector<Series> all;
  for (const auto& r : table.rows) {
    const double rr = std::strtod(r[table.column("r")].c_str(), nullptr);
    const double t = std::strtod(r[table.column("t")].c_str(), nullptr);
    const double peak = std::strtod(r[table.column("value")].c_str(), nullptr);
    Series s{fmt::format("r={} t={}", rr, t), {}, {}};
    const double hi = std::log10(1e3 / t);
    for (int i = 0; i <= 200; ++i) {
      const double x = std::pow(10.0, -2.0 + (hi + 2.0) * i / 200.0);
      s.x.push_back(x);
      s.y.push_back(gt_value(rr, t, x) / peak);
    }
    all.push_back(std::move(s));
  }
  const auto out = dir / "gt_profiles.svg";
  write_loglog(out, "g_t(x) / max g_t", "x", "normalized g_t", all);
  written.push_back(out);
}

void plot_grouped(const fs::path& dir, const std::string& file, const std::string& group, const std::string& xcol,
                  const std::string& ycol, const std::string& title, std::vector<fs::path>& written) {
  const auto table = detail::read_csv(dir / file);
  std::map<std::string, Series> by;
  for (const auto& r : table.rows) {
    auto& s = by[r[table.column(group)]];
    s.label = group + "=" + r[table.column(group)];
    s.x.push_back(std::strtod(r[table.column(xcol)].c_str(), nullptr));
    s.y.push_back(std::strtod(r[table.column(ycol)].c_str(), nullptr));
  }
  std::vector<Series> all;
  for (auto& [k, s] : by) all.push_back(std::move(s));
  const auto out = dir / (fs::path(file).stem().string() + ".svg");
  write_loglog(out, title, xcol, ycol, all);
  written.push_back(out);
}

}  // namespace

std::vector<fs::path> emit_plots(const fs::path& dir) {
  std::vector<fs::path> written;
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto name = entry.path().filename().string();
      if (name.starts_with("norms") && name.ends_with(".csv")) plot_norms(dir, entry.path(), written);
    }
  }
  std::sort(written.begin(), written.end());
  if (fs::exists(dir / "separations.csv")) plot_separations(dir, written);
  if (fs::exists(dir / "gt.csv")) plot_gt(dir, written);
  if (fs::exists(dir / "h2minus.csv")) {
    plot_grouped(dir, "h2minus.csv", "r", "s_lo", "integral", "int_{s_lo}^T ||v||_{H^{2-}_r}", written);
  }
  if (fs::exists(dir / "counterexamples.csv")) {
    plot_grouped(dir, "counterexamples.csv", "branch", "t", "x", "branches of Xdot = X^2/t", written);
  }
  if (written.empty()) {
    throw std::runtime_error(fmt::format(
        "no plottable artifacts in {}; expected one of norms*.csv, separations.csv, gt.csv, h2minus.csv, "
        "counterexamples.csv",
        dir.string()));
  }
  return written;
}

}  // namespace nstraj
