// Copyright 2026 The ebm-sphere Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "ebm/errors.h"
#include "ebm/harness.h"
#include "ebm/io.h"

namespace ebm {

namespace fs = std::filesystem;

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows) {
  using Key = std::tuple<std::string, std::string, std::int64_t, std::string>;
  std::map<Key, std::vector<double>> groups;
  for (const ResultRow& r : rows) {
    if (!r.value || !std::isfinite(*r.value)) continue;
    groups[{r.estimator, r.regime, r.n_train, r.metric}].push_back(*r.value);
  }
  std::vector<AggregateRow> out;
  for (const auto& [key, values] : groups) {
    AggregateRow a;
    std::tie(a.estimator, a.regime, a.n_train, a.metric) = key;
    a.count = std::int64_t(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    a.mean = sum / double(a.count);
    if (a.count > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - a.mean) * (v - a.mean);
      a.std = std::sqrt(ss / double(a.count - 1));
    }
    out.push_back(a);
  }
  return out;
}

std::string format_aggregate(const std::vector<AggregateRow>& rows) {
  std::string out = "estimator,regime,n_train,metric,mean,std,count\n";
  for (const AggregateRow& a : rows) {
    out += a.estimator + ',' + a.regime + ',' + std::to_string(a.n_train) + ',' + a.metric + ',' +
           format_real(a.mean) + ',' + format_real(a.std) + ',' + std::to_string(a.count) + '\n';
  }
  return out;
}

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 140.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

struct Axis {
  bool log = true;
  double lo = 0.0;
  double hi = 1.0;

  double map(double v) const {
    const double t = log ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
    return std::clamp(t, -0.05, 1.05);
  }
};

Axis make_axis(double lo, double hi, bool log) {
  Axis a;
  a.log = log;
  if (log) {
    a.lo = std::floor(std::log10(lo));
    a.hi = std::ceil(std::log10(hi));
    if (a.hi <= a.lo) a.hi = a.lo + 1.0;
  } else {
    const double pad = hi > lo ? 0.05 * (hi - lo) : std::max(1.0, std::abs(lo) * 0.1);
    a.lo = lo - pad;
    a.hi = hi + pad;
  }
  return a;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(const Axis& a, double t) {
  char buf[32];
  if (a.log) {
    std::snprintf(buf, sizeof(buf), "1e%d", int(std::lround(t)));
  } else {
    std::snprintf(buf, sizeof(buf), "%.3g", t);
  }
  return buf;
}

const char* series_color(std::size_t i) {
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};
  return kColors[i % 4];
}

}  // namespace

std::string render_svg(const std::vector<AggregateRow>& rows, const std::string& estimator,
                       const std::string& metric, std::optional<double> reference) {
  std::map<std::string, std::vector<AggregateRow>> series;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const AggregateRow& a : rows) {
    if (a.estimator != estimator || a.metric != metric) continue;
    series[a.regime].push_back(a);
    xmin = std::min(xmin, double(a.n_train));
    xmax = std::max(xmax, double(a.n_train));
    ymin = std::min(ymin, a.mean - a.std);
    ymax = std::max(ymax, a.mean + a.std);
    ymin = std::min(ymin, a.mean);
  }
  if (series.empty()) throw InvalidArgument("no rows for " + estimator + "/" + metric);
  if (reference) {
    ymin = std::min(ymin, *reference);
    ymax = std::max(ymax, *reference);
  }
  // Error bars that cross zero would vanish on a log axis; fall back to the
  // smallest positive mean in that case and linear scale if any mean is <= 0.
  bool log_y = true;
  double pos_min = std::numeric_limits<double>::infinity();
  for (const auto& [regime, pts] : series) {
    for (const AggregateRow& a : pts) {
      if (a.mean <= 0.0) log_y = false;
      pos_min = std::min(pos_min, a.mean);
    }
  }
  if (reference && *reference <= 0.0) log_y = false;
  if (log_y && ymin <= 0.0) ymin = pos_min;
  const Axis ax = make_axis(xmin, xmax, true);
  const Axis ay = make_axis(ymin, ymax, log_y);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + ax.map(v) * pw; };
  auto py = [&](double v) {
    if (ay.log && v <= 0.0) v = std::pow(10.0, ay.lo);
    return kTop + (1.0 - ay.map(v)) * ph;
  };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
    << estimator << ": " << metric << "</text>\n";
  s << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t = ax.lo; t <= ax.hi + 1e-9; t += 1.0) {
    const double x = kLeft + (t - ax.lo) / (ax.hi - ax.lo) * pw;
    s << "<line x1=\"" << num(x) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(x) << "\" y2=\""
      << kTop + ph + 5 << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << num(x) << "\" y=\"" << kTop + ph + 20 << "\" text-anchor=\"middle\">"
      << tick_label(ax, t) << "</text>\n";
  }
  const int n_yticks = ay.log ? int(std::lround(ay.hi - ay.lo)) : 5;
  for (int i = 0; i <= n_yticks; ++i) {
    const double t = ay.lo + (ay.hi - ay.lo) * double(i) / double(n_yticks);
    const double y = kTop + (1.0 - double(i) / double(n_yticks)) * ph;
    s << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft << "\" y2=\""
      << num(y) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
      << tick_label(ay, t) << "</text>\n";
  }
  s << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << kHeight - 15
    << "\" text-anchor=\"middle\">n (training samples)</text>\n";
  s << "<text transform=\"translate(18," << num(kTop + ph / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << metric << "</text>\n";

  if (reference) {
    const double y = py(*reference);
    s << "<line x1=\"" << kLeft << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft + pw << "\" y2=\""
      << num(y) << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  }

  std::size_t idx = 0;
  for (auto& [regime, pts] : series) {
    std::sort(pts.begin(), pts.end(),
              [](const AggregateRow& a, const AggregateRow& b) { return a.n_train < b.n_train; });
    const char* color = series_color(idx);
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const AggregateRow& a : pts) s << num(px(double(a.n_train))) << ',' << num(py(a.mean)) << ' ';
    s << "\"/>\n";
    for (const AggregateRow& a : pts) {
      const double x = px(double(a.n_train));
      s << "<line x1=\"" << num(x) << "\" y1=\"" << num(py(a.mean - a.std)) << "\" x2=\"" << num(x)
        << "\" y2=\"" << num(py(a.mean + a.std)) << "\" stroke=\"" << color << "\"/>\n";
      s << "<circle cx=\"" << num(x) << "\" cy=\"" << num(py(a.mean)) << "\" r=\"3\" fill=\"" << color
        << "\"/>\n";
    }
    const double ly = kTop + 20.0 + 20.0 * double(idx);
    s << "<line x1=\"" << kLeft + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw + 40
      << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << kLeft + pw + 46 << "\" y=\"" << ly + 4 << "\">" << regime << "</text>\n";
    ++idx;
  }
  if (reference) {
    const double ly = kTop + 20.0 + 20.0 * double(idx);
    s << "<line x1=\"" << kLeft + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw + 40
      << "\" y2=\"" << ly << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
    s << "<text x=\"" << kLeft + pw + 46 << "\" y=\"" << ly + 4 << "\">teacher</text>\n";
  }
  s << "<text x=\"" << kLeft + pw + 15 << "\" y=\"" << kTop + ph << "\" font-size=\"10\">bars: mean \u00b1 1 sd</text>\n";
  s << "<text x=\"" << kLeft + pw + 15 << "\" y=\"" << kTop + ph + 12 << "\" font-size=\"10\">(sample sd, n-1)</text>\n";
  s << "</svg>\n";
  return s.str();
}

std::vector<fs::path> cmd_plot(const fs::path& out_dir) {
  const std::vector<ResultRow> rows = parse_results(read_text(out_dir / "results.csv"));
  const std::vector<AggregateRow> agg = aggregate(rows);
  std::vector<fs::path> written;
  written.push_back(out_dir / "aggregated.csv");
  write_text(written.back(), format_aggregate(agg));

  std::map<std::string, double> reference;
  const fs::path ref_path = out_dir / "teacher_reference.csv";
  if (fs::exists(ref_path)) {
    std::map<std::string, std::pair<double, int>> acc;
    std::istringstream in(read_text(ref_path));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto c1 = line.find(',');
      const auto c2 = line.find(',', c1 + 1);
      if (c1 == std::string::npos || c2 == std::string::npos) continue;
      const double v = std::strtod(line.c_str() + c2 + 1, nullptr);
      if (!std::isfinite(v)) continue;
      auto& [sum, count] = acc[line.substr(c1 + 1, c2 - c1 - 1)];
      sum += v;
      ++count;
    }
    for (const auto& [metric, sc] : acc) reference[metric] = sc.first / sc.second;
  }

  std::set<std::pair<std::string, std::string>> panels;
  for (const AggregateRow& a : agg) panels.insert({a.estimator, a.metric});
  for (const auto& [estimator, metric] : panels) {
    std::optional<double> ref;
    if (auto it = reference.find(metric); it != reference.end()) ref = it->second;
    written.push_back(out_dir / ("plot_" + estimator + "_" + metric + ".svg"));
    write_text(written.back(), render_svg(agg, estimator, metric, ref));
  }
  return written;
}

}  // namespace ebm
