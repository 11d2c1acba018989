// Copyright 2026 The tailscope Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tailscope/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "tailscope/error.hpp"
#include "tailscope/numfmt.hpp"

namespace tailscope {

namespace {

std::string opt(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    out.push_back(line.substr(pos, next == std::string_view::npos
                                       ? std::string_view::npos
                                       : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::optional<double> opt_parse(std::string_view s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace

std::string format_csv(const std::vector<ResultRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += r.schedule;
    out += ',';
    out += format_double(r.value);
    out += ',';
    out += r.route;
    out += ',';
    out += opt(r.alpha);
    out += ',';
    out += r.alpha ? format_double(r.std_error) : r.refusal;
    out += ',';
    out += opt(r.rho);
    out += ',';
    out += opt(r.c_value);
    out += ',';
    out += std::to_string(r.censored);
    out += ',';
    out += opt(r.runtime_ms);
    out += '\n';
  }
  return out;
}

std::vector<ResultRow> parse_csv(std::string_view text) {
  std::vector<ResultRow> rows;
  std::size_t pos = 0;
  bool header = true;
  int lineno = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line != kCsvHeader) {
        throw Error(ErrorCode::kIo, "result csv: unexpected header");
      }
      header = false;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 9) {
      throw Error(ErrorCode::kIo,
                  "result csv: expected 9 fields on line " +
                      std::to_string(lineno));
    }
    ResultRow r;
    r.schedule = std::string(f[0]);
    r.value = parse_double(f[1]);
    r.route = std::string(f[2]);
    r.alpha = opt_parse(f[3]);
    if (r.alpha) {
      r.std_error = f[4].empty() ? 0.0 : parse_double(f[4]);
    } else {
      r.refusal = std::string(f[4]);
    }
    r.rho = opt_parse(f[5]);
    r.c_value = opt_parse(f[6]);
    r.censored = static_cast<int>(parse_int(f[7]));
    r.runtime_ms = opt_parse(f[8]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string svg_from_csv(std::string_view csv_text, std::string_view x_label) {
  const std::vector<ResultRow> rows = parse_csv(csv_text);
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  std::vector<std::string> order;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& r : rows) {
    if (!r.alpha || !std::isfinite(*r.alpha)) continue;
    const std::string key = r.schedule + " (" + r.route + ")";
    if (!series.count(key)) order.push_back(key);
    series[key].emplace_back(r.value, *r.alpha);
    xmin = std::min(xmin, r.value);
    xmax = std::max(xmax, r.value);
    ymin = std::min(ymin, *r.alpha);
    ymax = std::max(ymax, *r.alpha);
  }
  const double W = 640, H = 420, L = 70, R = 200, T = 20, B = 50;
  if (order.empty()) {
    xmin = ymin = 0.0;
    xmax = ymax = 1.0;
  }
  if (xmax == xmin) { xmin -= 0.5; xmax += 0.5; }
  if (ymax == ymin) { ymin -= 0.5; ymax += 0.5; }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R
     << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\""
     << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    os << "<text x=\"" << fixed(px(xv), 1) << "\" y=\"" << H - B + 16
       << "\" text-anchor=\"middle\">" << format_double(std::round(xv * 1e4) / 1e4)
       << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << fixed(py(yv) + 4, 1)
       << "\" text-anchor=\"end\">" << fixed(yv, 2) << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
     << "\" text-anchor=\"middle\">" << xml_escape(x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (T + H - B) / 2
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (T + H - B) / 2
     << ")\">tail index</text>\n";
  for (std::size_t s = 0; s < order.size(); ++s) {
    auto pts = series[order[s]];
    std::stable_sort(pts.begin(), pts.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    const char* color = colors[s % 8];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      os << (i ? " " : "") << fixed(px(pts[i].first), 2) << ","
         << fixed(py(pts[i].second), 2);
    }
    os << "\"/>\n";
    for (const auto& p : pts) {
      os << "<circle cx=\"" << fixed(px(p.first), 2) << "\" cy=\""
         << fixed(py(p.second), 2) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    const double ly = T + 16 * (s + 1);
    os << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly - 4 << "\" x2=\""
       << W - R + 32 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - R + 38 << "\" y=\"" << ly << "\">"
       << xml_escape(order[s]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIo, "cannot open for writing: " + path);
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!os) throw Error(ErrorCode::kIo, "write failed: " + path);
}

}  // namespace tailscope
