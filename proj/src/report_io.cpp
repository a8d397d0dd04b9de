#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "semcrra/errors.hpp"
#include "semcrra/sweep.hpp"

namespace semcrra {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double to_double(const std::string& s, int line) {
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("not a number: '" + s + "'", line);
  return v;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw std::runtime_error("error writing " + path.string());
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string csv_header(std::size_t users) {
  std::string h = "swept_param,value,method,avg_effective_accuracy,surrogate,iterations,wall_ms";
  for (const char* prefix : {"B_", "P_", "o_"}) {
    for (std::size_t i = 1; i <= users; ++i) h += "," + std::string(prefix) + std::to_string(i);
  }
  return h;
}

std::string format_csv(const SweepResult& result) {
  std::string out = csv_header(result.users) + "\n";
  for (const auto& r : result.rows) {
    out += std::string(sweep_param_name(r.param)) + "," + num(r.value) + "," + std::string(method_name(r.method)) +
           "," + num(r.avg_effective_accuracy) + "," + num(r.surrogate) + "," + std::to_string(r.iterations) + "," +
           num(r.wall_ms);
    for (const auto* column : {&r.bandwidth, &r.power, &r.o}) {
      for (std::size_t i = 0; i < result.users; ++i) {
        out += "," + num(i < column->size() ? (*column)[i] : std::numeric_limits<double>::quiet_NaN());
      }
    }
    out += "\n";
  }
  return out;
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path) {
  if (result.rows.empty()) throw DomainError("emit_csv: empty result");
  write_file(path, format_csv(result));
}

SweepResult parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  const auto header = split_commas(line);
  if (header.size() < 7 || (header.size() - 7) % 3 != 0) throw ParseError("unexpected column count", 1);
  SweepResult result;
  result.users = (header.size() - 7) / 3;
  if (split_commas(csv_header(result.users)) != header) throw ParseError("unexpected header", 1);

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_commas(line);
    if (f.size() != header.size()) throw ParseError("expected " + std::to_string(header.size()) + " fields", line_no);
    SweepRow r;
    try {
      r.param = parse_sweep_param(f[0]);
      r.method = parse_method(f[2]);
    } catch (const DomainError& e) {
      throw ParseError(e.what(), line_no);
    }
    r.value = to_double(f[1], line_no);
    r.avg_effective_accuracy = to_double(f[3], line_no);
    r.surrogate = to_double(f[4], line_no);
    int iters = 0;
    const auto [ptr, ec] = std::from_chars(f[5].data(), f[5].data() + f[5].size(), iters);
    if (ec != std::errc{} || ptr != f[5].data() + f[5].size()) throw ParseError("bad iteration count", line_no);
    r.iterations = iters;
    r.wall_ms = to_double(f[6], line_no);
    std::size_t k = 7;
    for (auto* column : {&r.bandwidth, &r.power, &r.o}) {
      for (std::size_t i = 0; i < result.users; ++i) column->push_back(to_double(f[k++], line_no));
    }
    if (iters < 0) r.error = "failed";
    result.rows.push_back(std::move(r));
  }
  return result;
}

SweepResult read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string format_plot(const SweepResult& result) {
  if (result.rows.empty()) throw DomainError("format_plot: empty result");
  const SweepParam param = result.rows.front().param;
  const bool bandwidth = param == SweepParam::bandwidth;
  const double unit = bandwidth ? 1e6 : 1.0;

  std::map<Method, std::vector<std::pair<double, double>>> curves;
  double lo = INFINITY, hi = -INFINITY, top = 0.0;
  for (const auto& r : result.rows) {
    const double x = r.value / unit;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    if (!std::isfinite(r.avg_effective_accuracy)) continue;
    curves[r.method].emplace_back(x, r.avg_effective_accuracy);
    top = std::max(top, r.avg_effective_accuracy);
  }
  if (!(hi > lo)) hi = lo * 10.0;
  const double y_max = std::max(0.1, std::ceil(top * 10.0 - 1e-9) / 10.0);

  constexpr double W = 720, H = 480, L = 70, R = 150, T = 30, B = 60;
  const double lx0 = std::log10(lo), lx1 = std::log10(hi);
  auto px = [&](double x) { return L + (std::log10(x) - lx0) / (lx1 - lx0) * (W - L - R); };
  auto py = [&](double y) { return H - B - y / y_max * (H - T - B); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << " " << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<g stroke=\"black\" fill=\"none\"><rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R
    << "\" height=\"" << H - T - B << "\"/></g>\n";

  for (int e = static_cast<int>(std::floor(lx0)); e <= static_cast<int>(std::ceil(lx1)); ++e) {
    for (double m : {1.0, 2.0, 5.0}) {
      const double x = m * std::pow(10.0, e);
      if (x < lo * (1 - 1e-9) || x > hi * (1 + 1e-9)) continue;
      const double X = px(x);
      s << "<line x1=\"" << X << "\" y1=\"" << T << "\" x2=\"" << X << "\" y2=\"" << H - B
        << "\" stroke=\"#ddd\"/>\n<text x=\"" << X << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
        << tick_label(x) << "</text>\n";
    }
  }
  for (int k = 0; k <= 10; ++k) {
    const double y = y_max * k / 10.0;
    const double Y = py(y);
    s << "<line x1=\"" << L << "\" y1=\"" << Y << "\" x2=\"" << W - R << "\" y2=\"" << Y
      << "\" stroke=\"#eee\"/>\n<text x=\"" << L - 6 << "\" y=\"" << Y + 4 << "\" text-anchor=\"end\">"
      << tick_label(y) << "</text>\n";
  }
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
    << (bandwidth ? "Maximum bandwidth (MHz)" : "Maximum sum transmit power (W)") << "</text>\n";
  s << "<text transform=\"translate(18," << (T + H - B) / 2
    << ") rotate(-90)\" text-anchor=\"middle\">Average effective accuracy</text>\n";

  static const std::map<Method, std::pair<const char*, const char*>> style{
      {Method::crra, {"#d62728", "circle"}},
      {Method::fcr, {"#1f77b4", "square"}},
      {Method::fra, {"#2ca02c", "diamond"}},
      {Method::msr, {"#9467bd", "triangle"}}};
  int legend = 0;
  for (const auto& [method, pts] : curves) {
    const auto [color, marker] = style.at(method);
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : pts) s << px(x) << "," << py(y) << " ";
    s << "\"/>\n";
    for (const auto& [x, y] : pts) {
      const double X = px(x), Y = py(y);
      if (std::string_view(marker) == "circle") {
        s << "<circle cx=\"" << X << "\" cy=\"" << Y << "\" r=\"4\" fill=\"" << color << "\"/>\n";
      } else if (std::string_view(marker) == "square") {
        s << "<rect x=\"" << X - 4 << "\" y=\"" << Y - 4 << "\" width=\"8\" height=\"8\" fill=\"" << color << "\"/>\n";
      } else if (std::string_view(marker) == "diamond") {
        s << "<polygon points=\"" << X << "," << Y - 5 << " " << X + 5 << "," << Y << " " << X << "," << Y + 5 << " "
          << X - 5 << "," << Y << "\" fill=\"" << color << "\"/>\n";
      } else {
        s << "<polygon points=\"" << X << "," << Y - 5 << " " << X + 5 << "," << Y + 4 << " " << X - 5 << ","
          << Y + 4 << "\" fill=\"" << color << "\"/>\n";
      }
    }
    const double ly = T + 20 + 22 * legend++;
    s << "<line x1=\"" << W - R + 15 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 45 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n<text x=\"" << W - R + 52 << "\" y=\"" << ly + 4
      << "\">" << escape(method_name(method)) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void emit_plot(const SweepResult& result, const std::filesystem::path& path) {
  write_file(path, format_plot(result));
}

}  // namespace semcrra
