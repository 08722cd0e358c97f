#include "app/svg.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qmem::app {

namespace {

std::string fixed(double x, int digits = 2) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::fixed, digits);
  return std::string(buf.data(), ptr);
}

std::string general(double x) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 3);
  return std::string(buf.data(), ptr);
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

/// Diverging map on [-1, 1].
std::string diverging(double v) {
  v = std::clamp(v, -1.0, 1.0);
  const std::array<double, 3> lo{33, 102, 172};
  const std::array<double, 3> hi{178, 24, 43};
  const std::array<double, 3>& end = v < 0 ? lo : hi;
  const double t = std::abs(v);
  std::ostringstream os;
  os << "rgb(";
  for (int c = 0; c < 3; ++c) {
    os << static_cast<int>(std::lround(255.0 + (end[c] - 255.0) * t)) << (c < 2 ? "," : ")");
  }
  return os.str();
}

void header(std::ostringstream& os, int w, int h) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
     << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
}

}  // namespace

std::string wigner_svg(const WignerGrid& grid, const std::string& title) {
  const int size = 400;
  const int left = 60, top = 40, bar_x = left + size + 30;
  const double clip = 2.0 / std::numbers::pi;
  const int nr = grid.spec.n_re;
  const int ni = grid.spec.n_im;
  const double cw = static_cast<double>(size) / nr;
  const double ch = static_cast<double>(size) / ni;

  std::ostringstream os;
  header(os, bar_x + 90, top + size + 60);
  os << "<text x=\"" << left + size / 2 << "\" y=\"24\" text-anchor=\"middle\">" << escape(title) << "</text>\n";
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < ni; ++j) {
      // Im axis grows upwards.
      os << "<rect x=\"" << fixed(left + i * cw) << "\" y=\"" << fixed(top + (ni - 1 - j) * ch) << "\" width=\""
         << fixed(cw + 0.05) << "\" height=\"" << fixed(ch + 0.05) << "\" fill=\""
         << diverging(grid.values(i, j) / clip) << "\"/>\n";
    }
  }
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << size << "\" height=\"" << size
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << left << "\" y=\"" << top + size + 16 << "\">" << fixed(grid.spec.re_min) << "</text>\n";
  os << "<text x=\"" << left + size << "\" y=\"" << top + size + 16 << "\" text-anchor=\"end\">"
     << fixed(grid.spec.re_max) << "</text>\n";
  os << "<text x=\"" << left + size / 2 << "\" y=\"" << top + size + 34 << "\" text-anchor=\"middle\">Re(alpha)</text>\n";
  os << "<text x=\"" << left - 6 << "\" y=\"" << top + size << "\" text-anchor=\"end\">" << fixed(grid.spec.im_min)
     << "</text>\n";
  os << "<text x=\"" << left - 6 << "\" y=\"" << top + 10 << "\" text-anchor=\"end\">" << fixed(grid.spec.im_max)
     << "</text>\n";
  os << "<text x=\"20\" y=\"" << top + size / 2 << "\" transform=\"rotate(-90 20 " << top + size / 2
     << ")\" text-anchor=\"middle\">Im(alpha)</text>\n";

  const int steps = 50;
  for (int s = 0; s < steps; ++s) {
    const double v = 1.0 - 2.0 * (s + 0.5) / steps;
    os << "<rect x=\"" << bar_x << "\" y=\"" << fixed(top + s * static_cast<double>(size) / steps)
       << "\" width=\"20\" height=\"" << fixed(static_cast<double>(size) / steps + 0.05) << "\" fill=\""
       << diverging(v) << "\"/>\n";
  }
  os << "<text x=\"" << bar_x + 26 << "\" y=\"" << top + 10 << "\">+2/pi</text>\n";
  os << "<text x=\"" << bar_x + 26 << "\" y=\"" << top + size / 2 + 4 << "\">0</text>\n";
  os << "<text x=\"" << bar_x + 26 << "\" y=\"" << top + size << "\">-2/pi</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string trace_svg(const Dataset& data, const std::optional<FitResult>& fit, const std::string& title) {
  const int w = 520, h = 360, left = 70, right = 20, top = 40, bottom = 50;
  const int pw = w - left - right, ph = h - top - bottom;
  const auto& y = data.observed();
  const double x0 = data.sweep_values.front();
  const double x1 = data.sweep_values.back() > x0 ? data.sweep_values.back() : x0 + 1.0;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + (1.0 - v) * ph; };

  std::ostringstream os;
  header(os, w, h);
  os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\">" << escape(title) << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (const double tick : {0.0, 0.5, 1.0}) {
    os << "<text x=\"" << left - 6 << "\" y=\"" << fixed(py(tick) + 4) << "\" text-anchor=\"end\">" << fixed(tick, 1)
       << "</text>\n";
  }
  os << "<text x=\"" << left << "\" y=\"" << top + ph + 16 << "\">" << general(x0) << "</text>\n";
  os << "<text x=\"" << left + pw << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"end\">" << general(x1)
     << "</text>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">" << escape(data.sweep_name)
     << " (s)</text>\n";
  if (fit) {
    os << "<polyline fill=\"none\" stroke=\"rgb(178,24,43)\" stroke-width=\"1.5\" points=\"";
    const int samples = 400;
    for (int s = 0; s <= samples; ++s) {
      const double x = x0 + (x1 - x0) * s / samples;
      const double v = std::clamp(model_eval(fit->kind, fit->params, x), -0.1, 1.1);
      os << fixed(px(x)) << ',' << fixed(py(v)) << ' ';
    }
    os << "\"/>\n";
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    os << "<circle cx=\"" << fixed(px(data.sweep_values[i])) << "\" cy=\"" << fixed(py(y[i]))
       << "\" r=\"2.5\" fill=\"rgb(33,102,172)\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace qmem::app
