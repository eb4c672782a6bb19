#include "lossbar/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace lossbar::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kLeft = 120.0;
constexpr double kRight = 40.0;
constexpr double kBarHeight = 14.0;
constexpr double kBarGap = 6.0;
constexpr double kAxisHeight = 40.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  double x(double v) const { return kLeft + (v - lo) / (hi - lo) * (kWidth - kLeft - kRight); }
};

Axis axis_for(const std::vector<std::pair<std::string, Barcode>>& panels) {
  double lo = kInf, hi = -kInf;
  for (const auto& [name, b] : panels) {
    lo = std::min(lo, b.essential.birth);
    hi = std::max(hi, b.essential.birth);
    for (const auto& s : b.segments) {
      lo = std::min(lo, s.birth);
      hi = std::max(hi, s.death);
    }
  }
  if (!(hi > lo)) hi = lo + 1.0;
  const double pad = 0.08 * (hi - lo);
  return {lo, hi + pad};
}

// Bars of one panel starting at y; returns the height used.
double draw_panel(std::string& out, const Barcode& b, const Axis& axis, double y,
                  std::set<double>& ticks) {
  std::vector<Segment> bars = b.segments;
  std::sort(bars.begin(), bars.end(), [](const Segment& l, const Segment& r) {
    return l.birth != r.birth ? l.birth < r.birth : l.minimum_id < r.minimum_id;
  });
  const double x0 = axis.x(b.essential.birth);
  const double xe = kWidth - kRight;
  out += "<line class=\"bar essential\" x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y + kBarHeight / 2) +
         "\" x2=\"" + fmt(xe - 8) + "\" y2=\"" + fmt(y + kBarHeight / 2) +
         "\" stroke=\"#b22\" stroke-width=\"" + fmt(kBarHeight) + "\"/>\n";
  out += "<polygon class=\"arrow\" points=\"" + fmt(xe - 8) + "," + fmt(y - 3) + " " + fmt(xe) + "," +
         fmt(y + kBarHeight / 2) + " " + fmt(xe - 8) + "," + fmt(y + kBarHeight + 3) +
         "\" fill=\"#b22\"/>\n";
  ticks.insert(b.essential.birth);
  y += kBarHeight + kBarGap;
  for (const auto& s : bars) {
    const double xa = axis.x(s.birth), xb = std::max(axis.x(s.death), xa + 1.0);
    out += "<rect class=\"bar\" x=\"" + fmt(xa) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(xb - xa) +
           "\" height=\"" + fmt(kBarHeight) + "\" fill=\"#247\"><title>minimum " +
           std::to_string(s.minimum_id) + ": [" + fmt(s.birth) + ", " + fmt(s.death) +
           "]</title></rect>\n";
    ticks.insert(s.birth);
    ticks.insert(s.death);
    y += kBarHeight + kBarGap;
  }
  return (kBarHeight + kBarGap) * static_cast<double>(bars.size() + 1);
}

std::string render(const std::vector<std::pair<std::string, Barcode>>& panels,
                   const std::string& title) {
  const Axis axis = axis_for(panels);
  std::string body;
  std::set<double> ticks;
  double y = title.empty() ? 10.0 : 34.0;
  for (const auto& [name, b] : panels) {
    if (!name.empty())
      body += "<text x=\"8\" y=\"" + fmt(y + kBarHeight) + "\" font-size=\"12\">" + escape(name) +
              "</text>\n";
    y += draw_panel(body, b, axis, y, ticks) + 10.0;
  }
  const double axis_y = y;
  body += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(axis_y) + "\" x2=\"" + fmt(kWidth - kRight) +
          "\" y2=\"" + fmt(axis_y) + "\" stroke=\"black\"/>\n";
  // tick labels at segment endpoints; crowded ones are skipped
  double last_x = -1e9;
  for (double t : ticks) {
    const double x = axis.x(t);
    body += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(axis_y) + "\" x2=\"" + fmt(x) + "\" y2=\"" +
            fmt(axis_y + 5) + "\" stroke=\"black\"/>\n";
    if (x - last_x < 36.0) continue;
    body += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(axis_y + 18) +
            "\" font-size=\"10\" text-anchor=\"middle\">" + fmt(t) + "</text>\n";
    last_x = x;
  }
  body += "<text x=\"" + fmt((kLeft + kWidth - kRight) / 2) + "\" y=\"" + fmt(axis_y + 34) +
          "\" font-size=\"11\" text-anchor=\"middle\">loss</text>\n";
  const double height = axis_y + kAxisHeight;
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) +
                    "\" height=\"" + fmt(height) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " +
                    fmt(height) + "\">\n";
  if (!title.empty())
    out += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">" +
           escape(title) + "</text>\n";
  return out + body + "</svg>\n";
}

}  // namespace

std::string barcode(const Barcode& b, const std::string& title) {
  return render({{"", b}}, title);
}

std::string stacked_barcodes(const std::vector<std::pair<std::string, Barcode>>& panels,
                             const std::string& title) {
  return render(panels, title);
}

}  // namespace lossbar::svg
