#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tsusy/error.hpp"
#include "tsusy/profiles.hpp"

namespace tsusy::io {

/// 17 significant digits: enough for every double to survive a text round trip.
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw Error(ErrorKind::Config, "no column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }

    std::vector<double> values(const std::string& name) const {
        const auto c = column(name);
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) v.push_back(r[c]);
        return v;
    }
};

inline std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + csv_field(t.header[i]);
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

/// Writes via a temporary file and rename, so a failed write leaves no partial output.
inline void write_text(const std::string& path, const std::string& text) {
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot open '" + tmp.string() + "' for writing");
        out << text;
        out.flush();
        if (!out) throw Error(ErrorKind::Io, "write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorKind::Io, "cannot move output into place at '" + path + "'");
    }
}

inline Table parse_csv(const std::string& text) {
    Table t;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::Config, "empty CSV");
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        t.header.push_back(detail::trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        std::vector<double> row;
        start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            row.push_back(detail::parse_double(std::string_view(line).substr(start, comma - start), "CSV field"));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (row.size() != t.header.size()) throw Error(ErrorKind::Config, "CSV row width differs from header");
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str());
}

/// Self-contained 800x500 line chart of y(x).
inline std::string svg_line_chart(const std::vector<double>& x, const std::vector<double>& y, const std::string& title,
                                  const std::string& x_label, const std::string& y_label) {
    constexpr double width = 800, height = 500, left = 80, right = 20, top = 40, bottom = 60;
    double x0 = INFINITY, x1 = -INFINITY, y0 = 0.0, y1 = -INFINITY;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
        x0 = std::min(x0, x[i]);
        x1 = std::max(x1, x[i]);
        y0 = std::min(y0, y[i]);
        y1 = std::max(y1, y[i]);
    }
    if (!(x1 > x0)) x0 = 0, x1 = 1;
    if (!(y1 > y0)) y1 = y0 + 1;
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return top + (1 - (v - y0) / (y1 - y0)) * ph; };
    char buf[160];
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" viewBox=\"0 0 800 500\">\n";
    s += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                  left, top, pw, ph);
    s += buf;
    for (int i = 0; i <= 4; ++i) {
        const double fx = x0 + (x1 - x0) * i / 4, fy = y0 + (y1 - y0) * i / 4;
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"middle\">%.4g</text>\n",
                      px(fx), height - bottom + 18, fx);
        s += buf;
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"end\">%.4g</text>\n",
                      left - 6, py(fy) + 4, fy);
        s += buf;
    }
    auto escape = [](const std::string& in) {
        std::string out;
        for (char c : in) {
            if (c == '<') out += "&lt;";
            else if (c == '>') out += "&gt;";
            else if (c == '&') out += "&amp;";
            else out += c;
        }
        return out;
    };
    s += "<text x=\"400\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">" + escape(title) + "</text>\n";
    s += "<text x=\"400\" y=\"490\" font-size=\"13\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
    s += "<text x=\"18\" y=\"250\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 250)\">" +
         escape(y_label) + "</text>\n";
    s += "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(x[i]), py(y[i]));
        s += buf;
    }
    s += "\"/>\n</svg>\n";
    return s;
}

} // namespace tsusy::io
