#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace onet::harness {

// Shortest round-trip decimal form, stable across reruns.
[[nodiscard]] inline std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != header.size()) throw std::logic_error("CsvTable: column count mismatch");
        rows.push_back(std::move(cells));
    }
};

// Writes via a temporary file in the same directory so observers never see a
// partially written table; rerunning with the same content is byte-identical.
inline void write_csv_atomic(const std::string& path, const CsvTable& table) {
    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("csv: cannot open '" + tmp + "'");
        for (std::size_t c = 0; c < table.header.size(); ++c)
            out << (c ? "," : "") << table.header[c];
        out << "\n";
        for (const auto& row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
            out << "\n";
        }
        out.flush();
        if (!out) throw std::runtime_error("csv: write failed for '" + tmp + "'");
    }
    std::filesystem::rename(tmp, target);
}

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

// Minimal standalone log-log polyline chart. Purely cosmetic output: the CSV
// tables carry the data of record.
inline void write_loglog_svg(const std::string& path, const std::string& title,
                             const std::vector<PlotSeries>& series) {
    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (s.x[i] <= 0.0 || s.y[i] <= 0.0) continue;
            lo_x = std::min(lo_x, std::log10(s.x[i]));
            hi_x = std::max(hi_x, std::log10(s.x[i]));
            lo_y = std::min(lo_y, std::log10(s.y[i]));
            hi_y = std::max(hi_y, std::log10(s.y[i]));
        }
    }
    if (lo_x > hi_x) {
        lo_x = 0.0;
        hi_x = 1.0;
    }
    if (lo_y > hi_y) {
        lo_y = 0.0;
        hi_y = 1.0;
    }
    if (hi_x - lo_x < 1e-12) hi_x = lo_x + 1.0;
    if (hi_y - lo_y < 1e-12) hi_y = lo_y + 1.0;

    const double w = 560.0, h = 420.0, margin = 60.0;
    auto px = [&](double lx) { return margin + (lx - lo_x) / (hi_x - lo_x) * (w - 2.0 * margin); };
    auto py = [&](double ly) { return h - margin - (ly - lo_y) / (hi_y - lo_y) * (h - 2.0 * margin); };
    static const char* palette[] = {"#1f6f8b", "#b54b3a", "#4a7c59", "#8a5aa2", "#b0883b"};

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("svg: cannot open '" + tmp + "'");
        char buf[256];
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"560\" height=\"420\" "
               "viewBox=\"0 0 560 420\">\n";
        out << "<rect width=\"560\" height=\"420\" fill=\"white\"/>\n";
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.1f\" y=\"28\" font-family=\"sans-serif\" font-size=\"15\" "
                      "text-anchor=\"middle\">",
                      w / 2.0);
        out << buf << title << "</text>\n";
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                      margin, h - margin, w - margin, h - margin);
        out << buf;
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                      margin, margin, margin, h - margin);
        out << buf;
        for (std::size_t si = 0; si < series.size(); ++si) {
            const PlotSeries& s = series[si];
            out << "<polyline fill=\"none\" stroke=\"" << palette[si % 5] << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (s.x[i] <= 0.0 || s.y[i] <= 0.0) continue;
                std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(std::log10(s.x[i])), py(std::log10(s.y[i])));
                out << buf;
            }
            out << "\"/>\n";
            std::snprintf(buf, sizeof(buf),
                          "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" "
                          "fill=\"%s\">",
                          w - margin + 4.0, margin + 16.0 * static_cast<double>(si), palette[si % 5]);
            out << buf << s.name << "</text>\n";
        }
        out << "</svg>\n";
        out.flush();
        if (!out) throw std::runtime_error("svg: write failed for '" + tmp + "'");
    }
    std::filesystem::rename(tmp, target);
}

}  // namespace onet::harness
