#include "telsim/figures.hpp"

#include <fmt/format.h>

#include <array>
#include <ostream>
#include <string>

namespace telsim {

namespace {

constexpr int kCell = 16;
constexpr int kLeft = 80;
constexpr int kTop = 90;
constexpr int kBottom = 50;

std::string escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

constexpr std::array<const char*, 6> kPathColours{"#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

} // namespace

void write_heatmap_svg(std::ostream& out, const HeatmapResult& result, std::string_view title) {
    const int cols = static_cast<int>(result.macos.size());
    const int rows = static_cast<int>(result.acos.size());
    const int width = kLeft + cols * kCell + 20;
    const int height = kTop + rows * kCell + kBottom;

    out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}">)", width,
                       height)
        << '\n';
    out << fmt::format(R"(<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>)", width, height) << '\n';
    out << fmt::format(R"(<text x="{}" y="20" font-family="sans-serif" font-size="13">{}</text>)", kLeft,
                       escape(title))
        << '\n';

    for (int c = 0; c < cols; ++c) {
        const int x = kLeft + c * kCell + kCell / 2;
        out << fmt::format(R"(<text x="{0}" y="{1}" font-family="sans-serif" font-size="9" )"
                           R"svg(transform="rotate(-60 {0} {1})">{2}</text>)svg",
                           x, kTop - 6, escape(result.macos[c]))
            << '\n';
    }
    for (int r = 0; r < rows; ++r) {
        out << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="9" text-anchor="end">{}</text>)",
                           kLeft - 4, kTop + r * kCell + kCell - 4, escape(result.acos[r]))
            << '\n';
    }

    out << fmt::format(R"(<g id="grid" data-rows="{}" data-cols="{}">)", rows, cols) << '\n';
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const auto& cell = result.at(r, c);
            const int x = kLeft + c * kCell;
            const int y = kTop + r * kCell;
            out << fmt::format(R"(<rect class="cell" x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="#808080" )"
                               R"(stroke-width="0.5"><title>{} to {}: {:.4f} sampled, {:.4f} true</title></rect>)",
                               x, y, kCell, kCell, cell.decision ? "#ffffff" : "#bdbdbd", escape(cell.aco),
                               escape(cell.maco), cell.empirical_fraction, cell.true_fraction)
                << '\n';
            if (cell.outcome == ConfusionClass::FalsePositive || cell.outcome == ConfusionClass::FalseNegative) {
                const bool fp = cell.outcome == ConfusionClass::FalsePositive;
                out << fmt::format(R"(<circle class="{}" cx="{}" cy="{}" r="{}" fill="{}"/>)", fp ? "fp" : "fn",
                                   x + kCell / 2, y + kCell / 2, kCell / 4, fp ? "#d62728" : "#1f3fb4")
                    << '\n';
            }
        }
    }
    out << "</g>\n";

    const int legend_y = kTop + rows * kCell + 25;
    out << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="11">n0={}  FP={}  FN={}  )"
                       R"((red dot = FP, blue dot = FN, white = declared compliant)</text>)",
                       kLeft, legend_y, result.n0, result.report.fp, result.report.fn)
        << '\n';
    out << "</svg>\n";
}

void write_selection_svg(std::ostream& out, const SelectionResult& result, std::string_view title) {
    const int groups = static_cast<int>(result.sample_sizes.size());
    const int paths = static_cast<int>(result.path_ids.size());
    const int bar = 18;
    const int gap = 24;
    const int plot_h = 240;
    const int left = 60;
    const int top = 40;
    const int group_w = paths * bar + gap;
    const int width = left + groups * group_w + 160;
    const int height = top + plot_h + 60;

    out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}">)", width,
                       height)
        << '\n';
    out << fmt::format(R"(<rect x="0" y="0" width="{}" height="{}" fill="#ffffff"/>)", width, height) << '\n';
    out << fmt::format(R"(<text x="{}" y="20" font-family="sans-serif" font-size="13">{}</text>)", left, escape(title))
        << '\n';

    // Axes and gridlines at 0, 25, 50, 75, 100 %.
    for (int pct = 0; pct <= 100; pct += 25) {
        const double y = top + plot_h * (1.0 - pct / 100.0);
        out << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#dddddd"/>)", left, y,
                           left + groups * group_w, y)
            << '\n';
        out << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{}%</text>)",
                           left - 4, y + 3, pct)
            << '\n';
    }

    for (int s = 0; s < groups; ++s) {
        const int gx = left + s * group_w + gap / 2;
        for (int j = 0; j < paths; ++j) {
            const double f = result.frequency(s, j);
            const double h = plot_h * f;
            out << fmt::format(R"(<rect class="bar" x="{}" y="{}" width="{}" height="{}" fill="{}">)"
                               R"(<title>n0={} {}: {:.2f}%</title></rect>)",
                               gx + j * bar, top + plot_h - h, bar - 2, h, kPathColours[j % kPathColours.size()],
                               result.sample_sizes[s], escape(result.path_ids[j]), 100.0 * f)
                << '\n';
        }
        out << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>)",
                           gx + paths * bar / 2, top + plot_h + 15, result.sample_sizes[s])
            << '\n';
    }
    out << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">)"
                       R"(samples per path (n0), {} trials</text>)",
                       left + groups * group_w / 2, top + plot_h + 35, result.trials)
        << '\n';

    for (int j = 0; j < paths; ++j) {
        const int lx = left + groups * group_w + 15;
        const int ly = top + 10 + j * 18;
        out << fmt::format(R"(<rect x="{}" y="{}" width="12" height="12" fill="{}"/>)", lx, ly,
                           kPathColours[j % kPathColours.size()])
            << '\n';
        out << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>)", lx + 16, ly + 10,
                           escape(result.path_ids[j]))
            << '\n';
    }
    out << "</svg>\n";
}

} // namespace telsim
