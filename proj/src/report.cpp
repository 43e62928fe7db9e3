#include "lpthresh/report.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "lpthresh/config.hpp"

#ifndef LPTHRESH_VERSION
#define LPTHRESH_VERSION "0.0.0"
#endif

namespace lpthresh {

namespace {

std::string real17(double v) {
    char buf[40];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

// Shortest text that parses back to the same double.
std::string shortest(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, sep)) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        out.push_back(cell);
    }
    return out;
}

double parse_real(const std::string& s, std::size_t line_no) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) {
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    return v;
}

std::size_t parse_count(const std::string& s, std::size_t line_no) {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad integer '" + s + "'");
    }
    return v;
}

CurvePoint parse_point(const std::vector<std::string>& f, std::size_t offset, std::size_t trials,
                       std::size_t line_no) {
    CurvePoint pt;
    pt.sparsity = parse_count(f[offset], line_no);
    pt.success_rate = parse_real(f[offset + 1], line_no);
    pt.mean_re = parse_real(f[offset + 2], line_no);
    pt.mean_iterations = parse_real(f[offset + 3], line_no);
    pt.trials = trials;
    pt.successes = static_cast<std::size_t>(std::lround(pt.success_rate * static_cast<double>(trials)));
    return pt;
}

void write_point(std::ostream& out, const CurvePoint& pt) {
    out << pt.sparsity << ',' << real17(pt.success_rate) << ',' << real17(pt.mean_re) << ','
        << real17(pt.mean_iterations) << '\n';
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw std::runtime_error("write to '" + path.string() + "' failed");
    }
}

void check_nonempty(const std::vector<SuccessCurve>& curves) {
    if (curves.empty()) {
        throw std::invalid_argument("no curves to write");
    }
}

}  // namespace

void write_curve_csv(std::ostream& out, const SuccessCurve& curve) {
    out << kCurveHeader << '\n';
    for (const auto& pt : curve.points) {
        write_point(out, pt);
    }
}

void write_long_csv(std::ostream& out, const std::vector<SuccessCurve>& curves) {
    out << kLongHeader << '\n';
    for (const auto& c : curves) {
        const std::string prefix = std::string(to_string(c.algorithm.rule)) + ',' + shortest(c.algorithm.reported_p()) + ',';
        for (const auto& pt : c.points) {
            out << prefix;
            write_point(out, pt);
        }
    }
}

std::vector<CurvePoint> parse_curve_csv(std::istream& in, std::size_t trials) {
    std::string line;
    if (!std::getline(in, line) || split(line, ',') != split(kCurveHeader, ',')) {
        throw std::runtime_error("curve csv: missing or unexpected header");
    }
    std::vector<CurvePoint> points;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 4) {
            throw std::runtime_error("curve csv line " + std::to_string(line_no) + ": expected 4 fields");
        }
        points.push_back(parse_point(f, 0, trials, line_no));
    }
    return points;
}

std::vector<SuccessCurve> parse_long_csv(std::istream& in, std::size_t trials) {
    std::string line;
    if (!std::getline(in, line) || split(line, ',') != split(kLongHeader, ',')) {
        throw std::runtime_error("long csv: missing or unexpected header");
    }
    std::vector<SuccessCurve> curves;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 6) {
            throw std::runtime_error("long csv line " + std::to_string(line_no) + ": expected 6 fields");
        }
        const auto family = parse_family(f[0]);
        if (!family) {
            throw std::runtime_error("long csv line " + std::to_string(line_no) + ": unknown algorithm '" + f[0] + "'");
        }
        AlgorithmEntry alg{*family, parse_real(f[1], line_no)};
        if (curves.empty() || curves.back().algorithm.label() != alg.label()) {
            curves.push_back(SuccessCurve{alg, {}});
        }
        curves.back().points.push_back(parse_point(f, 2, trials, line_no));
    }
    return curves;
}

void write_plot_tsv(std::ostream& out, const SuccessCurve& curve) {
    out << "sparsity\tsuccess_rate\n";
    for (const auto& pt : curve.points) {
        out << pt.sparsity << '\t' << real17(pt.success_rate) << '\n';
    }
}

std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& dir,
                                                  const std::vector<SuccessCurve>& curves) {
    check_nonempty(curves);
    std::vector<std::filesystem::path> written;
    for (const auto& c : curves) {
        const auto path = dir / ("plot_" + c.algorithm.label() + ".tsv");
        auto out = open_output(path);
        write_plot_tsv(out, c);
        finish(out, path);
        written.push_back(path);
    }
    return written;
}

std::vector<std::filesystem::path> emit_curve_files(const std::filesystem::path& dir,
                                                    const std::vector<SuccessCurve>& curves) {
    check_nonempty(curves);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    std::vector<std::filesystem::path> written;
    for (const auto& c : curves) {
        const auto path = dir / ("curve_" + c.algorithm.label() + ".csv");
        auto out = open_output(path);
        write_curve_csv(out, c);
        finish(out, path);
        written.push_back(path);
    }
    {
        const auto path = dir / "curves.csv";
        auto out = open_output(path);
        write_long_csv(out, curves);
        finish(out, path);
        written.push_back(path);
    }
    const auto plots = emit_plot_data(dir, curves);
    written.insert(written.end(), plots.begin(), plots.end());
    return written;
}

nlohmann::json manifest_json(const RunManifest& m, const SweepResult& result) {
    nlohmann::json cells = nlohmann::json::array();
    const auto& algs = m.spec.algorithms;
    for (std::size_t ai = 0; ai < result.curves.size(); ++ai) {
        for (const auto& pt : result.curves[ai].points) {
            std::size_t its_min = 0, its_max = 0, converged = 0;
            bool first = true;
            for (const auto& rec : result.trials) {
                if (rec.algorithm != ai || rec.sparsity != pt.sparsity) continue;
                its_min = first ? rec.iterations : std::min(its_min, rec.iterations);
                its_max = first ? rec.iterations : std::max(its_max, rec.iterations);
                converged += rec.converged ? 1 : 0;
                first = false;
            }
            cells.push_back({{"algorithm", algs[ai].label()},
                             {"sparsity", pt.sparsity},
                             {"trials", pt.trials},
                             {"successes", pt.successes},
                             {"converged", converged},
                             {"mean_iterations", pt.mean_iterations},
                             {"min_iterations", its_min},
                             {"max_iterations", its_max}});
        }
    }
    return {{"tool", "lpthresh"},
            {"tool_version", m.tool_version},
            {"command", m.command},
            {"timestamp", m.timestamp},
            {"runtime_seconds", m.runtime_seconds},
            {"workers", m.workers},
            {"config", to_json(m.spec)},
            {"cells", cells}};
}

std::size_t largest_reliable_sparsity(const SuccessCurve& curve, double level) {
    std::size_t best = 0;
    for (const auto& pt : curve.points) {
        if (pt.success_rate >= level) {
            best = std::max(best, pt.sparsity);
        }
    }
    return best;
}

void write_summary_table(std::ostream& out, const std::vector<SuccessCurve>& curves, double level) {
    std::vector<std::size_t> order(curves.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return largest_reliable_sparsity(curves[a], level) > largest_reliable_sparsity(curves[b], level);
    });
    std::ostringstream head;
    head << "largest k with success_rate >= " << level;
    out << std::left << std::setw(6) << "rank" << std::setw(24) << "algorithm" << head.str() << '\n';
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const auto& c = curves[order[rank]];
        const std::size_t k = largest_reliable_sparsity(c, level);
        out << std::left << std::setw(6) << rank + 1 << std::setw(24) << c.algorithm.label()
            << (k == 0 ? std::string("-") : std::to_string(k)) << '\n';
    }
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string tool_version() { return LPTHRESH_VERSION; }

}  // namespace lpthresh
