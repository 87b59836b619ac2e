#include "hhsim/emitters.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hhsim {

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, res.ptr};
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

void write_row(std::ostream& out, std::span<const std::string> cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << csv_field(cells[i]);
    }
    out << "\r\n";
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.close();
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void emit_csv(const std::filesystem::path& path, std::span<const std::string> header,
              std::span<const std::vector<std::string>> rows) {
    auto out = open_output(path);
    write_row(out, header);
    for (const auto& row : rows) write_row(out, row);
    finish(out, path);
}

void emit_spike_train_csv(const SpikeTrain& train, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "t\r\n";
    for (double t : train.times) out << format_double(t) << "\r\n";
    finish(out, path);
}

void emit_trajectory_csv(std::span<const TrajectorySample> trajectory, const OutputPath& output,
                         const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "t,V,n,m,h,X,U\r\n";
    for (const auto& s : trajectory) {
        const auto& b = s.state.bio;
        out << format_double(s.t) << ',' << format_double(b.v) << ',' << format_double(b.n) << ','
            << format_double(b.m) << ',' << format_double(b.h) << ',' << format_double(s.state.x) << ','
            << format_double(output.value_at(s.t)) << "\r\n";
    }
    finish(out, path);
}

void emit_circuit_spikes_csv(std::span<const SpikeTrain> trains, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "neuron,t\r\n";
    for (std::size_t i = 0; i < trains.size(); ++i)
        for (double t : trains[i].times) out << i + 1 << ',' << format_double(t) << "\r\n";
    finish(out, path);
}

void emit_circuit_inputs_csv(const CircuitRun& run, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << 't';
    for (std::size_t i = 0; i < run.drive_samples.size(); ++i) out << ",A" << i + 1;
    out << "\r\n";
    for (std::size_t k = 0; k < run.sample_times.size(); ++k) {
        out << format_double(run.sample_times[k]);
        for (const auto& a : run.drive_samples) out << ',' << format_double(a[k]);
        out << "\r\n";
    }
    finish(out, path);
}

RasterStats emit_raster_svg(std::span<const SpikeTrain> trains, const BlockLayout& layout,
                            const std::filesystem::path& path) {
    if (trains.empty()) throw std::invalid_argument("emit_raster_svg: no trains");
    const int n = static_cast<int>(trains.size());
    const double horizon = trains.front().horizon > 0.0 ? trains.front().horizon : 1.0;

    constexpr double left = 60, right = 20, top = 20, bottom = 50, width = 900, row = 18;
    RasterStats stats;
    stats.levels = n + 1;
    const double plot_h = row * stats.levels;
    const double plot_w = width - left - right;
    const double height = top + plot_h + bottom;
    auto x_of = [&](double t) { return left + plot_w * t / horizon; };
    auto y_of = [&](int level) { return top + plot_h - row * (level + 0.5); };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<g stroke=\"black\" stroke-width=\"1\">\n"
        << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
        << top + plot_h << "\"/>\n"
        << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
        << "\"/>\n</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int k = 0; k <= 5; ++k) {
        const double t = horizon * k / 5.0;
        svg << "<text x=\"" << x_of(t) << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">"
            << format_double(t) << "</text>\n";
    }
    for (int level = 0; level <= n; ++level) {
        const int label = level == 0 ? n : level;
        svg << "<text x=\"" << left - 8 << "\" y=\"" << y_of(level) + 4 << "\" text-anchor=\"end\">" << label
            << "</text>\n";
    }
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\">t (model units)</text>\n</g>\n";

    auto dots = [&](int neuron, int level) {
        const char* colour = layout.inhibitory(neuron) ? "red" : "green";
        svg << "<g fill=\"" << colour << "\">\n";
        for (double t : trains[neuron].times) {
            svg << "<circle cx=\"" << x_of(t) << "\" cy=\"" << y_of(level) << "\" r=\"1.5\"/>\n";
            ++stats.dots;
        }
        svg << "</g>\n";
    };
    dots(n - 1, 0);
    for (int i = 0; i < n; ++i) dots(i, i + 1);
    svg << "</svg>\n";

    auto out = open_output(path);
    out << svg.str();
    finish(out, path);
    return stats;
}

}  // namespace hhsim
