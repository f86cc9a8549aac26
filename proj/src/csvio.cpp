#include "peaklab/csvio.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace peaklab {

namespace {

const char* kMomentsHeader = "t,x,nu,value,se,n_paths,source";
const char* kGrowthHeader = "alpha,slope,slope_se,classification";

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

double parse_double(const std::string& s, const std::string& what, std::size_t line_no) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw IoError("moments.csv line " + std::to_string(line_no) + ": bad " + what + " value '" + s + "'");
    return v;
}

long parse_long(const std::string& s, const std::string& what, std::size_t line_no) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0')
        throw IoError("moments.csv line " + std::to_string(line_no) + ": bad " + what + " value '" + s + "'");
    return v;
}

} // namespace

std::string moments_csv_string(const MomentField& field) {
    field.validate();
    const double scale = std::exp(field.log_offset);
    const char* source = field.source == FieldSource::MonteCarlo ? "mc" : "oracle";
    std::string out;
    out.reserve(64 * field.values.size() + 64);
    out += kMomentsHeader;
    out += '\n';
    for (std::size_t k = 0; k < field.times.size(); ++k) {
        for (std::size_t i = 0; i < field.xs.size(); ++i) {
            out += format_g17(field.times[k]);
            out += ',';
            out += format_g17(field.xs[i]);
            out += ',';
            out += std::to_string(field.nu);
            out += ',';
            out += format_g17(field.value(k, i) * scale);
            out += ',';
            out += format_g17(field.se(k, i) * scale);
            out += ',';
            out += std::to_string(field.n_paths);
            out += ',';
            out += source;
            out += '\n';
        }
    }
    return out;
}

void write_moments_csv(const MomentField& field, const std::string& path) {
    write_text(path, moments_csv_string(field));
}

MomentField read_moments_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("moments.csv is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kMomentsHeader)
        throw IoError("moments.csv: bad header '" + line + "' (expected '" + kMomentsHeader + "')");

    MomentField f;
    std::vector<double> ts, xs, values, ses;
    bool first_row = true;
    std::string source_seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != 7)
            throw IoError("moments.csv line " + std::to_string(line_no) + ": expected 7 fields, got " +
                          std::to_string(fields.size()));
        const double t = parse_double(fields[0], "t", line_no);
        const double x = parse_double(fields[1], "x", line_no);
        const long nu = parse_long(fields[2], "nu", line_no);
        const double value = parse_double(fields[3], "value", line_no);
        const double se = parse_double(fields[4], "se", line_no);
        const long n_paths = parse_long(fields[5], "n_paths", line_no);
        const std::string& source = fields[6];
        if (source != "mc" && source != "oracle")
            throw IoError("moments.csv line " + std::to_string(line_no) + ": bad source '" + source + "'");
        if (first_row) {
            f.nu = static_cast<int>(nu);
            f.n_paths = n_paths;
            source_seen = source;
            first_row = false;
        } else {
            if (nu != f.nu || n_paths != f.n_paths || source != source_seen)
                throw IoError("moments.csv line " + std::to_string(line_no) +
                              ": nu/n_paths/source changed mid-file");
        }
        ts.push_back(t);
        xs.push_back(x);
        values.push_back(value);
        ses.push_back(se);
    }
    if (values.empty()) throw IoError("moments.csv has no data rows: " + path);

    // Reconstruct the t-major grid: the first time block defines the x-axis.
    std::size_t n_x = 1;
    while (n_x < ts.size() && ts[n_x] == ts[0]) ++n_x;
    if (ts.size() % n_x != 0)
        throw IoError("moments.csv: row count " + std::to_string(ts.size()) +
                      " is not a multiple of the x-block size " + std::to_string(n_x));
    const std::size_t n_t = ts.size() / n_x;
    f.xs.assign(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(n_x));
    f.times.resize(n_t);
    for (std::size_t k = 0; k < n_t; ++k) {
        f.times[k] = ts[k * n_x];
        for (std::size_t i = 0; i < n_x; ++i) {
            const std::size_t r = k * n_x + i;
            if (ts[r] != f.times[k] || xs[r] != f.xs[i])
                throw IoError("moments.csv row " + std::to_string(r + 2) + ": grid is not t-major rectangular");
        }
    }
    f.values = std::move(values);
    f.ses = std::move(ses);
    f.source = source_seen == "mc" ? FieldSource::MonteCarlo : FieldSource::Oracle;
    f.validate();
    return f;
}

std::string growth_csv_string(const GrowthIndexReport& report) {
    std::string out;
    out += kGrowthHeader;
    out += '\n';
    for (std::size_t a = 0; a < report.alphas.size(); ++a) {
        out += format_g17(report.alphas[a]);
        out += ',';
        out += format_g17(report.slopes[a]);
        out += ',';
        out += format_g17(report.slope_ses[a]);
        out += ',';
        out += trend_label(report.trends[a]);
        out += '\n';
    }
    return out;
}

void write_growth_csv(const GrowthIndexReport& report, const std::string& path) {
    write_text(path, growth_csv_string(report));
}

} // namespace peaklab
