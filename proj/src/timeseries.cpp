#include "vibroid/timeseries.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vibroid {

namespace {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void TimeSeries::validate() const {
    if (static_cast<Index>(names.size()) != values.rows()) {
        throw std::runtime_error("timeseries: " + std::to_string(names.size()) +
                                 " names for " + std::to_string(values.rows()) + " channels");
    }
    if (!(dt > 0.0) && samples() > 1) {
        throw std::runtime_error("timeseries: dt must be positive");
    }
}

void write_csv(const std::filesystem::path& path, const TimeSeries& series) {
    series.validate();
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("csv: cannot write " + path.string());
    }
    out << "t";
    for (const auto& name : series.names) {
        if (name.find_first_of(",\"\n") != std::string::npos) {
            throw std::runtime_error("csv: channel name '" + name + "' needs quoting; "
                                     "use plain names");
        }
        out << ',' << name;
    }
    out << '\n';
    for (Index k = 0; k < series.samples(); ++k) {
        out << format_double(series.time_at(k));
        for (Index r = 0; r < series.channels(); ++r) {
            out << ',' << format_double(series.values(r, k));
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error("csv: write failed for " + path.string());
    }
}

TimeSeries read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("csv: cannot read " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("csv: " + path.string() + " is empty");
    }
    TimeSeries series;
    {
        std::stringstream header(line);
        std::string cell;
        bool first = true;
        while (std::getline(header, cell, ',')) {
            if (first) {
                if (cell != "t") {
                    throw std::runtime_error("csv: " + path.string() +
                                             ": first column must be 't', got '" + cell + "'");
                }
                first = false;
            } else {
                series.names.push_back(cell);
            }
        }
        if (first) {
            throw std::runtime_error("csv: " + path.string() + ": missing header");
        }
    }

    std::vector<double> times;
    std::vector<std::vector<double>> rows;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream cells(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(cells, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::runtime_error("csv: " + path.string() + ":" +
                                         std::to_string(line_no) + ": bad number '" + cell +
                                         "'");
            }
        }
        if (row.size() != series.names.size() + 1) {
            throw std::runtime_error("csv: " + path.string() + ":" + std::to_string(line_no) +
                                     ": expected " + std::to_string(series.names.size() + 1) +
                                     " cells, got " + std::to_string(row.size()));
        }
        times.push_back(row.front());
        row.erase(row.begin());
        rows.push_back(std::move(row));
    }
    if (times.empty()) {
        throw std::runtime_error("csv: " + path.string() + ": no data rows");
    }

    series.t0 = times.front();
    series.dt = times.size() > 1 ? times[1] - times[0] : 0.0;
    for (size_t k = 2; k < times.size(); ++k) {
        const double step = times[k] - times[k - 1];
        if (std::abs(step - series.dt) > 1e-9 * std::max(std::abs(series.dt), 1.0)) {
            throw std::runtime_error("csv: " + path.string() +
                                     ": time column is not uniformly spaced");
        }
    }
    series.values.resize(static_cast<Index>(series.names.size()),
                         static_cast<Index>(times.size()));
    for (size_t k = 0; k < rows.size(); ++k) {
        for (size_t r = 0; r < rows[k].size(); ++r) {
            series.values(static_cast<Index>(r), static_cast<Index>(k)) = rows[k][r];
        }
    }
    return series;
}

}  // namespace vibroid
