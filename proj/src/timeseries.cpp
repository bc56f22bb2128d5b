#include "arrkit/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace arrkit {

// ============================================================================
// Dataset
// ============================================================================

bool Dataset::has(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::size_t Dataset::index_of(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw SchemaError("unknown variable: " + name);
    return static_cast<std::size_t>(it - names.begin());
}

const std::vector<double>& Dataset::col(const std::string& name) const {
    return samples[index_of(name)];
}

void Dataset::validate() const {
    if (names.size() != samples.size())
        throw SchemaError("name/sequence count mismatch");
    if (names.empty()) throw SchemaError("dataset has no variables");
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (n.empty()) throw SchemaError("empty variable name");
        if (!seen.insert(n).second) throw SchemaError("duplicate variable name: " + n);
    }
    const std::size_t n = samples.front().size();
    if (n < 2) throw InsufficientDataError("dataset needs at least 2 samples");
    for (std::size_t v = 0; v < samples.size(); ++v) {
        if (samples[v].size() != n)
            throw SchemaError("unequal sequence lengths at variable " + names[v]);
        for (double x : samples[v])
            if (!std::isfinite(x))
                throw ValidationError("non-finite sample in variable " + names[v]);
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive and finite");
}

Dataset make_dataset(std::vector<std::string> names,
                     std::vector<std::vector<double>> samples,
                     double dt, double t0) {
    Dataset ds;
    ds.names = std::move(names);
    ds.samples = std::move(samples);
    ds.dt = dt;
    ds.t0 = t0;
    ds.validate();
    return ds;
}

// ============================================================================
// Operations
// ============================================================================

std::vector<double> integrate(const std::vector<double>& series, double dt) {
    if (series.size() < 2) throw DegenerateDataError("integrate: series length < 2");
    if (!(dt > 0.0)) throw ValidationError("integrate: dt must be > 0");
    std::vector<double> out(series.size());
    out[0] = 0.0;
    for (std::size_t i = 1; i < series.size(); ++i)
        out[i] = out[i - 1] + 0.5 * (series[i - 1] + series[i]) * dt;
    return out;
}

Dataset add_integral_columns(const Dataset& ds, const std::vector<std::string>& variables) {
    Dataset out = ds;
    for (const auto& name : variables) {
        const auto& src = ds.col(name);  // SchemaError if missing
        const std::string derived = "int_" + name;
        if (out.has(derived)) throw SchemaError("name collision: " + derived);
        out.names.push_back(derived);
        out.samples.push_back(integrate(src, ds.dt));
    }
    return out;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> build_design_matrix(
    const Dataset& ds, const std::vector<FeatureRef>& features, const std::string& target) {
    const auto& y_col = ds.col(target);
    int max_lag = 0;
    for (const auto& f : features) {
        if (f.lag < 0) throw ValidationError("negative lag");
        if (f.transform == Transform::integral && f.lag != 0)
            throw ValidationError("integral transform requires lag 0");
        max_lag = std::max(max_lag, f.lag);
    }
    const std::size_t n = ds.n_samples();
    if (static_cast<std::size_t>(max_lag) >= n)
        throw InsufficientDataError("max lag >= sample count");

    const std::size_t rows = n - static_cast<std::size_t>(max_lag);
    Eigen::MatrixXd X(rows, static_cast<Eigen::Index>(features.size()));
    for (std::size_t j = 0; j < features.size(); ++j) {
        const auto& f = features[j];
        const std::vector<double>* src = &ds.col(f.variable);
        std::vector<double> integrated;
        if (f.transform == Transform::integral) {
            integrated = integrate(*src, ds.dt);
            src = &integrated;
        }
        for (std::size_t r = 0; r < rows; ++r)
            X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                (*src)[r + static_cast<std::size_t>(max_lag - f.lag)];
    }
    Eigen::VectorXd y(rows);
    for (std::size_t r = 0; r < rows; ++r)
        y(static_cast<Eigen::Index>(r)) = y_col[r + static_cast<std::size_t>(max_lag)];
    return {std::move(X), std::move(y)};
}

std::pair<Dataset, Dataset> chrono_split(const Dataset& ds, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw ValidationError("train_fraction must be in (0,1)");
    const std::size_t n = ds.n_samples();
    const auto n_train =
        static_cast<std::size_t>(std::ceil(spec.train_fraction * static_cast<double>(n)));
    if (n_train < 2 || n - n_train < 2)
        throw InsufficientDataError("chrono_split: partition too small");

    Dataset train, valid;
    train.names = valid.names = ds.names;
    train.dt = valid.dt = ds.dt;
    train.t0 = ds.t0;
    valid.t0 = ds.t0 + static_cast<double>(n_train) * ds.dt;
    for (const auto& s : ds.samples) {
        train.samples.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n_train));
        valid.samples.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(n_train), s.end());
    }
    return {std::move(train), std::move(valid)};
}

// ============================================================================
// CSV I/O
// ============================================================================

namespace {

double parse_double(const std::string& tok, const std::string& ctx) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ValidationError("CSV: bad numeric value '" + tok + "' in " + ctx);
    if (!std::isfinite(v)) throw ValidationError("CSV: non-finite value in " + ctx);
    return v;
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

Dataset read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open CSV file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ValidationError("CSV: empty file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_line(line);
    if (header.size() < 2 || header[0] != "time")
        throw ValidationError("CSV: header must start with 'time' and have >= 1 variable");

    std::vector<std::string> names(header.begin() + 1, header.end());
    std::vector<std::vector<double>> cols(names.size());
    std::vector<double> times;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto toks = split_line(line);
        if (toks.size() != header.size())
            throw ValidationError("CSV: wrong field count at row " + std::to_string(row));
        const std::string ctx = "row " + std::to_string(row);
        times.push_back(parse_double(toks[0], ctx));
        for (std::size_t j = 0; j < names.size(); ++j)
            cols[j].push_back(parse_double(toks[j + 1], ctx));
    }
    if (times.size() < 2) throw InsufficientDataError("CSV: fewer than 2 data rows");

    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) throw ValidationError("CSV: time must be strictly increasing");
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double step = times[i] - times[i - 1];
        if (!(step > 0.0)) throw ValidationError("CSV: time must be strictly increasing");
        if (std::abs(step - dt) > 1e-9 * std::max(std::abs(dt), 1.0))
            throw ValidationError("CSV: non-uniform time step at row " + std::to_string(i + 1));
    }
    return make_dataset(std::move(names), std::move(cols), dt, times[0]);
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: byte-stable newlines
    if (!out) throw ValidationError("cannot write CSV file: " + path);
    out << "time";
    for (const auto& n : ds.names) out << ',' << n;
    out << '\n';
    const std::size_t n = ds.n_samples();
    for (std::size_t i = 0; i < n; ++i) {
        out << format_double(ds.time(i));
        for (const auto& s : ds.samples) out << ',' << format_double(s[i]);
        out << '\n';
    }
    if (!out) throw ValidationError("write failure on CSV file: " + path);
}

}  // namespace arrkit
