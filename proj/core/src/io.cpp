#include "golearn/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace golearn {

namespace fs = std::filesystem;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvTable::CsvTable(std::string schema, std::vector<std::string> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size()) throw DimMismatch("CSV row width mismatch in " + schema_);
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
    std::string out = "# golearn " + schema_ + " v" + std::to_string(kCsvSchemaVersion) + "\n";
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (c) out += ',';
        out += columns_[c];
    }
    out += '\n';
    for (const auto& row : rows_) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, std::string>) out += v;
                    else if constexpr (std::is_same_v<T, double>) out += format_double(v);
                    else out += std::to_string(v);
                },
                row[c]);
        }
        out += '\n';
    }
    return out;
}

void CsvTable::write(const fs::path& path) const {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << str();
    if (!f) throw IoError("failed writing " + path.string());
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::size_t CsvData::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return i;
    }
    throw IoError("missing CSV column " + name);
}

double CsvData::number(std::size_t row, const std::string& name) const {
    return std::stod(rows.at(row).at(column(name)));
}

CsvData read_csv(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    CsvData d;
    std::string line;
    bool header = false;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            d.columns = split(line);
            header = true;
        } else {
            auto row = split(line);
            if (row.size() != d.columns.size()) throw IoError("ragged CSV row in " + path.string());
            d.rows.push_back(std::move(row));
        }
    }
    if (!header) throw IoError("empty CSV " + path.string());
    return d;
}

CsvTable moments_table(const std::vector<std::pair<long long, MomentEstimate>>& rows) {
    CsvTable t("moments",
               {"iter", "mean", "second_moment", "variance", "se", "capped_fraction"});
    for (const auto& [it, m] : rows) {
        t.add_row({it, m.mean, m.second_moment, m.variance, m.std_error_mean, m.capped_fraction});
    }
    return t;
}

CsvTable loss_table(const std::string& loss_kind, const TrainTrace& trace) {
    CsvTable t("loss", {"iter", "loss_kind", "value", "second_moment_term", "rer_term", "m_phi",
                        "observable_mean", "observable_var"});
    for (const auto& r : trace.records) {
        t.add_row({static_cast<long long>(r.iter), loss_kind, r.loss.value,
                   r.loss.second_moment_term, r.loss.rer_term, r.loss.m_phi, r.observable_mean,
                   r.observable_var});
    }
    return t;
}

CsvTable trace_table(const std::string& loss_kind, const TrainTrace& trace) {
    std::vector<std::string> cols = {"iter",          "loss_kind",        "value",
                                     "second_moment_term", "rer_term",    "m_phi",
                                     "observable_mean", "observable_var", "grad_norm",
                                     "g1_norm",       "g2_norm",          "oracle_error",
                                     "deterministic_loss", "oracle_mean", "oracle_variance"};
    const std::size_t d = trace.records.empty() ? 0 : trace.records.front().theta.size();
    for (std::size_t i = 0; i < d; ++i) cols.push_back("theta_" + std::to_string(i + 1));
    CsvTable t("trace", cols);
    for (const auto& r : trace.records) {
        std::vector<CsvTable::Cell> row = {static_cast<long long>(r.iter),
                                           loss_kind,
                                           r.loss.value,
                                           r.loss.second_moment_term,
                                           r.loss.rer_term,
                                           r.loss.m_phi,
                                           r.observable_mean,
                                           r.observable_var,
                                           r.grad_norm,
                                           r.g1_norm,
                                           r.g2_norm,
                                           r.diagnostics.oracle_error,
                                           r.diagnostics.deterministic_loss,
                                           r.diagnostics.oracle_mean,
                                           r.diagnostics.oracle_variance};
        for (double v : r.theta) row.emplace_back(v);
        t.add_row(std::move(row));
    }
    return t;
}

CsvTable grad_check_table(const std::vector<GradCheckRow>& rows) {
    CsvTable t("grad_check", {"coordinate", "analytic", "fd", "rel_err", "mode"});
    for (const auto& r : rows) {
        t.add_row({static_cast<long long>(r.coordinate), r.analytic, r.fd, r.rel_err,
                   to_string(r.mode)});
    }
    return t;
}

CsvTable bound_scan_table(const std::vector<std::pair<double, DivergenceReport>>& rows) {
    CsvTable t("bound_scan",
               {"theta", "abs_error", "rer_forward", "rer_reverse", "path_kl_forward",
                "path_kl_reverse", "gibbs_kl_forward", "gibbs_kl_reverse", "go_bound_forward",
                "go_bound_reverse", "ckp_bound"});
    for (const auto& [th, r] : rows) {
        t.add_row({th, r.abs_error_observable, r.rer_forward, r.rer_reverse, r.path_kl_forward,
                   r.path_kl_reverse, r.gibbs_kl_forward, r.gibbs_kl_reverse, r.go_bound_forward,
                   r.go_bound_reverse, r.ckp_bound});
    }
    return t;
}

CsvTable oracle_table(const std::vector<std::array<double, 3>>& rows) {
    CsvTable t("oracle", {"theta", "m1", "m2"});
    for (const auto& r : rows) t.add_row({r[0], r[1], r[2]});
    return t;
}

CsvTable path_table(const PathSample& path) {
    std::vector<std::string> cols = {"t"};
    for (std::size_t i = 0; i < path.dim; ++i) cols.push_back("x_" + std::to_string(i + 1));
    CsvTable t("path", cols);
    for (std::size_t k = 0; k < path.length(); ++k) {
        std::vector<CsvTable::Cell> row = {path.dt * static_cast<double>(k)};
        for (double v : path.state(k)) row.emplace_back(v);
        t.add_row(std::move(row));
    }
    return t;
}

CsvTable states_table(const StateSet& states, const PotentialModel* model) {
    std::vector<std::string> cols;
    const std::size_t m = states.dim;
    for (std::size_t i = 0; i < m; ++i) cols.push_back("x_" + std::to_string(i + 1));
    if (model) {
        cols.push_back("V");
        for (std::size_t i = 0; i < m; ++i) cols.push_back("b_" + std::to_string(i + 1));
    }
    CsvTable t("states", cols);
    Vector b(m);
    for (std::size_t j = 0; j < states.size(); ++j) {
        std::vector<CsvTable::Cell> row;
        for (double v : states[j]) row.emplace_back(v);
        if (model) {
            row.emplace_back(model->value(states[j]));
            model->drift(states[j], b);
            for (double v : b) row.emplace_back(v);
        }
        t.add_row(std::move(row));
    }
    return t;
}

StateSet read_states_csv(const fs::path& path) {
    const CsvData d = read_csv(path);
    std::vector<std::size_t> idx;
    for (std::size_t c = 0; c < d.columns.size(); ++c) {
        if (d.columns[c].rfind("x_", 0) == 0) idx.push_back(c);
    }
    if (idx.empty()) throw IoError("no state columns in " + path.string());
    StateSet s(idx.size());
    for (const auto& row : d.rows) {
        for (std::size_t c : idx) s.data.push_back(std::stod(row[c]));
    }
    return s;
}

namespace {

constexpr std::array<char, 4> kStatesMagic = {'G', 'L', 'S', 'T'};
constexpr std::array<char, 4> kPathMagic = {'G', 'L', 'P', 'A'};
constexpr std::uint32_t kBinaryVersion = 1;

template <class T>
void put(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
T get(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!f) throw IoError("truncated binary cache");
    return v;
}
void put_doubles(std::ofstream& f, const Vector& v) {
    f.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}
Vector get_doubles(std::ifstream& f, std::size_t n) {
    Vector v(n);
    f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!f) throw IoError("truncated binary cache");
    return v;
}

std::ofstream open_out(const fs::path& path, const std::array<char, 4>& magic) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write(magic.data(), 4);
    put(f, kBinaryVersion);
    return f;
}

std::ifstream open_in(const fs::path& path, const std::array<char, 4>& magic) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::array<char, 4> m{};
    f.read(m.data(), 4);
    if (!f || m != magic) throw IoError("bad magic in " + path.string());
    if (get<std::uint32_t>(f) != kBinaryVersion) throw IoError("unsupported cache version");
    return f;
}

}  // namespace

void write_states_binary(const fs::path& path, const StateSet& states) {
    auto f = open_out(path, kStatesMagic);
    put<std::uint64_t>(f, states.dim);
    put<std::uint64_t>(f, states.size());
    put_doubles(f, states.data);
    if (!f) throw IoError("failed writing " + path.string());
}

StateSet read_states_binary(const fs::path& path) {
    auto f = open_in(path, kStatesMagic);
    const auto dim = get<std::uint64_t>(f);
    const auto n = get<std::uint64_t>(f);
    return StateSet(dim, get_doubles(f, dim * n));
}

void write_path_binary(const fs::path& path, const PathSample& p) {
    auto f = open_out(path, kPathMagic);
    put<std::uint64_t>(f, p.dim);
    put<double>(f, p.dt);
    put<std::uint64_t>(f, p.stop_index);
    put<std::uint8_t>(f, p.capped ? 1 : 0);
    put<std::uint8_t>(f, p.has_noise ? 1 : 0);
    put<std::uint64_t>(f, p.fingerprint);
    put<std::uint64_t>(f, p.stop_tag.size());
    f.write(p.stop_tag.data(), static_cast<std::streamsize>(p.stop_tag.size()));
    put<std::uint64_t>(f, p.states.size());
    put_doubles(f, p.states);
    put<std::uint64_t>(f, p.noise.size());
    put_doubles(f, p.noise);
    if (!f) throw IoError("failed writing " + path.string());
}

PathSample read_path_binary(const fs::path& path) {
    auto f = open_in(path, kPathMagic);
    PathSample p;
    p.dim = get<std::uint64_t>(f);
    p.dt = get<double>(f);
    p.stop_index = get<std::uint64_t>(f);
    p.capped = get<std::uint8_t>(f) != 0;
    p.has_noise = get<std::uint8_t>(f) != 0;
    p.fingerprint = get<std::uint64_t>(f);
    const auto tag_len = get<std::uint64_t>(f);
    p.stop_tag.resize(tag_len);
    f.read(p.stop_tag.data(), static_cast<std::streamsize>(tag_len));
    p.states = get_doubles(f, get<std::uint64_t>(f));
    p.noise = get_doubles(f, get<std::uint64_t>(f));
    return p;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

}  // namespace golearn
