#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "golearn/gradients.hpp"
#include "golearn/info_metrics.hpp"
#include "golearn/observables.hpp"
#include "golearn/optimize.hpp"
#include "golearn/sde.hpp"

namespace golearn {

inline constexpr int kCsvSchemaVersion = 1;

/// Buffered CSV table. Doubles are written with %.17g so that values
/// round-trip exactly; the first line is "# golearn <schema> v<version>".
class CsvTable {
public:
    using Cell = std::variant<std::string, double, long long>;

    CsvTable(std::string schema, std::vector<std::string> columns);

    void add_row(std::vector<Cell> row);
    std::string str() const;
    void write(const std::filesystem::path& path) const;

    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t rows() const { return rows_.size(); }

private:
    std::string schema_;
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

std::string format_double(double v);

/// Parsed CSV: header and string cells; '#' lines are skipped.
struct CsvData {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
};
CsvData read_csv(const std::filesystem::path& path);

CsvTable moments_table(const std::vector<std::pair<long long, MomentEstimate>>& rows);
CsvTable loss_table(const std::string& loss_kind, const TrainTrace& trace);
/// Loss columns plus gradient norms, diagnostics and theta.
CsvTable trace_table(const std::string& loss_kind, const TrainTrace& trace);
CsvTable grad_check_table(const std::vector<GradCheckRow>& rows);
CsvTable bound_scan_table(const std::vector<std::pair<double, DivergenceReport>>& rows);
CsvTable oracle_table(const std::vector<std::array<double, 3>>& rows);
CsvTable path_table(const PathSample& path);
/// x_1..x_m, and V and b_1..b_m when `model` is given.
CsvTable states_table(const StateSet& states, const PotentialModel* model = nullptr);

StateSet read_states_csv(const std::filesystem::path& path);

/// Compact binary caches: magic, version, dim, count, then little-endian doubles.
void write_states_binary(const std::filesystem::path& path, const StateSet& states);
StateSet read_states_binary(const std::filesystem::path& path);
void write_path_binary(const std::filesystem::path& path, const PathSample& p);
PathSample read_path_binary(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace golearn
