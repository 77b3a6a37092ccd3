#pragma once

#include "lsvj/diffusion.hpp"
#include "lsvj/jumps.hpp"
#include "lsvj/model.hpp"
#include "lsvj/oracles.hpp"
#include "lsvj/pricer.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace lsvj {

struct ConvergenceOptions {
    std::string axis = "time";
    int levels = 4;
    /// Coarsest dt for the time study, coarsest n per axis for the space study.
    double dt0 = 0.04;
    std::size_t n0 = 21;
};

struct TimingOptions {
    std::vector<std::size_t> sizes{31, 41, 51, 61};
    int repeats = 3;
};

/// Parsed run configuration. `resolved` is the input document with any
/// external model file inlined; its hash labels every artifact.
struct RunConfig {
    ModelSpec model;
    InstrumentSpec instrument;
    GridSpec grid;
    SolverConfig solver;
    JumpOptions jumps;
    ConvergenceOptions convergence;
    TimingOptions timing;
    oracles::McConfig mc;
    std::filesystem::path output = "out";
    std::uint64_t seed = 20240101;
    nlohmann::json resolved;

    std::string hash() const;
};

ModelSpec parse_model(const nlohmann::json& j);
InstrumentSpec parse_instrument(const nlohmann::json& j);
GridSpec parse_grid(const nlohmann::json& j);
SolverConfig parse_solver(const nlohmann::json& j);

/// Throws Config on unknown keys, wrong types or failed validation.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);

/// 64-bit FNV-1a of the compact dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

/// CSV file opened on construction: a "# config_hash=..." line and the header.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& hash, const std::vector<std::string>& columns);

    /// NaN cells are written empty.
    void row(const std::vector<double>& values);
    void row_text(const std::vector<std::string>& cells);

private:
    std::ofstream os_;
    std::size_t width_;
};

std::string format_number(double x);

}  // namespace lsvj
