#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mkdv/checks.hpp"
#include "mkdv/marchenko.hpp"
#include "mkdv/solution.hpp"
#include "mkdv/triplet.hpp"

namespace mkdv {

// Raised for malformed configs and block specs; maps to exit code 1.
// Messages carry the offending field path.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parsed run configuration. The triplet source (raw matrices or canonical
// blocks) is already materialized; grid and tolerance overrides are
// optional depending on the command.
struct RunConfig {
  Triplet triplet;
  std::optional<GridSpec> grid;
  std::map<std::string, double> tolerances;
};

// Parse a JSON config document / load one from a file. Matrix entries and
// scalar fields accept JSON numbers or strings, where strings may be
// decimal or exact rationals like "7/16".
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

// One numeric token: decimal ("0.4375") or exact rational ("7/16").
double parse_number_token(const std::string& s);

// CSV serialization of a grid sweep: fixed header
// x,t,u,v,u_minus_v,pde_residual,status with LF endings, full round-trip
// precision, status ok or overflow.
std::string grid_to_csv(const std::vector<GridRow>& rows);
std::string grid_to_json(const std::vector<GridRow>& rows);

// JSON serializations for the CLI surface. Triplet output is accepted back
// as a raw-matrix config.
std::string triplet_to_json(const Triplet& t);
std::string validation_to_json(const ValidationReport& r);
std::string validation_to_text(const ValidationReport& r);
std::string solutions_to_json(const Triplet& t, const MarchenkoSolutions& s);
std::string solutions_to_text(const Triplet& t, const MarchenkoSolutions& s);
std::string invariants_to_json(const InvariantReport& r);

}  // namespace mkdv
