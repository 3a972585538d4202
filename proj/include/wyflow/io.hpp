#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wyflow/background.hpp"
#include "wyflow/flow.hpp"
#include "wyflow/oracle.hpp"
#include "wyflow/spectral.hpp"
#include "wyflow/trace.hpp"

namespace wyflow::io {

/// Shortest round-trip form is not required; always 17 significant digits.
std::string format_double(double value);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string trace_csv(const FlowTrace& trace);
std::string trace_json(const FlowTrace& trace);

/// Columns: coordinate(s) then value.
std::string field_csv(const Background& bg, const Field& field, const std::string& name);
std::string field_json(const Background& bg, const Field& field, const std::string& name);

/// Reads the last column of a field CSV with a header row.
Field read_field_csv(const std::filesystem::path& path);

/// Flat keys: converged, steps, r_inf, steady_residual, case, wall_time_seconds.
std::string summary_json(const FlowResult& result);

/// Columns: index, lambda.
std::string spectrum_csv(const Spectrum& spectrum);

/// Columns: h, error, order (the fitted order repeated on every row).
std::string refinement_csv(const oracle::RefinementReport& report);

}  // namespace wyflow::io
