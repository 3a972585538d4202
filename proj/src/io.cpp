#include "wyflow/io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace wyflow::io {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

namespace {

std::vector<double> row_values(const TraceRow& r) {
  return {r.t,       r.r,      r.volume_raw, r.min_R,    r.max_R,
          r.min_w,   r.max_w,  r.sup_dev,    r.energy,   r.lambda_p,
          r.harnack_ratio_min, r.harnack_ratio_max, r.dphi_dt_min};
}

// nlohmann::json prints doubles in shortest round-trip form, which is lossless.
nlohmann::json coordinates(const Background& bg, int axis) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < bg.size(); ++i) out.push_back(bg.grid().coordinate(i, axis));
  return out;
}

}  // namespace

std::string trace_csv(const FlowTrace& trace) {
  std::ostringstream os;
  for (std::size_t c = 0; c < kTraceColumns.size(); ++c) os << (c ? "," : "") << kTraceColumns[c];
  os << '\n';
  for (const TraceRow& row : trace.rows) {
    const auto v = row_values(row);
    for (std::size_t c = 0; c < v.size(); ++c) os << (c ? "," : "") << format_double(v[c]);
    os << '\n';
  }
  return os.str();
}

std::string trace_json(const FlowTrace& trace) {
  nlohmann::ordered_json j;
  for (std::size_t c = 0; c < kTraceColumns.size(); ++c) {
    nlohmann::json col = nlohmann::json::array();
    for (const TraceRow& row : trace.rows) col.push_back(row_values(row)[c]);
    j[std::string(kTraceColumns[c])] = std::move(col);
  }
  return j.dump(1) + "\n";
}

std::string field_csv(const Background& bg, const Field& field, const std::string& name) {
  require_same_size(field, bg.size(), "field_csv");
  const bool two_d = bg.grid().dimension() == 2;
  std::ostringstream os;
  os << (two_d ? "x,y," : "s,") << name << '\n';
  for (std::size_t i = 0; i < field.size(); ++i) {
    os << format_double(bg.grid().coordinate(i, 0)) << ',';
    if (two_d) os << format_double(bg.grid().coordinate(i, 1)) << ',';
    os << format_double(field[i]) << '\n';
  }
  return os.str();
}

std::string field_json(const Background& bg, const Field& field, const std::string& name) {
  require_same_size(field, bg.size(), "field_json");
  nlohmann::ordered_json j;
  j[bg.grid().dimension() == 2 ? "x" : "s"] = coordinates(bg, 0);
  if (bg.grid().dimension() == 2) j["y"] = coordinates(bg, 1);
  j[name] = field.values();
  return j.dump(1) + "\n";
}

Field read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open field file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("field file " + path.string() + " is empty");
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::size_t comma = line.rfind(',');
    const std::string cell = comma == std::string::npos ? line : line.substr(comma + 1);
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
    } catch (const std::exception&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
    }
  }
  return Field(std::move(values));
}

std::string summary_json(const FlowResult& result) {
  nlohmann::ordered_json j;
  j["converged"] = result.converged;
  j["steps"] = result.steps_taken;
  j["r_inf"] = result.r_inf_estimate;
  j["steady_residual"] = result.steady_residual;
  j["case"] = std::string(case_label_id(result.case_label));
  j["wall_time_seconds"] = result.wall_time_seconds;
  return j.dump(2) + "\n";
}

std::string spectrum_csv(const Spectrum& spectrum) {
  std::ostringstream os;
  os << "index,lambda\n";
  for (std::size_t a = 0; a < spectrum.pairs.size(); ++a) os << a << ',' << format_double(spectrum.pairs[a].lambda) << '\n';
  return os.str();
}

std::string refinement_csv(const oracle::RefinementReport& report) {
  std::ostringstream os;
  os << "h,error,order\n";
  for (std::size_t i = 0; i < report.h.size(); ++i)
    os << format_double(report.h[i]) << ',' << format_double(report.errors[i]) << ','
       << format_double(report.order) << '\n';
  return os.str();
}

}  // namespace wyflow::io
