#include <fstream>
#include <ostream>

#include <json.hpp>

#include "latgamma/gammalab.hpp"

namespace latgamma {

void write_csv(std::ostream& out, const ConvergenceReport& r) {
  out << "eps,eta,energy,normalized,target,rel_error,mixed_count,mixed_measure,k1_perimeter\n";
  for (const auto& rec : r.records) {
    out << format_real(rec.eps) << ',' << format_real(rec.eta) << ',' << format_real(rec.energy) << ','
        << format_real(rec.normalized) << ',' << format_real(r.target.value) << ',' << format_real(rec.rel_error)
        << ',' << rec.mixed_count << ',' << format_real(rec.mixed_measure) << ',' << format_real(rec.k1_perimeter)
        << '\n';
  }
}

std::string to_json(const ConvergenceReport& r) {
  using nlohmann::json;
  json j;
  j["experiment"] = r.experiment;
  j["kernel"] = r.kernel;
  j["dimension"] = r.dimension;
  if (!r.direction.empty()) j["direction"] = r.direction;
  j["schedule_rule"] = r.schedule_rule;
  j["target"] = {{"value", r.target.value}, {"provenance", r.target.provenance}};
  j["error_kind"] = r.absolute_error ? "absolute" : "relative";
  j["rate"] = r.rate ? json(*r.rate) : json(nullptr);
  j["notes"] = r.notes;
  json steps = json::array();
  for (const auto& rec : r.records) {
    json s;
    s["eps"] = rec.eps;
    s["eta"] = rec.eta;
    s["range_ratio"] = rec.range_ratio;
    s["window_extent"] = std::vector<std::int64_t>(rec.window_extent.begin(), rec.window_extent.begin() + r.dimension);
    s["energy"] = rec.energy;
    s["normalized"] = rec.normalized;
    s["rel_error"] = rec.rel_error;
    s["interface_measure"] = rec.interface_measure;
    if (rec.line_bound >= 0.0) s["line_jump_bound"] = rec.line_bound;
    s["coarse"] = {{"cube_side_cells", rec.cube_side},
                   {"mixed", rec.mixed_count},
                   {"phase1", rec.phase1_count},
                   {"phase0", rec.phase0_count},
                   {"phase1_touching_phase0", rec.interface_cubes},
                   {"mixed_measure", rec.mixed_measure},
                   {"mixed_boundary", rec.mixed_boundary},
                   {"k1_perimeter", rec.k1_perimeter}};
    if (r.experiment == "counterexample") {
      s["unmasked_energy"] = rec.unmasked_energy;
      s["box_averages"] = rec.box_averages;
    }
    s["warnings"] = rec.warnings;
    steps.push_back(std::move(s));
  }
  j["steps"] = std::move(steps);
  return j.dump(2);
}

void write_report(const std::filesystem::path& dir, const std::string& stem, const ConvergenceReport& r) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto csv_path = dir / (stem + ".csv");
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw IoError("cannot open " + csv_path.string() + " for writing");
  write_csv(csv, r);
  if (!csv) throw IoError("failed writing " + csv_path.string());
  const auto json_path = dir / (stem + ".json");
  std::ofstream js(json_path, std::ios::binary);
  if (!js) throw IoError("cannot open " + json_path.string() + " for writing");
  js << to_json(r) << '\n';
  if (!js) throw IoError("failed writing " + json_path.string());
}

}  // namespace latgamma
