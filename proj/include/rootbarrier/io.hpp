#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "rootbarrier/barrier.hpp"
#include "rootbarrier/measures.hpp"
#include "rootbarrier/obstacle_solver.hpp"
#include "rootbarrier/optimality.hpp"
#include "rootbarrier/pricing.hpp"
#include "rootbarrier/simulate.hpp"

namespace rootbarrier::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// Reads a whole JSON file; InputError naming the path when missing or malformed.
[[nodiscard]] json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& j);

/// {kind, params | atoms | density_table | samples}. Kinds: dirac, atoms,
/// empirical, normal, lognormal, tabulated_density.
[[nodiscard]] Measure measure_from_json(const json& j);
[[nodiscard]] json measure_to_json(const Measure& m);
[[nodiscard]] Measure read_measure(const fs::path& path);

/// `strike,price` CSV plus a JSON sidecar {spot, discount_factor, maturity}
/// where discount_factor = 1 / B_T. An optional rate_curve {times, rates}
/// replaces the flat rate implied by the discount factor.
[[nodiscard]] MarketData read_market(const fs::path& quotes_csv, const fs::path& sidecar);
void write_market(const MarketData& m, const fs::path& quotes_csv, const fs::path& sidecar);

void write_barrier(const Barrier& b, const fs::path& csv, const fs::path& meta);
void write_solution(const ObstacleSolution& sol, const fs::path& csv, const fs::path& meta);
void write_hedge_functions(const HedgeFunctions& hf, const fs::path& dir);

[[nodiscard]] json batch_summary(const PathBatch& b, const Measure* target);
void write_paths_csv(const PathBatch& b, const fs::path& csv);

[[nodiscard]] json hedge_report_json(const HedgeReport& r);
[[nodiscard]] json subhedge_json(const SubhedgeReport& s);

/// Number formatting shared by every CSV writer; `inf` for infinities.
[[nodiscard]] std::string num(double v);

}  // namespace rootbarrier::io
