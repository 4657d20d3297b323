#pragma once

#include <string>
#include <vector>

#include "dynab/checks.hpp"
#include "dynab/levelset.hpp"
#include "dynab/morse_smale.hpp"

namespace dynab {

// Floats with 17 significant digits; infinities as the literal "inf".
std::string csv_double(double v);

// FNV-1a over the raw config bytes; stamped on every artifact.
std::uint64_t config_hash(const std::string& text);

void write_cells_csv(const std::string& path, const OrderedCover& cover,
                     std::uint64_t hash);
void write_phi_csv(const std::string& path, const DiscreteSystem& D,
                   std::uint64_t hash);
void write_boxmap_csv(const std::string& path, const BoxMap& bm, std::uint64_t hash);
void write_order_csv(const std::string& path, const ConnectionOrder& order,
                     std::uint64_t hash);
void write_violations_csv(const std::string& path,
                          const std::vector<std::pair<std::string, ApproximationReport>>& reports,
                          std::uint64_t hash);
void write_conservativeness_csv(const std::string& path, const ConservativenessEstimate& est,
                                std::uint64_t hash);
void write_trajectories_csv(const std::string& path, const ContinuousSystem& C,
                            int n_trajectories, const std::vector<double>& times,
                            std::uint64_t seed, std::uint64_t hash);
void write_cells_svg(const std::string& path, const OrderedCover& cover,
                     const DiscreteSystem& D, double t, std::uint64_t hash);

}  // namespace dynab
