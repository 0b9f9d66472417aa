#pragma once

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "nlslab/evolution.hpp"
#include "nlslab/ground_state.hpp"

namespace nlslab {

/// Profile cache document {p, lambda, dim, mu, eps, alpha, samples, ...};
/// doubles are emitted in shortest round-trip form, so load(save(x)) == x
/// bitwise.
nlohmann::json profile_to_json(const GroundStateProfile& profile);
GroundStateProfile profile_from_json(const nlohmann::json& j);

/// Gzip-compressed JSON checkpoint {t, eps, grid:{...}, psi_re, psi_im}.
void save_checkpoint(const std::string& path, const EvolutionState& state);
EvolutionState load_checkpoint(const std::string& path);

/// Manifold point document {eps, p, lambda, solitons:[{a, v, gamma, mu}]}.
nlohmann::json manifold_to_json(const ManifoldPoint& point, double p, double lambda, int dim);
struct ManifoldDocument {
    ManifoldPoint point;
    double p = 3.0;
    double lambda = 1.0;
    int dim = 1;
};
ManifoldDocument manifold_from_json(const nlohmann::json& j);

std::string read_gzip_file(const std::string& path);
void write_gzip_file(const std::string& path, const std::string& content);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Stable 64-bit content hash (FNV-1a) for run metadata.
std::uint64_t fnv1a64(const std::string& s);

/// Shortest-width formatting that round-trips doubles exactly.
std::string format_double(double x);

/// Reject any key of the object that is not in the allow list.
void require_known_keys(const nlohmann::json& obj, const std::vector<std::string>& allowed,
                        const std::string& where);

} // namespace nlslab
