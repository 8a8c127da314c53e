#pragma once

/// @file serialization.hpp
/// JSON and CSV forms of subspaces, families, trajectories and reports.
/// Subspaces are {"ambient_dim": d, "basis": [[...], ...]} with one basis vector per row.

#include "altproj/certify.hpp"
#include "altproj/hilbert.hpp"
#include "altproj/iterates.hpp"
#include "altproj/quantities.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>

namespace altproj {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal form that round-trips; used for CSV cells.
std::string format_double(double v);

json to_json(const Vector& v);
Vector vector_from_json(const json& j);

json to_json(const Subspace& s);
/// Accepts "basis" (validated orthonormal) or "spanning" (orthonormalized). ambient_dim
/// falls back to `default_dim` when absent.
Subspace subspace_from_json(const json& j, Index default_dim = 0);

json to_json(const SubspaceFamily& f);
SubspaceFamily family_from_json(const json& j);

/// FNV-1a over the ambient dimension, ranks and basis bytes; 16 hex digits.
std::string family_hash(const SubspaceFamily& f);

json tolerances_json();

/// Metadata plus the norm/index/step-distance sequences (iterates are not included).
json to_json(const Trajectory& t, const std::string& family_hash_hex);
/// Header `n,norm,index,step_dist`; the index column is empty on row 0.
void write_trajectory_csv(std::ostream& os, const Trajectory& t);

json to_json(const SphereEstimate& e);
json to_json(const DictionaryRho& e);
json to_json(const QuantityReport& q);
json to_json(const SNormResult& r);
json to_json(const GreedyDirection& g);
json to_json(const NuResult& r);

/// {name, paper_ref, tolerance, max_violation, pass} plus worst_step and evaluated.
json to_json(const CheckResult& c);
json to_json(const CertificationReport& r);
json to_json(const RateFit& f);
json to_json(const RateReport& r);
json to_json(const DecayLedger& l);
json to_json(const BakersAgreement& b);

}  // namespace altproj
