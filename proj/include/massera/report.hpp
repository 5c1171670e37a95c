#pragma once
/**
 * @file report.hpp
 * @brief JSON reports (schema "report_v1") and plot-ready CSV series.
 *
 * Every top-level document carries "schema" and "command". Non-finite
 * numbers serialize as null. Key order is lexicographic, so identical
 * inputs give byte-identical output.
 */

#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <span>

#include "massera/analysis.hpp"
#include "massera/bebutov.hpp"
#include "massera/chain.hpp"
#include "massera/fixed_points.hpp"

namespace massera {

inline constexpr const char* kSchemaVersion = "report_v1";

[[nodiscard]] nlohmann::json to_json(const ClassificationReport& rep);
[[nodiscard]] nlohmann::json to_json(const FixedPointScan& scan);
/// The chain graph summary plus the recurrence report.
[[nodiscard]] nlohmann::json to_json(const ChainGraph& g, const CRReport& cr);
[[nodiscard]] nlohmann::json to_json(const BebutovDistance& d);
[[nodiscard]] nlohmann::json to_json(const LemmaCheck& c);

/// {"schema", "command", ...body}.
[[nodiscard]] nlohmann::json make_document(const char* command, nlohmann::json body = nlohmann::json::object());

/// Two-space indented JSON with a trailing newline.
void write_json(const nlohmann::json& doc, std::ostream& out);

/// CSV `t,r`.
void write_residuals_csv(std::span<const ResidualSample> residuals, std::ostream& out);
/// CSV `k,u`.
void write_iterates_csv(std::span<const double> values, std::ostream& out);

}  // namespace massera
