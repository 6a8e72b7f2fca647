#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "sphirf/field_sim.hpp"

namespace sphirf {

inline constexpr const char* kFieldCsvHeader = "location_id,lat_deg,lon_deg,t,value";

/// Long-format field table `location_id,lat_deg,lon_deg,t,value`. Locations keep
/// their first-appearance order; the (location, t) cells must form a complete rectangle
/// over consecutive t. Longitudes in [-180, 360) are accepted and wrapped.
SampledField parse_field_csv(std::istream& in, const std::string& source = "<stream>");
SampledField read_field_csv(const std::filesystem::path& path);

/// Rows ordered by location then t, numbers printed with 17 significant digits.
void format_field_csv(const SampledField& field, std::ostream& out);
void write_field_csv(const SampledField& field, const std::filesystem::path& path);

}  // namespace sphirf
