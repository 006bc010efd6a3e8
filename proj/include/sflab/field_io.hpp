#pragma once

// Versioned binary container for sampled fields and connection forms.
//
//   bytes 0..7    magic "SFLFIELD"
//   bytes 8..11   format version (uint32, little endian)
//   bytes 12..19  header length H (uint64, little endian)
//   next H bytes  JSON header: kind, n, rank, components, profile, k,
//                 convention, payload_bytes, payload_sha256
//   payload       complex doubles (re, im) in library storage order
//
// The payload of a connection form is alpha_1, alpha_2, alpha_3 back to back.

#include <iosfwd>
#include <optional>
#include <string>

#include "sflab/gauge.hpp"

namespace sflab {

inline constexpr std::uint32_t kFieldFormatVersion = 1;

struct FieldMetadata {
  std::optional<int> k;
  double profile_radius = 0.0;
  double profile_steepness = 0.0;
  std::string convention;  // defaults to convention_tag() when written
};

void write_field(std::ostream& os, const UnitaryField& field, const FieldMetadata& meta);
void write_field(std::ostream& os, const ConnectionForm& form, const FieldMetadata& meta);

UnitaryField read_unitary_field(std::istream& is, FieldMetadata* meta = nullptr);
ConnectionForm read_connection_form(std::istream& is, FieldMetadata* meta = nullptr);

}  // namespace sflab
