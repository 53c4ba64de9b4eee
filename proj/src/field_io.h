#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "theta_bundle.h"
#include "torus_field.h"

namespace conevortex {

// CVF1 dump: one UTF-8 JSON header line
//   {"magic":"CVF1","nx":..,"ny":..,"lx":..,"ly":..,"kind":"real"|"complex"}
// then a newline and raw little-endian IEEE f64, row-major; complex data is
// interleaved re/im.

void write_cvf1(const std::filesystem::path& path, const RealField& f);
void write_cvf1(const std::filesystem::path& path, const ComplexField& f);
void write_cvf1_section_values(const std::filesystem::path& path, const ComplexSection& s);

using Cvf1Payload = std::variant<RealField, ComplexField>;
Cvf1Payload read_cvf1(const std::filesystem::path& path);
RealField read_cvf1_real(const std::filesystem::path& path);
ComplexField read_cvf1_complex(const std::filesystem::path& path);

std::string divisor_to_json(const Divisor& d);
Divisor divisor_from_json(const std::string& text);

// Stable 64-bit FNV-1a content hash, used for config fingerprints.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

}  // namespace conevortex
