#pragma once

// JSON schemas for the experiment configs, one per subcommand.  The CLI
// validates every config against its schema before any computation; the
// `print-schema` subcommand publishes them.

namespace conevortex::schemas {

inline constexpr const char* kGridFragment = R"json({
  "type": "object",
  "required": ["nx", "ny"],
  "additionalProperties": false,
  "properties": {
    "nx": {"type": "integer", "minimum": 8},
    "ny": {"type": "integer", "minimum": 8},
    "lx": {"type": "number", "exclusiveMinimum": 0},
    "ly": {"type": "number", "exclusiveMinimum": 0}
  }
})json";

inline constexpr const char* kKwSolve = R"json({
  "type": "object",
  "required": ["B", "w"],
  "additionalProperties": false,
  "properties": {
    "B": {"type": "string"},
    "w": {"type": "string"},
    "tol": {"type": "number", "exclusiveMinimum": 0},
    "max_iter": {"type": "integer", "minimum": 1},
    "backend": {"type": "string", "enum": ["spectral", "stencil"]},
    "method": {"type": "string", "enum": ["newton", "picard"]},
    "out_dir": {"type": "string"}
  }
})json";

inline constexpr const char* kVortexMake = R"json({
  "type": "object",
  "required": ["grid", "d", "tau"],
  "additionalProperties": false,
  "properties": {
    "grid": {"$ref": "grid"},
    "d": {"type": "integer", "minimum": 1},
    "tau": {"type": "number"},
    "coeffs": {"type": "array", "minItems": 1,
               "items": {"type": "array", "minItems": 2,
                         "items": {"type": "number"}}},
    "seed": {"type": "integer", "minimum": 0},
    "tol": {"type": "number", "exclusiveMinimum": 0},
    "max_iter": {"type": "integer", "minimum": 1},
    "backend": {"type": "string", "enum": ["spectral", "stencil"]},
    "out_dir": {"type": "string"}
  }
})json";

inline constexpr const char* kSvGaugeFix = R"json({
  "type": "object",
  "required": ["grid", "d", "tau", "n"],
  "additionalProperties": false,
  "properties": {
    "grid": {"$ref": "grid"},
    "d": {"type": "integer", "minimum": 1},
    "tau": {"type": "number"},
    "n": {"type": "integer", "minimum": 1},
    "coeffs": {"type": "array", "minItems": 1,
               "items": {"type": "array", "minItems": 1,
                         "items": {"type": "array", "minItems": 2,
                                   "items": {"type": "number"}}}},
    "seed": {"type": "integer", "minimum": 0},
    "tol": {"type": "number", "exclusiveMinimum": 0},
    "max_iter": {"type": "integer", "minimum": 1},
    "backend": {"type": "string", "enum": ["spectral", "stencil"]},
    "out_dir": {"type": "string"}
  }
})json";

inline constexpr const char* kPiMap = R"json({
  "type": "object",
  "required": ["solution_dir"],
  "additionalProperties": false,
  "properties": {
    "solution_dir": {"type": "string"},
    "backend": {"type": "string", "enum": ["spectral", "stencil"]},
    "out_dir": {"type": "string"}
  }
})json";

inline constexpr const char* kThresholdScan = R"json({
  "type": "object",
  "required": ["grid", "d", "tau_list"],
  "additionalProperties": false,
  "properties": {
    "grid": {"$ref": "grid"},
    "d": {"type": "integer", "minimum": 1},
    "tau_list": {"type": "array", "minItems": 1, "items": {"type": "number"}},
    "coeffs": {"type": "array", "minItems": 1,
               "items": {"type": "array", "minItems": 2,
                         "items": {"type": "number"}}},
    "seed": {"type": "integer", "minimum": 0},
    "tol": {"type": "number", "exclusiveMinimum": 0},
    "max_iter": {"type": "integer", "minimum": 1},
    "backend": {"type": "string", "enum": ["spectral", "stencil"]},
    "out_dir": {"type": "string"}
  }
})json";

}  // namespace conevortex::schemas
