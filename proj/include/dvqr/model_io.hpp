#pragma once

#include <string>

#include "dvqr/quantreg.hpp"

namespace dvqr {

/// Raised on malformed model documents; the message names the location.
struct ModelParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Serialize the model as a JSON document. Numbers are written with 17
/// significant digits (round-trip exact for doubles); output is byte-stable.
std::string save_model(const QuantRegModel& m);

/// Parse a document produced by save_model. Verifies the per-margin sample
/// digests and the vine layout.
QuantRegModel load_model(const std::string& text);

void save_model_file(const QuantRegModel& m, const std::string& path);
QuantRegModel load_model_file(const std::string& path);

}  // namespace dvqr
