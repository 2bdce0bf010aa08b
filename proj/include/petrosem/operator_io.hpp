#pragma once

#include <string>

#include "petrosem/operator_spec.hpp"

namespace petrosem {

/// Parses the operator document:
/// { "m": int, "n": int, "d": int,
///   "terms": [ { "alpha": [int...], "matrix": [[[re,im]...]...] } ] }
/// Matrices are row-major, complex entries as [re, im]. Schema
/// violations throw InputError with the offending field named.
OperatorSpec parse_operator_json(const std::string& text);
OperatorSpec load_operator_file(const std::string& path);

std::string operator_to_json(const OperatorSpec& op);

/// Round-trip exact float formatting (17 significant digits).
std::string format_float(double v);

}  // namespace petrosem
