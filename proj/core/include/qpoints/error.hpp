#pragma once

#include <stdexcept>
#include <string>

namespace qp {

// Failure taxonomy shared by the library and the CLI exit-code mapping.
enum class errc {
  // algebra / maps
  not_divisible,
  not_monic,
  shift_not_integral,
  not_integral,
  singular_transform,
  point_not_on_curve,
  singular_curve,
  divisibility_failure,
  not_a_representation_of_one,
  not_integer_matrix,
  zero_discriminant,
  invariant_mismatch,
  // statistics
  precondition_violated,
  not_smooth,
  // ingestion / configuration / storage
  parse_error,
  duplicate_curve,
  config_error,
  config_mismatch,
  corrupt_cache,
  io_error,
  // a property the engine checks on its own output failed
  invariant_violation,
};

const char* errc_name(errc c);

class error : public std::runtime_error {
public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), _code(code) {}

  errc code() const { return _code; }

private:
  errc _code;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace qp
