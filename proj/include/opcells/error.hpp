#pragma once

#include <stdexcept>
#include <string>

namespace opcells {

enum class Err {
  NotSurjective,
  AdjacentRepeat,
  ComplexityViolation,
  FaceUndefined,
  ArityMismatch,
  ResourceLimit,
  DegenerateCoordinate,
  BadConstantTerm,
  ValuationViolation,
  IllConditioned,
  StepLimit,
  CaptureAmbiguity,
  BoundaryProximity,
  AmbiguousFirstHit,
  Precondition,
  Parse,
};

inline const char* err_name(Err e) {
  switch (e) {
    case Err::NotSurjective: return "NotSurjective";
    case Err::AdjacentRepeat: return "AdjacentRepeat";
    case Err::ComplexityViolation: return "ComplexityViolation";
    case Err::FaceUndefined: return "FaceUndefined";
    case Err::ArityMismatch: return "ArityMismatch";
    case Err::ResourceLimit: return "ResourceLimit";
    case Err::DegenerateCoordinate: return "DegenerateCoordinate";
    case Err::BadConstantTerm: return "BadConstantTerm";
    case Err::ValuationViolation: return "ValuationViolation";
    case Err::IllConditioned: return "IllConditioned";
    case Err::StepLimit: return "StepLimit";
    case Err::CaptureAmbiguity: return "CaptureAmbiguity";
    case Err::BoundaryProximity: return "BoundaryProximity";
    case Err::AmbiguousFirstHit: return "AmbiguousFirstHit";
    case Err::Precondition: return "Precondition";
    case Err::Parse: return "Parse";
  }
  return "?";
}

struct Error : std::runtime_error {
  Err kind;
  Error(Err k, const std::string& msg)
      : std::runtime_error(std::string(err_name(k)) + ": " + msg), kind(k) {}
};

}  // namespace opcells
