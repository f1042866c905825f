#include "bdl/error.hpp"

namespace bdl {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::BetaMassOutOfRange: return "BetaMassOutOfRange";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::InvalidData: return "InvalidData";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::AllAtomsPruned: return "AllAtomsPruned";
    case ErrorCode::NoSamplesCollected: return "NoSamplesCollected";
    case ErrorCode::ZeroDictionary: return "ZeroDictionary";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DimensionOverflow: return "DimensionOverflow";
    case ErrorCode::InfeasibleSparsity: return "InfeasibleSparsity";
    case ErrorCode::ClassOutOfRange: return "ClassOutOfRange";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace bdl
