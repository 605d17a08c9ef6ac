#pragma once

#include <stdexcept>
#include <string>

namespace quasitile {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MixedGroups : Error { using Error::Error; };
struct EmptySet : Error { using Error::Error; };
struct ResourceLimit : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct InsufficientSequence : Error { using Error::Error; };
struct NonMonotoneBetas : Error { using Error::Error; };
struct BadTileChain : Error { using Error::Error; };
struct OutOfWindow : Error { using Error::Error; };
struct Unsupported : Error { using Error::Error; };
struct UnsupportedModel : Error { using Error::Error; };
struct NotASubset : Error { using Error::Error; };
struct WitnessMissing : Error { using Error::Error; };
struct TilingUnverified : Error { using Error::Error; };
struct EigensolverFailure : Error { using Error::Error; };

} // namespace quasitile
