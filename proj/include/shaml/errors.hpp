#pragma once

#include <stdexcept>
#include <string>

namespace shaml {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SHAML_DEFINE_ERROR(Name)                                      \
    struct Name : Error {                                             \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
    }

// ingestion
SHAML_DEFINE_ERROR(MissingColumn);
SHAML_DEFINE_ERROR(ParseError);
SHAML_DEFINE_ERROR(InvariantViolation);
SHAML_DEFINE_ERROR(NetworkError);
SHAML_DEFINE_ERROR(SchemaDrift);
SHAML_DEFINE_ERROR(EmptyResult);
SHAML_DEFINE_ERROR(EmptyClass);
SHAML_DEFINE_ERROR(DegenerateSplit);
SHAML_DEFINE_ERROR(InvalidClassSpec);

// features
SHAML_DEFINE_ERROR(MissingFeature);
SHAML_DEFINE_ERROR(NonPositiveFeature);
SHAML_DEFINE_ERROR(NonPositiveEntry);
SHAML_DEFINE_ERROR(UnknownFeature);
SHAML_DEFINE_ERROR(MissingApColumns);

// numerics
SHAML_DEFINE_ERROR(RankDeficient);
SHAML_DEFINE_ERROR(NotSymmetric);
SHAML_DEFINE_ERROR(DimensionMismatch);

// models / metrics
SHAML_DEFINE_ERROR(Degenerate);
SHAML_DEFINE_ERROR(DegenerateConfig);
SHAML_DEFINE_ERROR(NonFinite);
SHAML_DEFINE_ERROR(LengthMismatch);
SHAML_DEFINE_ERROR(Empty);

// experiments
SHAML_DEFINE_ERROR(EmptyStratum);
SHAML_DEFINE_ERROR(EmptyData);
SHAML_DEFINE_ERROR(ConfigError);

#undef SHAML_DEFINE_ERROR

}  // namespace shaml
