#pragma once

#include <stdexcept>
#include <string>

namespace tabscout {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

#define TABSCOUT_DEFINE_ERROR(Name)                                                                \
    class Name : public Error {                                                                    \
      public:                                                                                      \
        using Error::Error;                                                                        \
    }

TABSCOUT_DEFINE_ERROR(IoError);
TABSCOUT_DEFINE_ERROR(EmptyCorpus);
TABSCOUT_DEFINE_ERROR(MalformedGraph);
TABSCOUT_DEFINE_ERROR(EncoderFailure);
TABSCOUT_DEFINE_ERROR(DimensionMismatch);
TABSCOUT_DEFINE_ERROR(IndexFormatError);
TABSCOUT_DEFINE_ERROR(UnparseableOutput);
TABSCOUT_DEFINE_ERROR(UnknownHeader);
TABSCOUT_DEFINE_ERROR(GroupExplosion);
TABSCOUT_DEFINE_ERROR(LlmFailure);
TABSCOUT_DEFINE_ERROR(InvalidSql);
TABSCOUT_DEFINE_ERROR(EngineError);
TABSCOUT_DEFINE_ERROR(MissingQuestion);
TABSCOUT_DEFINE_ERROR(ConfigError);

#undef TABSCOUT_DEFINE_ERROR

} // namespace tabscout
