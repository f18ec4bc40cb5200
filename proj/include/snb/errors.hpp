#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace snb {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SNB_DEFINE_ERROR(Name)                                                                     \
    class Name : public Error {                                                                    \
    public:                                                                                        \
        using Error::Error;                                                                        \
    }

SNB_DEFINE_ERROR(CycleDetected);
SNB_DEFINE_ERROR(ConfigInvalid);
SNB_DEFINE_ERROR(UnsatisfiableDependency);
SNB_DEFINE_ERROR(IoError);
SNB_DEFINE_ERROR(NoQualifyingGroup);
SNB_DEFINE_ERROR(InsufficientPairs);
SNB_DEFINE_ERROR(MissingBucket);
SNB_DEFINE_ERROR(IntegrityError);
SNB_DEFINE_ERROR(DependencyMissing);
SNB_DEFINE_ERROR(UnknownEntity);
SNB_DEFINE_ERROR(DeadlockSuspected);

class UnknownPerson : public UnknownEntity {
public:
    using UnknownEntity::UnknownEntity;
};

class UnknownMessage : public UnknownEntity {
public:
    using UnknownEntity::UnknownEntity;
};

#undef SNB_DEFINE_ERROR

/// Malformed input; carries the 1-based line number it was found on.
class ParseError : public Error {
public:
    ParseError(std::string source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), source_(std::move(source)),
          line_(line) {}

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

} // namespace snb
