#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace storybuddy {

// Base for every error raised by the engine. Callers that only need a message
// can catch this; the service maps the concrete subclasses onto status codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input that is not well-formed JSON or UTF-8.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t byte_offset)
        : Error(what + " at byte " + std::to_string(byte_offset)), byte_offset_(byte_offset) {}

    std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

// A required field is missing or has the wrong JSON type.
class SchemaError : public Error {
public:
    explicit SchemaError(std::string field)
        : Error("missing or invalid field '" + field + "'"), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Well-typed input that violates a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// An operation that is not legal in the current dialogue state.
class ProtocolError : public Error {
public:
    using Error::Error;
};

// A recorded transcript that the automaton cannot reproduce.
class CorruptionError : public Error {
public:
    CorruptionError(std::size_t event_index, const std::string& what)
        : Error("transcript event " + std::to_string(event_index) + ": " + what),
          event_index_(event_index) {}

    std::size_t event_index() const noexcept { return event_index_; }

private:
    std::size_t event_index_;
};

// Failure talking to a remote collaborator (generator, speech endpoint).
class RemoteError : public Error {
public:
    using Error::Error;
};

}  // namespace storybuddy
