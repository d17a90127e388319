#ifndef SOAS_ERRORS_HPP
#define SOAS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace soas {

// Error taxonomy for the whole pipeline. Each condition gets its own type so
// callers and tests can catch precisely; Error carries the code for generic
// handling (CLI exit codes, diagnostics).
enum class Errc {
    empty_request,
    invalid_descriptor,
    frame_too_large,
    truncated_frame,
    malformed_payload,
    no_agents_given,
    request_id_mismatch,
    storage_failure,
    malformed_line,
    io_failure,
    unsupported_format,
    bind_failure,
    registration_failure,
    no_agents_available,
    no_agents_responded,
    bad_config,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::empty_request:        return "EmptyRequest";
        case Errc::invalid_descriptor:   return "InvalidDescriptor";
        case Errc::frame_too_large:      return "FrameTooLarge";
        case Errc::truncated_frame:      return "TruncatedFrame";
        case Errc::malformed_payload:    return "MalformedPayload";
        case Errc::no_agents_given:      return "NoAgentsGiven";
        case Errc::request_id_mismatch:  return "RequestIdMismatch";
        case Errc::storage_failure:      return "StorageFailure";
        case Errc::malformed_line:       return "MalformedLine";
        case Errc::io_failure:           return "IoFailure";
        case Errc::unsupported_format:   return "UnsupportedFormat";
        case Errc::bind_failure:         return "BindFailure";
        case Errc::registration_failure: return "RegistrationFailure";
        case Errc::no_agents_available:  return "NoAgentsAvailable";
        case Errc::no_agents_responded:  return "NoAgentsResponded";
        case Errc::bad_config:           return "BadConfig";
    }
    return "Error";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

#define SOAS_DEFINE_ERROR(Name, code)                             \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& what) : Error(code, what) {} \
    }

SOAS_DEFINE_ERROR(EmptyRequest, Errc::empty_request);
SOAS_DEFINE_ERROR(InvalidDescriptor, Errc::invalid_descriptor);
SOAS_DEFINE_ERROR(FrameTooLarge, Errc::frame_too_large);
SOAS_DEFINE_ERROR(TruncatedFrame, Errc::truncated_frame);
SOAS_DEFINE_ERROR(MalformedPayload, Errc::malformed_payload);
SOAS_DEFINE_ERROR(NoAgentsGiven, Errc::no_agents_given);
SOAS_DEFINE_ERROR(RequestIdMismatch, Errc::request_id_mismatch);
SOAS_DEFINE_ERROR(StorageFailure, Errc::storage_failure);
SOAS_DEFINE_ERROR(MalformedLine, Errc::malformed_line);
SOAS_DEFINE_ERROR(IoFailure, Errc::io_failure);
SOAS_DEFINE_ERROR(UnsupportedFormat, Errc::unsupported_format);
SOAS_DEFINE_ERROR(BindFailure, Errc::bind_failure);
SOAS_DEFINE_ERROR(RegistrationFailure, Errc::registration_failure);
SOAS_DEFINE_ERROR(NoAgentsAvailable, Errc::no_agents_available);
SOAS_DEFINE_ERROR(NoAgentsResponded, Errc::no_agents_responded);
SOAS_DEFINE_ERROR(BadConfig, Errc::bad_config);

#undef SOAS_DEFINE_ERROR

}  // namespace soas

#endif
