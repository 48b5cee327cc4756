#pragma once

#include <stdexcept>
#include <string>

namespace pvcast {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// power_client
struct InvalidQuery : Error {
    using Error::Error;
};
struct NetworkError : Error {
    using Error::Error;
};
struct FixtureMissing : Error {
    using Error::Error;
};
struct HttpStatusError : Error {
    HttpStatusError(int status_, const std::string& url)
        : Error("HTTP status " + std::to_string(status_) + " for " + url), status(status_) {}
    int status;
};
struct ParseError : Error {
    ParseError(const std::string& json_path, const std::string& what_)
        : Error("parse error at " + json_path + ": " + what_), path(json_path) {}
    std::string path;
};

// dataset
struct EmptyDataset : Error {
    using Error::Error;
};
struct DegenerateTarget : Error {
    using Error::Error;
};
struct TooFewSamples : Error {
    using Error::Error;
};

// gnb
struct EmptyTrainingSet : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct FormatVersionMismatch : Error {
    using Error::Error;
};
struct CorruptModel : Error {
    using Error::Error;
};

// eval
struct EmptyTestSet : Error {
    using Error::Error;
};
struct EmptyMatrix : Error {
    using Error::Error;
};

}  // namespace pvcast
