#pragma once

#include <stdexcept>
#include <string>

namespace verimap {

// Base class for all harness errors. The code string is stable and machine
// readable; what() carries the human message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct UnknownLabelError : Error {
    explicit UnknownLabelError(const std::string& raw)
        : Error("UnknownLabel", "not a recognized task label: \"" + raw + "\"") {}
};

struct ArityError : Error {
    explicit ArityError(std::size_t got)
        : Error("ArityError", "majority vote requires exactly 3 labels, got " + std::to_string(got)) {}
};

struct SchemaError : Error {
    SchemaError(std::size_t line_no, const std::string& detail)
        : Error("SchemaError", "line " + std::to_string(line_no) + ": " + detail), line(line_no) {}
    std::size_t line;
};

struct DuplicateIdError : Error {
    explicit DuplicateIdError(const std::string& id)
        : Error("DuplicateId", "duplicate example id \"" + id + "\"") {}
};

struct MissingSlotError : Error {
    explicit MissingSlotError(const std::string& name)
        : Error("MissingSlot", "template slot not provided: " + name) {}
};

struct JudgeParseError : Error {
    explicit JudgeParseError(const std::string& raw)
        : Error("JudgeParseError", "judge output contains neither CORRECT nor INCORRECT: \"" + raw + "\"") {}
};

struct TransportError : Error {
    explicit TransportError(const std::string& detail)
        : Error("TransportError", detail) {}
};

struct RateLimitedError : Error {
    explicit RateLimitedError(const std::string& detail)
        : Error("RateLimited", detail) {}
};

struct BackendRefusalError : Error {
    explicit BackendRefusalError(const std::string& detail)
        : Error("BackendRefusal", detail) {}
};

struct CacheCorruptionError : Error {
    explicit CacheCorruptionError(const std::string& key)
        : Error("CacheCorruption", "stored payload does not match digest for key " + key) {}
};

struct EmptyInputError : Error {
    explicit EmptyInputError(const std::string& what_empty)
        : Error("EmptyInput", what_empty) {}
};

struct InconsistentCountsError : Error {
    explicit InconsistentCountsError(const std::string& detail)
        : Error("InconsistentCounts", detail) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& detail)
        : Error("ConfigError", detail) {}
};

struct NegativeStatisticError : Error {
    explicit NegativeStatisticError(double lambda)
        : Error("NegativeStatistic", "LRT statistic " + std::to_string(lambda) + " below tolerance") {}
};

struct AllZeroVarianceError : Error {
    AllZeroVarianceError() : Error("AllZeroVariance", "all variance components are zero") {}
};

struct MissingLevelError : Error {
    explicit MissingLevelError(const std::string& key)
        : Error("MissingLevel", "no conditional mode for level \"" + key + "\"") {}
};

struct DegenerateXError : Error {
    DegenerateXError() : Error("DegenerateX", "predictor is constant or has fewer than 3 points") {}
};

struct AllZeroDifferencesError : Error {
    AllZeroDifferencesError() : Error("AllZeroDifferences", "all paired differences are zero") {}
};

struct InsufficientGroupsError : Error {
    InsufficientGroupsError() : Error("InsufficientGroups", "need at least 2 nonempty groups") {}
};

struct ZeroVarianceError : Error {
    ZeroVarianceError() : Error("ZeroVariance", "differences have zero standard deviation") {}
};

struct FormulaError : Error {
    explicit FormulaError(const std::string& detail)
        : Error("FormulaError", detail) {}
};

struct DataError : Error {
    explicit DataError(const std::string& detail)
        : Error("DataError", detail) {}
};

struct QuarantineError : Error {
    QuarantineError(std::size_t failed, std::size_t total, double threshold)
        : Error("QuarantineOverflow",
                std::to_string(failed) + "/" + std::to_string(total) +
                    " examples failed, above threshold " + std::to_string(threshold)) {}
};

struct EmptyRunError : Error {
    explicit EmptyRunError(const std::string& dir)
        : Error("EmptyRun", "run directory has no records: " + dir) {}
};

}  // namespace verimap
