#pragma once

#include <stdexcept>
#include <string>

namespace radsurv {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// volume-io
struct UnsupportedFormat : Error { using Error::Error; };
struct CorruptHeader : Error { using Error::Error; };
struct DimMismatch : Error { using Error::Error; };
struct InvalidLabel : Error {
    double label;
    explicit InvalidLabel(double v)
        : Error("invalid mask label " + std::to_string(v) +
                " (expected one of 0,1,2,4)"), label(v) {}
};
struct IndexOutOfRange : Error { using Error::Error; };

// preprocess
struct DegenerateSlice : Error { using Error::Error; };

// features
struct EmptyROI : Error { using Error::Error; };
struct EmptyMask : Error { using Error::Error; };
struct ContourTooShort : Error { using Error::Error; };
struct NoValidPairs : Error { using Error::Error; };
struct NoInteriorPixels : Error { using Error::Error; };

// dataset
struct MissingColumn : Error { using Error::Error; };
struct MalformedRow : Error {
    std::size_t line_no;
    explicit MalformedRow(std::size_t line)
        : Error("malformed CSV row at line " + std::to_string(line)),
          line_no(line) {}
};
struct UnknownSubject : Error {
    explicit UnknownSubject(const std::string& id)
        : Error("subject '" + id + "' has no clinical record") {}
};

// classifiers
struct SingleClass : Error { using Error::Error; };
struct NonFiniteFeature : Error {
    std::size_t row, col;
    NonFiniteFeature(std::size_t r, std::size_t c)
        : Error("non-finite feature at row " + std::to_string(r) +
                ", col " + std::to_string(c)), row(r), col(c) {}
};
struct DimensionMismatch : Error { using Error::Error; };
struct NotAForest : Error { using Error::Error; };

// evaluation
struct TooFewPerClass : Error { using Error::Error; };
struct EmptyRow : Error { using Error::Error; };
struct EmptySubject : Error { using Error::Error; };

} // namespace radsurv
