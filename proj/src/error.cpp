#include "fvnn/error.hpp"

namespace fvnn {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::config: return "config";
        case ErrorCode::dimension: return "dimension";
        case ErrorCode::shape: return "shape";
        case ErrorCode::parameter: return "parameter";
        case ErrorCode::group: return "group";
        case ErrorCode::empty_data: return "empty_data";
        case ErrorCode::numeric: return "numeric";
        case ErrorCode::io: return "io";
        case ErrorCode::schema: return "schema";
        case ErrorCode::parse: return "parse";
        case ErrorCode::state: return "state";
        case ErrorCode::symmetry: return "symmetry";
        case ErrorCode::stratification: return "stratification";
        case ErrorCode::architecture: return "architecture";
        case ErrorCode::training: return "training";
        case ErrorCode::batch_composition: return "batch_composition";
        case ErrorCode::undefined_constant: return "undefined_constant";
    }
    return "unknown";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace fvnn
