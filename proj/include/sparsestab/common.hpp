#pragma once

#include <stdexcept>
#include <string>

namespace sparsestab {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SPARSESTAB_ERROR(Name)                                        \
    struct Name : Error {                                             \
        explicit Name(const std::string& msg = #Name) : Error(msg) {} \
    }

SPARSESTAB_ERROR(BadDimensions);
SPARSESTAB_ERROR(NonFiniteData);
SPARSESTAB_ERROR(ColumnLimitExceeded);
SPARSESTAB_ERROR(SingularGram);
SPARSESTAB_ERROR(NotSymmetric);
SPARSESTAB_ERROR(SizeLimit);
SPARSESTAB_ERROR(NumericalBreakdown);
SPARSESTAB_ERROR(Unbounded);
SPARSESTAB_ERROR(NotOnSphere);
SPARSESTAB_ERROR(MeshRefinementFailed);
SPARSESTAB_ERROR(Infeasible);
SPARSESTAB_ERROR(NotNested);
SPARSESTAB_ERROR(EmptyPolyhedron);
SPARSESTAB_ERROR(LpFailure);
SPARSESTAB_ERROR(NoConvergence);
SPARSESTAB_ERROR(PatternInfeasible);
SPARSESTAB_ERROR(PatternMissing);
SPARSESTAB_ERROR(SingularWeight);
SPARSESTAB_ERROR(NoInvertibleSubmatrix);
SPARSESTAB_ERROR(MissingConstant);
SPARSESTAB_ERROR(ParseError);

#undef SPARSESTAB_ERROR

}  // namespace sparsestab
