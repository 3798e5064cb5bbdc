#pragma once

#include <stdexcept>
#include <string>

namespace wb {

// Base for everything the toolkit throws on purpose. `kind()` is the short
// name that ends up in reports when a check dies instead of failing cleanly.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define WB_DEFINE_ERROR(Name)                                                  \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(#Name, what) {}         \
    };

WB_DEFINE_ERROR(InvalidMesh)
WB_DEFINE_ERROR(DegenerateElement)
WB_DEFINE_ERROR(DerivativeUnavailable)
WB_DEFINE_ERROR(NonSPDMetric)
WB_DEFINE_ERROR(ViolationFound)
WB_DEFINE_ERROR(BoundaryTooRough)
WB_DEFINE_ERROR(HomotopyClassAmbiguous)
WB_DEFINE_ERROR(InvalidLoop)
WB_DEFINE_ERROR(SamplingTooCoarse)
WB_DEFINE_ERROR(NotTangent)
WB_DEFINE_ERROR(DegenerateConfiguration)
WB_DEFINE_ERROR(NotRegularValue)
WB_DEFINE_ERROR(SingularSystem)
WB_DEFINE_ERROR(InadmissibleTrial)
WB_DEFINE_ERROR(NearCriticalLevel)
WB_DEFINE_ERROR(LevelOutOfRange)
WB_DEFINE_ERROR(NotExtendable)
WB_DEFINE_ERROR(LoopsNotDisjoint)
WB_DEFINE_ERROR(NotC2)
WB_DEFINE_ERROR(ConfigError)
WB_DEFINE_ERROR(ParseError)

#undef WB_DEFINE_ERROR

}  // namespace wb
